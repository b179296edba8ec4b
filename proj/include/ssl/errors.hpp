#ifndef SSL_ERRORS_HPP
#define SSL_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace ssl {

struct Error : std::runtime_error {
  Error(std::string code, std::string message)
      : std::runtime_error(code + ": " + message),
        code_(std::move(code)),
        message_(std::move(message)) {}
  const std::string& code() const { return code_; }
  const std::string& message() const { return message_; }

 private:
  std::string code_;
  std::string message_;
};

struct ZeroCoupling : Error {
  explicit ZeroCoupling(const std::string& m) : Error("ZeroCoupling", m) {}
};
struct SingularRegime : Error {
  explicit SingularRegime(const std::string& m) : Error("SingularRegime", m) {}
};
struct InvalidParams : Error {
  explicit InvalidParams(const std::string& m) : Error("InvalidParams", m) {}
};
struct NotApplicable : Error {
  explicit NotApplicable(const std::string& m) : Error("NotApplicable", m) {}
};
struct UnstableStep : Error {
  explicit UnstableStep(const std::string& m) : Error("UnstableStep", m) {}
};
struct ScheduleGap : Error {
  explicit ScheduleGap(const std::string& m) : Error("ScheduleGap", m) {}
};
struct EmptyRecord : Error {
  explicit EmptyRecord(const std::string& m) : Error("EmptyRecord", m) {}
};
struct FlatLandscape : Error {
  explicit FlatLandscape(const std::string& m) : Error("FlatLandscape", m) {}
};
struct Unidentifiable : Error {
  explicit Unidentifiable(const std::string& m) : Error("Unidentifiable", m) {}
};
struct InsufficientCycles : Error {
  explicit InsufficientCycles(const std::string& m) : Error("InsufficientCycles", m) {}
};
struct ParseError : Error {
  explicit ParseError(const std::string& m) : Error("ParseError", m) {}
};
struct ValidationError : Error {
  explicit ValidationError(const std::string& m) : Error("ValidationError", m) {}
};

}  // namespace ssl

#endif
