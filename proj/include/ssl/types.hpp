#ifndef SSL_TYPES_HPP
#define SSL_TYPES_HPP

#include <complex>
#include <Eigen/Dense>

namespace ssl {

using Complex = std::complex<double>;
using Vec2c = Eigen::Vector2cd;
using Mat2c = Eigen::Matrix2cd;
using ArrayXd = Eigen::ArrayXd;
using ArrayXc = Eigen::ArrayXcd;

inline constexpr double kPi = 3.14159265358979323846;
inline constexpr Complex kI{0.0, 1.0};

inline constexpr const char* kVersion = "0.1.0";

// All physics is computed with Gamma = 1 and L = 1. SI conversion happens
// only at the I/O boundary.
struct UnitSystem {
  double gamma_SI = 2.0 * kPi * 6.0e6;  // excited-state decay rate, rad/s
  double length_L = 1.0;                // medium length, unit of z

  double us_from_time(double t_gamma) const { return t_gamma / gamma_SI * 1e6; }
  double time_from_us(double t_us) const { return t_us * 1e-6 * gamma_SI; }
  // detunings are quoted as 2*pi*f; axis values carry f in kHz
  double kHz_from_detuning(double d_gamma) const {
    return d_gamma * gamma_SI / (2.0 * kPi) / 1e3;
  }
  double detuning_from_kHz(double f_khz) const {
    return 2.0 * kPi * f_khz * 1e3 / gamma_SI;
  }

  void validate() const;
};

}  // namespace ssl

#endif
