#include <cstdio>
#include <filesystem>
#include <string>

#include <CLI11.hpp>

#include "ssl/errors.hpp"
#include "ssl/io.hpp"
#include "ssl/log.hpp"

namespace {

int guarded(const std::function<int()>& body) {
  try {
    return body();
  } catch (const ssl::ParseError& e) {
    std::fprintf(stderr, "%s\n", e.what());
    return 2;
  } catch (const ssl::ValidationError& e) {
    std::fprintf(stderr, "%s\n", e.what());
    return 2;
  } catch (const ssl::Error& e) {
    std::fprintf(stderr, "%s\n", e.what());
    return 3;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 3;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"ssl-sim: spinor slow light simulation and calibration toolkit"};
  app.require_subcommand(1);

  std::string config_path, trace_path, scan_path, mode, out_dir;
  int threads = -1;
  std::uint64_t seed = 0;
  bool seed_given = false;
  double alpha = 0.0, omega_a = 0.0, gamma = 0.0;

  auto add_common = [&](CLI::App* cmd) {
    cmd->add_option("--threads", threads, "worker threads (0 = hardware)");
    cmd->add_option("--out", out_dir, "output directory");
    cmd->add_option("--seed", seed, "noise seed")->each([&](const std::string&) { seed_given = true; });
  };

  auto* run_cmd = app.add_subcommand("run", "run the protocol described by a JSON config");
  run_cmd->add_option("config", config_path, "config file")->required();
  add_common(run_cmd);

  auto* validate_cmd = app.add_subcommand("validate", "lint a config without computing");
  validate_cmd->add_option("config", config_path, "config file")->required();

  auto* cal_cmd = app.add_subcommand("calibrate", "fit medium parameters from a trace CSV");
  cal_cmd->add_option("mode", mode, "single-lambda or double-lambda")->required();
  cal_cmd->add_option("trace", trace_path, "trace CSV file")->required();
  cal_cmd->add_option("--alpha", alpha, "known optical density (double-lambda)");
  cal_cmd->add_option("--omega-a", omega_a, "known Omega_A (double-lambda)");
  cal_cmd->add_option("--gamma", gamma, "known gamma (double-lambda)");
  add_common(cal_cmd);

  auto* fit_cmd = app.add_subcommand("fit-period", "fit an oscillation period from a scan CSV");
  fit_cmd->add_option("scan", scan_path, "scan CSV file")->required();
  fit_cmd->add_option("--mode", mode, "delta or time")->required();
  add_common(fit_cmd);

  auto* tune_cmd = app.add_subcommand("tune-theta", "locate the eps_B null versus theta");
  tune_cmd->add_option("config", config_path, "config file")->required();
  add_common(tune_cmd);

  CLI11_PARSE(app, argc, argv);

  namespace fs = std::filesystem;
  ssl::UnitSystem units;

  if (run_cmd->parsed()) {
    return guarded([&] {
      ssl::io::ExperimentConfig cfg = ssl::io::load_config(config_path);
      if (threads >= 0) cfg.threads = threads;
      if (!out_dir.empty()) cfg.out_dir = out_dir;
      if (seed_given) cfg.seed = seed;
      return ssl::io::run(cfg);
    });
  }
  if (validate_cmd->parsed()) {
    return guarded([&] {
      ssl::io::load_config(config_path);
      std::printf("OK: %s\n", config_path.c_str());
      return 0;
    });
  }
  if (cal_cmd->parsed()) {
    return guarded([&] {
      const auto data = ssl::io::read_trace_csv(trace_path);
      ssl::calibration::FitResult fit;
      if (mode == "single-lambda") {
        fit = ssl::calibration::fit_single_lambda(data, units);
      } else if (mode == "double-lambda") {
        if (!(alpha > 0.0) || !(omega_a > 0.0))
          throw ssl::ValidationError("double-lambda needs --alpha and --omega-a");
        fit = ssl::calibration::fit_double_lambda(data, alpha, omega_a, gamma, units);
      } else {
        throw ssl::ValidationError("calibrate mode must be single-lambda or double-lambda");
      }
      const std::string dir = out_dir.empty() ? "." : out_dir;
      fs::create_directories(dir);
      ssl::io::write_fit_json((fs::path(dir) / "fit.json").string(), fit);
      std::printf("wrote %s\n", (fs::path(dir) / "fit.json").c_str());
      return 0;
    });
  }
  if (fit_cmd->parsed()) {
    return guarded([&] {
      const auto scan = ssl::io::read_scan_csv(scan_path);
      ssl::calibration::FitResult fit;
      std::vector<std::pair<std::string, double>> derived;
      if (mode == "delta") {
        fit = ssl::calibration::fit_oscillation_delta(scan);
        derived = {{"period_kHz", units.kHz_from_detuning(fit.param("period"))}};
      } else if (mode == "time") {
        fit = ssl::calibration::fit_oscillation_time(scan);
        derived = {{"T_s_us", units.us_from_time(fit.param("T_s"))},
                   {"tau_us", units.us_from_time(fit.param("tau"))},
                   {"delta_hat_kHz", units.kHz_from_detuning(ssl::kPi / fit.param("T_s"))}};
      } else {
        throw ssl::ValidationError("fit-period mode must be delta or time");
      }
      const std::string dir = out_dir.empty() ? "." : out_dir;
      fs::create_directories(dir);
      ssl::io::write_fit_json((fs::path(dir) / "fit.json").string(), fit, derived);
      std::printf("wrote %s\n", (fs::path(dir) / "fit.json").c_str());
      return 0;
    });
  }
  if (tune_cmd->parsed()) {
    return guarded([&] {
      ssl::io::ExperimentConfig cfg = ssl::io::load_config(config_path);
      if (threads >= 0) cfg.threads = threads;
      if (!out_dir.empty()) cfg.out_dir = out_dir;
      cfg.protocol = ssl::io::ProtocolSpec{};
      cfg.protocol.name = "tune_theta";
      return ssl::io::run(cfg);
    });
  }
  return 0;
}
