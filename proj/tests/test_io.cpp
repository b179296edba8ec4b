#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>

#include "ssl/errors.hpp"
#include "ssl/io.hpp"

using namespace ssl;
namespace fs = std::filesystem;

namespace {

fs::path temp_dir() {
  const auto dir = fs::temp_directory_path() / "ssl_io_test";
  fs::create_directories(dir);
  return dir;
}

fs::path write_config(const std::string& name, const std::string& body) {
  const auto path = temp_dir() / name;
  std::ofstream out(path);
  out << body;
  return path;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return std::string(std::istreambuf_iterator<char>(in), {});
}

const char* kTinyTrace = R"({
  "medium": {"alpha": 8.0, "gamma1": 0.0, "gamma2": 0.0, "dk_L": 0.0},
  "couplings": {"omega": 0.51, "theta": 3.141592653589793},
  "pulse": {"peak": 0.001, "center": 50.0, "width_e2": 30.0, "channel": "A"},
  "grid": {"n_z": 32, "dt": 0.1, "t_final": 140.0},
  "protocol": {"name": "trace", "delta": 0.0},
  "seed": 3,
  "noise": 0.0
})";

}  // namespace

TEST_CASE("load_config reads the bundled reference configuration") {
  const auto cfg = io::load_config(std::string(SSL_SOURCE_DIR) + "/configs/fig2c.json");
  CHECK(cfg.medium.alpha == doctest::Approx(20.0));
  CHECK(std::abs(cfg.couplings.omega[0]) == doctest::Approx(0.51));
  CHECK(cfg.medium.gamma2 == doctest::Approx(3.7e-3));
  CHECK(cfg.medium.dk_L == doctest::Approx(0.6));
  CHECK(relative_phase(cfg.couplings) == doctest::Approx(kPi));
  CHECK(cfg.protocol.name == "scan_delta");
  CHECK(cfg.protocol.delta_list.size() == 51);
  // +/- 500 kHz converted into Gamma units
  CHECK(cfg.protocol.delta_list.front() == doctest::Approx(-0.5 / 6.0).epsilon(1e-9));
  CHECK(cfg.pulse.width_e2 == doctest::Approx(94.2477796).epsilon(1e-6));
}

TEST_CASE("load_config validation failures name the offending field") {
  SUBCASE("missing file") {
    CHECK_THROWS_AS(io::load_config((temp_dir() / "nope.json").string()), ParseError);
  }
  SUBCASE("malformed JSON") {
    const auto p = write_config("bad.json", "{ not json");
    CHECK_THROWS_AS(io::load_config(p.string()), ParseError);
  }
  SUBCASE("negative alpha") {
    const auto p = write_config("alpha.json", R"({
      "medium": {"alpha": -1.0},
      "protocol": {"name": "trace"}
    })");
    try {
      io::load_config(p.string());
      FAIL("expected ValidationError");
    } catch (const ValidationError& e) {
      CHECK(std::string(e.what()).find("alpha") != std::string::npos);
    }
  }
  SUBCASE("unknown key") {
    const auto p = write_config("unknown.json", R"({
      "medium": {"alpha": 20.0, "bogus": 1},
      "protocol": {"name": "trace"}
    })");
    CHECK_THROWS_AS(io::load_config(p.string()), ValidationError);
  }
  SUBCASE("theta inconsistent with explicit phases") {
    const auto p = write_config("phases.json", R"({
      "couplings": {"omega": 0.51, "theta": 0.5,
                    "phases": [3.141592653589793, 0.0, 0.0, 0.0]},
      "protocol": {"name": "trace"}
    })");
    CHECK_THROWS_AS(io::load_config(p.string()), ValidationError);
  }
  SUBCASE("theta consistent with explicit phases is accepted") {
    const auto p = write_config("phases_ok.json", R"({
      "couplings": {"omega": 0.51, "theta": 3.141592653589793,
                    "phases": [3.141592653589793, 0.0, 0.0, 0.0]},
      "protocol": {"name": "trace"}
    })");
    CHECK_NOTHROW(io::load_config(p.string()));
  }
  SUBCASE("both unit variants rejected") {
    const auto p = write_config("units2.json", R"({
      "pulse": {"center": 120.0, "center_us": 3.0},
      "protocol": {"name": "trace"}
    })");
    CHECK_THROWS_AS(io::load_config(p.string()), ValidationError);
  }
  SUBCASE("unknown protocol") {
    const auto p = write_config("proto.json", R"({"protocol": {"name": "warp"}})");
    CHECK_THROWS_AS(io::load_config(p.string()), ValidationError);
  }
  SUBCASE("missing protocol-specific field") {
    const auto p = write_config("scan.json", R"({"protocol": {"name": "scan_delta"}})");
    CHECK_THROWS_AS(io::load_config(p.string()), ValidationError);
  }
}

TEST_CASE("run writes artifacts, a manifest and is byte-deterministic") {
  const auto cfg_path = write_config("trace.json", kTinyTrace);
  auto cfg = io::load_config(cfg_path.string());
  const auto out1 = temp_dir() / "run1";
  const auto out2 = temp_dir() / "run2";
  fs::remove_all(out1);
  fs::remove_all(out2);
  cfg.out_dir = out1.string();
  REQUIRE(io::run(cfg) == 0);
  cfg.out_dir = out2.string();
  REQUIRE(io::run(cfg) == 0);

  CHECK(fs::exists(out1 / "trace.csv"));
  CHECK(fs::exists(out1 / "run_manifest.json"));
  CHECK(slurp(out1 / "trace.csv") == slurp(out2 / "trace.csv"));

  // manifest lists every output with its content hash
  const std::string manifest = slurp(out1 / "run_manifest.json");
  CHECK(manifest.find("\"trace.csv\"") != std::string::npos);
  CHECK(manifest.find("\"status\": \"ok\"") != std::string::npos);
  char expect[32];
  std::snprintf(expect, sizeof(expect), "%016llx",
                static_cast<unsigned long long>(io::fnv1a64_file((out1 / "trace.csv").string())));
  CHECK(manifest.find(expect) != std::string::npos);
}

TEST_CASE("trace CSV round trip preserves values") {
  const auto cfg_path = write_config("trace2.json", kTinyTrace);
  auto cfg = io::load_config(cfg_path.string());
  const auto out = temp_dir() / "round";
  fs::remove_all(out);
  cfg.out_dir = out.string();
  cfg.noise = 0.01;  // exercise the deterministic noise path
  REQUIRE(io::run(cfg) == 0);
  const auto data = io::read_trace_csv((out / "trace.csv").string());
  CHECK(data.t.size() > 100);
  CHECK(data.p_in_a.maxCoeff() > 0.0);
  // time column pairs are consistent
  UnitSystem un;
  CHECK(un.us_from_time(data.t(10)) == doctest::Approx(data.t(10) / 37.6991118431).epsilon(1e-9));
}

TEST_CASE("scan CSV round trip and axis scaling") {
  protocols::ScanResult scan;
  scan.axis_name = "delta";
  scan.axis.resize(3);
  scan.axis << -0.01, 0.0, 0.012345678901;
  scan.t_a.resize(3);
  scan.t_a << 0.81234567890123, 0.5, 0.1;
  scan.t_b.resize(3);
  scan.t_b << 0.1, 0.25, 0.73456789012345;
  const auto path = (temp_dir() / "scan.csv").string();
  UnitSystem un;
  io::write_scan_csv(path, scan, io::axis_si_scale_for("delta", un));
  const auto back = io::read_scan_csv(path);
  for (int i = 0; i < 3; ++i) {
    CHECK(std::abs(back.axis(i) - scan.axis(i)) <= 1e-10 * std::abs(scan.axis(i)));
    CHECK(std::abs(back.t_a(i) - scan.t_a(i)) <= 1e-10);
    CHECK(std::abs(back.t_b(i) - scan.t_b(i)) <= 1e-10);
  }
  // header is pinned
  std::ifstream in(path);
  std::string header;
  std::getline(in, header);
  CHECK(header == "axis,axis_SI,T_A,T_B");
  // delta axis converts to kHz: 1 Gamma = 6000 kHz at the default units
  CHECK(io::axis_si_scale_for("delta", un) == doctest::Approx(6000.0));
  CHECK(io::axis_si_scale_for("t_s", un) == doctest::Approx(1.0 / 37.6991118431).epsilon(1e-9));
}

TEST_CASE("fit json carries params, sigma and derived values") {
  calibration::FitResult fit;
  fit.names = {"period", "phi0", "envelope"};
  fit.params.resize(3);
  fit.params << 5.2e-3, 0.1, 0.3;
  fit.sigma.resize(3);
  fit.sigma << 1e-5, 0.01, 0.002;
  fit.rss = 1.5e-4;
  fit.converged = true;
  const auto path = (temp_dir() / "fit.json").string();
  io::write_fit_json(path, fit, {{"period_kHz", 31.2}});
  const std::string body = slurp(path);
  CHECK(body.find("\"period\"") != std::string::npos);
  CHECK(body.find("\"period_kHz\"") != std::string::npos);
  CHECK(body.find("\"converged\": true") != std::string::npos);
}

TEST_CASE("run reports failures through the manifest and exit code") {
  // a schedule that cannot cover the window: t_final shorter than the pulse
  const auto p = write_config("invalid_grid.json", R"({
    "grid": {"n_z": 32, "dt": 0.1, "t_final": -5.0},
    "protocol": {"name": "trace"}
  })");
  auto cfg = io::load_config(p.string());
  const auto out = temp_dir() / "fail";
  fs::remove_all(out);
  cfg.out_dir = out.string();
  const int status = io::run(cfg);
  CHECK(status == 3);
  const std::string manifest = slurp(out / "run_manifest.json");
  CHECK(manifest.find("\"status\": \"error\"") != std::string::npos);
  CHECK(manifest.find("\"code\"") != std::string::npos);
}
