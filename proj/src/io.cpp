#include "ssl/io.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "ssl/errors.hpp"
#include "ssl/log.hpp"
#include "ssl/random.hpp"

namespace ssl::io {

using nlohmann::json;

namespace {

[[noreturn]] void fail(const std::string& field, const std::string& msg) {
  throw ValidationError(field + ": " + msg);
}

void check_keys(const json& j, const std::string& ctx, const std::set<std::string>& allowed) {
  if (!j.is_object()) fail(ctx, "must be a JSON object");
  for (const auto& item : j.items())
    if (!allowed.count(item.key())) fail(ctx + "." + item.key(), "unknown key");
}

double as_finite_number(const json& v, const std::string& field) {
  if (!v.is_number()) fail(field, "must be a number");
  const double x = v.get<double>();
  if (!std::isfinite(x)) fail(field, "must be finite");
  return x;
}

double get_num(const json& j, const std::string& ctx, const std::string& key, double fallback) {
  if (!j.contains(key)) return fallback;
  return as_finite_number(j.at(key), ctx + "." + key);
}

// exactly one of the Gamma-unit field and its SI alternate may be present
double unit_choice(const json& j, const std::string& ctx, const std::string& key,
                   const std::string& si_key, double si_to_gamma, double fallback, bool* found = nullptr) {
  const bool has_g = j.contains(key), has_si = j.contains(si_key);
  if (has_g && has_si) fail(ctx + "." + key, "give either " + key + " or " + si_key + ", not both");
  if (found) *found = has_g || has_si;
  if (has_g) return as_finite_number(j.at(key), ctx + "." + key);
  if (has_si) return si_to_gamma * as_finite_number(j.at(si_key), ctx + "." + si_key);
  return fallback;
}

std::vector<double> unit_list(const json& j, const std::string& ctx, const std::string& key,
                              const std::string& si_key, double si_to_gamma) {
  const bool has_g = j.contains(key), has_si = j.contains(si_key);
  if (has_g && has_si) fail(ctx + "." + key, "give either " + key + " or " + si_key + ", not both");
  if (!has_g && !has_si) fail(ctx + "." + key, "required (or " + si_key + ")");
  const json& arr = has_g ? j.at(key) : j.at(si_key);
  const std::string name = ctx + "." + (has_g ? key : si_key);
  if (!arr.is_array() || arr.empty()) fail(name, "must be a non-empty array");
  std::vector<double> out;
  out.reserve(arr.size());
  for (const auto& v : arr) out.push_back((has_g ? 1.0 : si_to_gamma) * as_finite_number(v, name));
  return out;
}

Complex as_complex(const json& v, const std::string& field) {
  if (v.is_number()) return Complex(v.get<double>(), 0.0);
  if (v.is_array() && v.size() == 2)
    return Complex(as_finite_number(v[0], field), as_finite_number(v[1], field));
  fail(field, "must be a number or [re, im]");
}

std::string format12(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.12g", v);
  return buf;
}

}  // namespace

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open config file " + path);
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw ParseError(std::string("malformed JSON: ") + e.what());
  }

  ExperimentConfig cfg;
  check_keys(j, "config",
             {"units", "medium", "couplings", "pulse", "grid", "protocol", "seed", "noise",
              "threads", "out_dir"});
  if (!j.contains("protocol")) fail("protocol", "required");

  if (j.contains("units")) {
    const json& u = j.at("units");
    check_keys(u, "units", {"gamma_MHz"});
    const double mhz = get_num(u, "units", "gamma_MHz", 6.0);
    if (!(mhz > 0.0)) fail("units.gamma_MHz", "must be positive");
    cfg.units.gamma_SI = 2.0 * kPi * mhz * 1e6;
  }
  const UnitSystem& us = cfg.units;
  const double us_to_g = us.time_from_us(1.0);
  const double khz_to_g = us.detuning_from_kHz(1.0);

  if (j.contains("medium")) {
    const json& m = j.at("medium");
    check_keys(m, "medium", {"alpha", "gamma1", "gamma2", "dk_L"});
    cfg.medium.alpha = get_num(m, "medium", "alpha", 20.0);
    cfg.medium.gamma1 = get_num(m, "medium", "gamma1", 0.0);
    cfg.medium.gamma2 = get_num(m, "medium", "gamma2", 0.0);
    cfg.medium.dk_L = get_num(m, "medium", "dk_L", 0.0);
  }
  try {
    cfg.medium.validate();
  } catch (const Error& e) {
    fail("medium", e.message());
  }

  if (j.contains("couplings")) {
    const json& c = j.at("couplings");
    check_keys(c, "couplings", {"omega", "theta", "magnitudes", "phases"});
    std::array<double, 4> mags{}, phases{};
    bool have_mags = false;
    if (c.contains("magnitudes")) {
      const json& a = c.at("magnitudes");
      if (!a.is_array() || a.size() != 4) fail("couplings.magnitudes", "must be an array of 4");
      for (int n = 0; n < 4; ++n) mags[n] = as_finite_number(a[n], "couplings.magnitudes");
      have_mags = true;
    } else if (c.contains("omega")) {
      const double w = as_finite_number(c.at("omega"), "couplings.omega");
      mags = {w, w, w, w};
      have_mags = true;
    }
    if (!have_mags) fail("couplings", "needs omega or magnitudes");
    if (c.contains("phases")) {
      const json& a = c.at("phases");
      if (!a.is_array() || a.size() != 4) fail("couplings.phases", "must be an array of 4");
      for (int n = 0; n < 4; ++n) phases[n] = as_finite_number(a[n], "couplings.phases");
      try {
        cfg.couplings = CouplingSet::from_phases(mags, phases);
      } catch (const Error& e) {
        fail("couplings", e.message());
      }
      if (c.contains("theta")) {
        const double theta = as_finite_number(c.at("theta"), "couplings.theta");
        double got = 0.0;
        try {
          got = relative_phase(cfg.couplings);
        } catch (const Error& e) {
          fail("couplings", e.message());
        }
        double diff = std::remainder(got - theta, 2.0 * kPi);
        if (std::abs(diff) > 1e-6)
          fail("couplings.theta", "inconsistent with the explicit phases");
      }
    } else {
      const double theta = get_num(c, "couplings", "theta", kPi);
      try {
        cfg.couplings = CouplingSet::from_phases(mags, {theta, 0.0, 0.0, 0.0});
      } catch (const Error& e) {
        fail("couplings", e.message());
      }
    }
  } else {
    cfg.couplings = CouplingSet::from_theta(0.51, kPi);
  }

  if (j.contains("pulse")) {
    const json& p = j.at("pulse");
    check_keys(p, "pulse", {"peak", "center", "center_us", "width_e2", "width_e2_us", "channel"});
    if (p.contains("peak")) cfg.pulse.peak = as_complex(p.at("peak"), "pulse.peak");
    cfg.pulse.center = unit_choice(p, "pulse", "center", "center_us", us_to_g, 120.0);
    cfg.pulse.width_e2 = unit_choice(p, "pulse", "width_e2", "width_e2_us", us_to_g, 94.0);
    if (p.contains("channel")) {
      const std::string ch = p.at("channel").is_string() ? p.at("channel").get<std::string>() : "";
      if (ch == "A")
        cfg.pulse.channel = 0;
      else if (ch == "B")
        cfg.pulse.channel = 1;
      else
        fail("pulse.channel", "must be \"A\" or \"B\"");
    }
  }
  try {
    cfg.pulse.validate();
  } catch (const Error& e) {
    fail("pulse", e.message());
  }

  bool have_t_final = false;
  if (j.contains("grid")) {
    const json& g = j.at("grid");
    check_keys(g, "grid", {"n_z", "dt", "t_start", "t_final", "t_final_us", "keep_fields"});
    cfg.grid.n_z = static_cast<int>(get_num(g, "grid", "n_z", 200));
    cfg.grid.dt = get_num(g, "grid", "dt", 0.05);
    cfg.grid.t_start = get_num(g, "grid", "t_start", 0.0);
    cfg.grid.t_final = unit_choice(g, "grid", "t_final", "t_final_us", us_to_g, 0.0, &have_t_final);
    if (g.contains("keep_fields")) {
      if (!g.at("keep_fields").is_boolean()) fail("grid.keep_fields", "must be a boolean");
      cfg.grid.keep_fields = g.at("keep_fields").get<bool>();
    }
  }
  if (!have_t_final) {
    const double omega = cfg.couplings.min_magnitude();
    const double delay = omega > 0.0 ? group_delay(cfg.medium.alpha, omega) : 0.0;
    cfg.grid.t_final = cfg.pulse.center + cfg.pulse.width_e2 + delay + 40.0;
  }

  const json& pr = j.at("protocol");
  check_keys(pr, "protocol",
             {"name", "delta", "delta_kHz", "delta_list", "delta_list_kHz", "theta_list", "t_s",
              "t_s_us", "ts_list", "ts_list_us", "delta_store", "delta_store_kHz", "qubit_a",
              "qubit_b", "delta_in_propagation", "fit"});
  if (!pr.contains("name") || !pr.at("name").is_string()) fail("protocol.name", "required string");
  ProtocolSpec& ps = cfg.protocol;
  ps.name = pr.at("name").get<std::string>();

  const std::set<std::string> known = {"trace",
                                       "scan_delta",
                                       "scan_theta",
                                       "tune_theta",
                                       "interferometer_delta_scan",
                                       "interferometer_time_scan",
                                       "two_color_storage"};
  if (!known.count(ps.name)) fail("protocol.name", "unknown protocol " + ps.name);

  ps.delta = unit_choice(pr, "protocol", "delta", "delta_kHz", khz_to_g, 0.0);
  ps.t_s = unit_choice(pr, "protocol", "t_s", "t_s_us", us_to_g, 0.0);
  ps.delta_store = unit_choice(pr, "protocol", "delta_store", "delta_store_kHz", khz_to_g, 0.0);
  if (pr.contains("delta_in_propagation")) {
    if (!pr.at("delta_in_propagation").is_boolean())
      fail("protocol.delta_in_propagation", "must be a boolean");
    ps.delta_in_propagation = pr.at("delta_in_propagation").get<bool>();
  }
  if (pr.contains("fit")) {
    if (!pr.at("fit").is_boolean()) fail("protocol.fit", "must be a boolean");
    ps.fit = pr.at("fit").get<bool>();
  }
  if (ps.name == "scan_delta" || ps.name == "interferometer_delta_scan")
    ps.delta_list = unit_list(pr, "protocol", "delta_list", "delta_list_kHz", khz_to_g);
  if (ps.name == "scan_theta") {
    if (!pr.contains("theta_list")) fail("protocol.theta_list", "required");
    const json& a = pr.at("theta_list");
    if (!a.is_array() || a.empty()) fail("protocol.theta_list", "must be a non-empty array");
    for (const auto& v : a) ps.theta_list.push_back(as_finite_number(v, "protocol.theta_list"));
  }
  if (ps.name == "interferometer_time_scan" || ps.name == "two_color_storage")
    ps.ts_list = unit_list(pr, "protocol", "ts_list", "ts_list_us", us_to_g);
  if (ps.name == "interferometer_delta_scan" && !(pr.contains("t_s") || pr.contains("t_s_us")))
    fail("protocol.t_s", "required");
  if (pr.contains("qubit_a")) ps.qubit_a = as_complex(pr.at("qubit_a"), "protocol.qubit_a");
  if (pr.contains("qubit_b")) ps.qubit_b = as_complex(pr.at("qubit_b"), "protocol.qubit_b");

  if (j.contains("seed")) {
    if (!j.at("seed").is_number_unsigned()) fail("seed", "must be a nonnegative integer");
    cfg.seed = j.at("seed").get<std::uint64_t>();
  }
  cfg.noise = get_num(j, "config", "noise", 0.0);
  if (cfg.noise < 0.0 || cfg.noise > 0.5) fail("noise", "must lie in [0, 0.5]");
  if (j.contains("threads")) {
    if (!j.at("threads").is_number_integer()) fail("threads", "must be an integer");
    cfg.threads = j.at("threads").get<int>();
    if (cfg.threads < 0) fail("threads", "must be nonnegative");
  }
  if (j.contains("out_dir")) {
    if (!j.at("out_dir").is_string()) fail("out_dir", "must be a string");
    cfg.out_dir = j.at("out_dir").get<std::string>();
  }
  return cfg;
}

namespace {

json config_echo(const ExperimentConfig& c) {
  json j;
  j["units"]["gamma_MHz"] = c.units.gamma_SI / (2.0 * kPi * 1e6);
  j["medium"] = {{"alpha", c.medium.alpha},
                 {"gamma1", c.medium.gamma1},
                 {"gamma2", c.medium.gamma2},
                 {"dk_L", c.medium.dk_L}};
  json mags = json::array(), phases = json::array();
  for (const auto& w : c.couplings.omega) {
    mags.push_back(std::abs(w));
    phases.push_back(std::arg(w));
  }
  j["couplings"] = {{"magnitudes", mags}, {"phases", phases}};
  j["pulse"] = {{"peak", {c.pulse.peak.real(), c.pulse.peak.imag()}},
                {"center", c.pulse.center},
                {"width_e2", c.pulse.width_e2},
                {"channel", c.pulse.channel == 0 ? "A" : "B"}};
  j["grid"] = {{"n_z", c.grid.n_z},
               {"dt", c.grid.dt},
               {"t_start", c.grid.t_start},
               {"t_final", c.grid.t_final}};
  json p;
  p["name"] = c.protocol.name;
  if (!c.protocol.delta_list.empty()) p["delta_list"] = c.protocol.delta_list;
  if (!c.protocol.theta_list.empty()) p["theta_list"] = c.protocol.theta_list;
  if (!c.protocol.ts_list.empty()) p["ts_list"] = c.protocol.ts_list;
  p["delta"] = c.protocol.delta;
  p["t_s"] = c.protocol.t_s;
  p["delta_store"] = c.protocol.delta_store;
  p["qubit_a"] = {c.protocol.qubit_a.real(), c.protocol.qubit_a.imag()};
  p["qubit_b"] = {c.protocol.qubit_b.real(), c.protocol.qubit_b.imag()};
  p["delta_in_propagation"] = c.protocol.delta_in_propagation;
  p["fit"] = c.protocol.fit;
  j["protocol"] = p;
  j["seed"] = c.seed;
  j["noise"] = c.noise;
  j["threads"] = c.threads;
  return j;
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("IoError", "cannot write " + path);
  out << text;
}

}  // namespace

double axis_si_scale_for(const std::string& axis_name, const UnitSystem& units) {
  if (axis_name == "delta") return units.kHz_from_detuning(1.0);
  if (axis_name == "t_s") return units.us_from_time(1.0);
  if (axis_name == "theta") return 180.0 / kPi;
  return 1.0;
}

void write_scan_csv(const std::string& path, const protocols::ScanResult& scan,
                    double axis_si_scale, double noise, std::uint64_t seed) {
  Rng rng(seed);
  std::ostringstream os;
  os << "axis,axis_SI,T_A,T_B\n";
  for (Eigen::Index i = 0; i < scan.axis.size(); ++i) {
    double ta = scan.t_a(i), tb = scan.t_b(i);
    if (noise > 0.0) {
      ta = std::max(0.0, ta * (1.0 + noise * rng.normal()));
      tb = std::max(0.0, tb * (1.0 + noise * rng.normal()));
    }
    os << format12(scan.axis(i)) << ',' << format12(scan.axis(i) * axis_si_scale) << ','
       << format12(ta) << ',' << format12(tb) << '\n';
  }
  write_text(path, os.str());
}

protocols::ScanResult read_scan_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open scan file " + path);
  std::string header;
  if (!std::getline(in, header) || header != "axis,axis_SI,T_A,T_B")
    throw ParseError("bad scan header in " + path);
  std::vector<double> axis, ta, tb;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    double a, si, x, y;
    if (std::sscanf(line.c_str(), "%lf,%lf,%lf,%lf", &a, &si, &x, &y) != 4)
      throw ParseError("bad scan row: " + line);
    axis.push_back(a);
    ta.push_back(std::max(0.0, x));
    tb.push_back(std::max(0.0, y));
  }
  protocols::ScanResult r;
  r.axis = Eigen::Map<ArrayXd>(axis.data(), axis.size());
  r.t_a = Eigen::Map<ArrayXd>(ta.data(), ta.size());
  r.t_b = Eigen::Map<ArrayXd>(tb.data(), tb.size());
  r.axis_name = "axis";
  r.validate();
  return r;
}

void write_trace_csv(const std::string& path, const FieldRecord& rec, const UnitSystem& units,
                     double noise, std::uint64_t seed) {
  if (rec.empty()) throw EmptyRecord("nothing to write");
  Rng rng(seed);
  std::ostringstream os;
  os << "t_Gamma,t_us,P_in_A,P_out_A,P_out_B\n";
  auto jitter = [&](double p) {
    return noise > 0.0 ? std::max(0.0, p * (1.0 + noise * rng.normal())) : p;
  };
  for (Eigen::Index i = 0; i < rec.t_trace.size(); ++i) {
    const double t = rec.t_trace(i);
    os << format12(t) << ',' << format12(units.us_from_time(t)) << ','
       << format12(jitter(std::norm(rec.input_trace(i, 0)))) << ','
       << format12(jitter(std::norm(rec.output_trace(i, 0)))) << ','
       << format12(jitter(std::norm(rec.output_trace(i, 1)))) << '\n';
  }
  write_text(path, os.str());
}

calibration::TraceData read_trace_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open trace file " + path);
  std::string header;
  if (!std::getline(in, header) || header != "t_Gamma,t_us,P_in_A,P_out_A,P_out_B")
    throw ParseError("bad trace header in " + path);
  std::vector<double> t, pin, pa, pb;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    double tg, tu, a, b, c;
    if (std::sscanf(line.c_str(), "%lf,%lf,%lf,%lf,%lf", &tg, &tu, &a, &b, &c) != 5)
      throw ParseError("bad trace row: " + line);
    t.push_back(tg);
    pin.push_back(std::max(0.0, a));
    pa.push_back(std::max(0.0, b));
    pb.push_back(std::max(0.0, c));
  }
  calibration::TraceData d;
  d.t = Eigen::Map<ArrayXd>(t.data(), t.size());
  d.p_in_a = Eigen::Map<ArrayXd>(pin.data(), pin.size());
  d.p_out_a = Eigen::Map<ArrayXd>(pa.data(), pa.size());
  d.p_out_b = Eigen::Map<ArrayXd>(pb.data(), pb.size());
  d.validate();
  return d;
}

void write_fit_json(const std::string& path, const calibration::FitResult& fit,
                    const std::vector<std::pair<std::string, double>>& derived) {
  json j;
  for (std::size_t i = 0; i < fit.names.size(); ++i) {
    j["params"][fit.names[i]] = fit.params(static_cast<Eigen::Index>(i));
    j["sigma"][fit.names[i]] = fit.sigma(static_cast<Eigen::Index>(i));
  }
  j["rss"] = fit.rss;
  j["iterations"] = fit.iterations;
  j["converged"] = fit.converged;
  for (const auto& [k, v] : fit.upper_bounds) j["upper_bounds"][k] = v;
  for (const auto& [k, v] : derived) j["derived"][k] = v;
  write_text(path, j.dump(2) + "\n");
}

std::uint64_t fnv1a64_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("IoError", "cannot read " + path);
  std::uint64_t h = 14695981039346656037ULL;
  char buf[4096];
  while (in.read(buf, sizeof(buf)) || in.gcount() > 0) {
    for (std::streamsize i = 0; i < in.gcount(); ++i) {
      h ^= static_cast<unsigned char>(buf[i]);
      h *= 1099511628211ULL;
    }
    if (!in) break;
  }
  return h;
}

namespace {

std::string hex64(std::uint64_t v) {
  char buf[20];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

}  // namespace

int run(const ExperimentConfig& config) {
  namespace fs = std::filesystem;
  const auto t_begin = std::chrono::steady_clock::now();
  json manifest;
  manifest["version"] = kVersion;
  manifest["config"] = config_echo(config);
  std::vector<std::string> outputs;

  auto out_path = [&](const std::string& name) { return (fs::path(config.out_dir) / name).string(); };

  int status = 0;
  try {
    fs::create_directories(config.out_dir);
    protocols::RunConfig rc{config.medium, config.couplings, config.pulse, config.grid,
                            config.threads};
    const ProtocolSpec& ps = config.protocol;
    const UnitSystem& un = config.units;

    if (ps.name == "trace") {
      auto sched = CouplingSchedule::constant(config.couplings, Detuning{ps.delta},
                                              config.grid.t_start, config.grid.t_final);
      const FieldRecord rec = propagate({config.pulse}, sched, config.medium, config.grid);
      write_trace_csv(out_path("trace.csv"), rec, un, config.noise, config.seed);
      outputs.push_back("trace.csv");
    } else if (ps.name == "scan_delta") {
      const auto scan = protocols::scan_delta(rc, ps.delta_list);
      write_scan_csv(out_path("scan_delta.csv"), scan, axis_si_scale_for("delta", un),
                     config.noise, config.seed);
      outputs.push_back("scan_delta.csv");
    } else if (ps.name == "scan_theta") {
      const auto scan = protocols::scan_theta(rc, ps.theta_list, ps.delta);
      write_scan_csv(out_path("scan_theta.csv"), scan, axis_si_scale_for("theta", un),
                     config.noise, config.seed);
      outputs.push_back("scan_theta.csv");
    } else if (ps.name == "tune_theta") {
      const auto tuned = protocols::tune_theta(rc);
      json t = {{"theta_star", tuned.theta_star},
                {"tb_min", tuned.tb_min},
                {"evaluations", tuned.evaluations}};
      write_text(out_path("tune_theta.json"), t.dump(2) + "\n");
      outputs.push_back("tune_theta.json");
    } else if (ps.name == "interferometer_delta_scan") {
      const auto scan =
          protocols::interferometer_delta_scan(ps.t_s, ps.delta_list, rc, ps.delta_in_propagation);
      write_scan_csv(out_path("storage_scan.csv"), scan, axis_si_scale_for("delta", un),
                     config.noise, config.seed);
      outputs.push_back("storage_scan.csv");
      if (ps.fit) {
        const auto fit = calibration::fit_oscillation_delta(scan);
        write_fit_json(out_path("fit.json"), fit,
                       {{"period_kHz", un.kHz_from_detuning(fit.param("period"))}});
        outputs.push_back("fit.json");
      }
    } else if (ps.name == "interferometer_time_scan") {
      const auto scan = protocols::interferometer_time_scan(ps.delta, ps.ts_list, rc);
      write_scan_csv(out_path("storage_scan.csv"), scan, axis_si_scale_for("t_s", un),
                     config.noise, config.seed);
      outputs.push_back("storage_scan.csv");
      if (ps.fit) {
        const auto fit = calibration::fit_oscillation_time(scan);
        write_fit_json(out_path("fit.json"), fit,
                       {{"T_s_us", un.us_from_time(fit.param("T_s"))},
                        {"tau_us", un.us_from_time(fit.param("tau"))},
                        {"delta_hat_kHz", un.kHz_from_detuning(kPi / fit.param("T_s"))}});
        outputs.push_back("fit.json");
      }
    } else if (ps.name == "two_color_storage") {
      const auto q = protocols::QubitAmplitudes::normalized(ps.qubit_a, ps.qubit_b);
      protocols::ScanResult scan;
      scan.axis_name = "t_s";
      const int n = static_cast<int>(ps.ts_list.size());
      scan.axis.resize(n);
      scan.t_a.resize(n);
      scan.t_b.resize(n);
      for (int i = 0; i < n; ++i) {
        const auto out = protocols::two_color_storage(q, ps.ts_list[i], ps.delta_store, rc);
        scan.axis(i) = ps.ts_list[i];
        scan.t_a(i) = out.energy_a;
        scan.t_b(i) = out.energy_b;
      }
      scan.validate();
      write_scan_csv(out_path("two_color.csv"), scan, axis_si_scale_for("t_s", un), config.noise,
                     config.seed);
      outputs.push_back("two_color.csv");
    } else {
      throw ValidationError("protocol.name: unknown protocol " + ps.name);
    }
    manifest["status"] = "ok";
  } catch (const ValidationError& e) {
    manifest["status"] = "error";
    manifest["error"] = {{"code", e.code()}, {"message", e.message()}};
    status = 2;
  } catch (const Error& e) {
    manifest["status"] = "error";
    manifest["error"] = {{"code", e.code()}, {"message", e.message()}};
    status = 3;
  }

  json out_list = json::array();
  for (const auto& name : outputs)
    out_list.push_back({{"path", name}, {"fnv1a64", hex64(fnv1a64_file(out_path(name)))}});
  manifest["outputs"] = out_list;
  const auto t_end = std::chrono::steady_clock::now();
  manifest["wall_time_s"] = std::chrono::duration<double>(t_end - t_begin).count();
  write_text(out_path("run_manifest.json"), manifest.dump(2) + "\n");
  if (status != 0) log::error("run failed: " + manifest["error"]["message"].get<std::string>());
  return status;
}

}  // namespace ssl::io
