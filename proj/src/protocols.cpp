#include "ssl/protocols.hpp"

#include <cmath>
#include <limits>
#include <sstream>

#include "ssl/errors.hpp"
#include "ssl/parallel.hpp"

namespace ssl::protocols {

void ScanResult::validate() const {
  if (axis.size() != t_a.size() || axis.size() != t_b.size())
    throw InvalidParams("scan columns have mismatched lengths");
  for (Eigen::Index i = 1; i < axis.size(); ++i)
    if (!(axis(i) > axis(i - 1))) throw InvalidParams("scan axis must be strictly increasing");
  for (Eigen::Index i = 0; i < axis.size(); ++i)
    if (!(t_a(i) >= 0.0 && t_a(i) <= 1.0 + 1e-6 && t_b(i) >= 0.0 && t_b(i) <= 1.0 + 1e-6))
      throw InvalidParams("transmissions outside [0, 1]");
}

namespace {

[[noreturn]] void annotate_and_rethrow(const char* axis_name, double value) {
  try {
    throw;
  } catch (const Error& e) {
    std::ostringstream os;
    os << e.message() << " (at " << axis_name << " = " << value << ")";
    throw Error(e.code(), os.str());
  }
}

}  // namespace

ScanResult scan_delta(const RunConfig& config, const std::vector<double>& delta_list) {
  const int n = static_cast<int>(delta_list.size());
  ScanResult r;
  r.axis_name = "delta";
  r.axis.resize(n);
  r.t_a.resize(n);
  r.t_b.resize(n);
  parallel_for(n, config.threads, [&](int i) {
    const double d = delta_list[i];
    try {
      auto sched = CouplingSchedule::constant(config.couplings, Detuning{d}, config.grid.t_start,
                                              config.grid.t_final);
      const FieldRecord rec = propagate({config.pulse}, sched, config.medium, config.grid);
      r.axis(i) = d;
      r.t_a(i) = output_energy(rec, 0);
      r.t_b(i) = output_energy(rec, 1);
    } catch (...) {
      annotate_and_rethrow("delta", d);
    }
  });
  r.validate();
  return r;
}

ScanResult scan_theta(const RunConfig& config, const std::vector<double>& theta_list, double delta) {
  if (!config.couplings.symmetric())
    throw InvalidParams("scan_theta requires symmetric coupling magnitudes");
  const double omega = std::abs(config.couplings.omega[0]);
  const int n = static_cast<int>(theta_list.size());
  ScanResult r;
  r.axis_name = "theta";
  r.axis.resize(n);
  r.t_a.resize(n);
  r.t_b.resize(n);
  parallel_for(n, config.threads, [&](int i) {
    const double th = theta_list[i];
    try {
      auto sched = CouplingSchedule::constant(CouplingSet::from_theta(omega, th), Detuning{delta},
                                              config.grid.t_start, config.grid.t_final);
      const FieldRecord rec = propagate({config.pulse}, sched, config.medium, config.grid);
      r.axis(i) = th;
      r.t_a(i) = output_energy(rec, 0);
      r.t_b(i) = output_energy(rec, 1);
    } catch (...) {
      annotate_and_rethrow("theta", th);
    }
  });
  r.validate();
  return r;
}

TuneResult tune_theta(const RunConfig& config) {
  if (!config.couplings.symmetric())
    throw InvalidParams("tune_theta requires symmetric coupling magnitudes");
  const double omega = std::abs(config.couplings.omega[0]);
  int evaluations = 0;
  auto tb_at = [&](double th) {
    ++evaluations;
    auto sched = CouplingSchedule::constant(CouplingSet::from_theta(omega, th), Detuning{0.0},
                                            config.grid.t_start, config.grid.t_final);
    const FieldRecord rec = propagate({config.pulse}, sched, config.medium, config.grid);
    return output_energy(rec, 1);
  };

  constexpr int kCoarse = 24;
  double best_th = 0.0, best_tb = 0.0, lo_tb = 1e300, hi_tb = -1e300;
  std::vector<double> coarse(kCoarse);
  parallel_for(kCoarse, config.threads, [&](int i) {
    auto sched = CouplingSchedule::constant(
        CouplingSet::from_theta(omega, 2.0 * kPi * i / kCoarse), Detuning{0.0},
        config.grid.t_start, config.grid.t_final);
    coarse[i] = output_energy(propagate({config.pulse}, sched, config.medium, config.grid), 1);
  });
  evaluations += kCoarse;
  int best_i = 0;
  for (int i = 0; i < kCoarse; ++i) {
    lo_tb = std::min(lo_tb, coarse[i]);
    hi_tb = std::max(hi_tb, coarse[i]);
    if (coarse[i] < coarse[best_i]) best_i = i;
  }
  if (hi_tb - lo_tb < 1e-10)
    throw FlatLandscape("eps_B output does not vary with theta; check the configuration");

  // golden-section on the bracketing coarse interval
  const double step = 2.0 * kPi / kCoarse;
  double a = (best_i - 1) * step, b = (best_i + 1) * step;
  const double gr = (std::sqrt(5.0) - 1.0) / 2.0;
  double x1 = b - gr * (b - a), x2 = a + gr * (b - a);
  double f1 = tb_at(x1), f2 = tb_at(x2);
  while (b - a > 2e-4) {
    if (f1 < f2) {
      b = x2;
      x2 = x1;
      f2 = f1;
      x1 = b - gr * (b - a);
      f1 = tb_at(x1);
    } else {
      a = x1;
      x1 = x2;
      f1 = f2;
      x2 = a + gr * (b - a);
      f2 = tb_at(x2);
    }
  }
  best_th = 0.5 * (a + b);
  best_tb = f1 < f2 ? f1 : f2;
  if (best_th < 0.0) best_th += 2.0 * kPi;
  if (best_th >= 2.0 * kPi) best_th -= 2.0 * kPi;
  return TuneResult{best_th, best_tb, evaluations};
}

QubitAmplitudes::QubitAmplitudes(Complex a_in, Complex b_in) : a(a_in), b(b_in) {
  if (std::abs(std::norm(a) + std::norm(b) - 1.0) > 1e-12)
    throw InvalidParams("qubit amplitudes must satisfy |a|^2 + |b|^2 = 1");
}

QubitAmplitudes QubitAmplitudes::normalized(Complex a_in, Complex b_in) {
  const double n = std::sqrt(std::norm(a_in) + std::norm(b_in));
  if (!(n > 0.0)) throw InvalidParams("qubit amplitudes must not both vanish");
  return QubitAmplitudes(a_in / n, b_in / n);
}

ScanResult interferometer_delta_scan(double t_s, const std::vector<double>& delta_list,
                                     const RunConfig& config, bool delta_in_propagation) {
  const int n = static_cast<int>(delta_list.size());
  ScanResult r;
  r.axis_name = "delta";
  r.axis.resize(n);
  r.t_a.resize(n);
  r.t_b.resize(n);
  parallel_for(n, config.threads, [&](int i) {
    const double d = delta_list[i];
    try {
      const auto out = store_and_retrieve(
          {config.pulse}, std::nullopt, {{t_s, Detuning{d}}}, config.couplings,
          Detuning{delta_in_propagation ? d : 0.0}, config.medium, config.grid);
      r.axis(i) = d;
      r.t_a(i) = out.retrieved_a;
      r.t_b(i) = out.retrieved_b;
    } catch (...) {
      annotate_and_rethrow("delta", d);
    }
  });
  r.validate();
  return r;
}

ScanResult interferometer_time_scan(double delta, const std::vector<double>& ts_list,
                                    const RunConfig& config) {
  const int n = static_cast<int>(ts_list.size());
  ScanResult r;
  r.axis_name = "t_s";
  r.axis.resize(n);
  r.t_a.resize(n);
  r.t_b.resize(n);
  parallel_for(n, config.threads, [&](int i) {
    const double ts = ts_list[i];
    try {
      const auto out = store_and_retrieve({config.pulse}, std::nullopt, {{ts, Detuning{delta}}},
                                          config.couplings, Detuning{delta}, config.medium,
                                          config.grid);
      r.axis(i) = ts;
      r.t_a(i) = out.retrieved_a;
      r.t_b(i) = out.retrieved_b;
    } catch (...) {
      annotate_and_rethrow("t_s", ts);
    }
  });
  r.validate();
  return r;
}

TwoColorOutcome two_color_storage(const QubitAmplitudes& q, double t_s, double delta_store,
                                  const RunConfig& config) {
  return two_color_storage(q, {{t_s, Detuning{delta_store}}}, config);
}

TwoColorOutcome two_color_storage(const QubitAmplitudes& q,
                                  const std::vector<std::pair<double, Detuning>>& storage,
                                  const RunConfig& config) {
  PulseSpec pa = config.pulse;
  PulseSpec pb = config.pulse;
  pa.channel = 0;
  pb.channel = 1;
  pa.peak *= q.a;
  pb.peak *= q.b;
  std::vector<PulseSpec> inputs;
  if (std::abs(pa.peak) > 0.0) inputs.push_back(pa);
  if (std::abs(pb.peak) > 0.0) inputs.push_back(pb);
  const auto out = store_and_retrieve(inputs, std::nullopt, storage, config.couplings,
                                      Detuning{0.0}, config.medium, config.grid);
  TwoColorOutcome res;
  res.energy_a = out.retrieved_a;
  res.energy_b = out.retrieved_b;
  const double total = res.energy_a + res.energy_b;
  if (!(total > 0.0)) throw EmptyRecord("no light retrieved");
  res.amp_a = std::sqrt(res.energy_a / total);
  res.amp_b = std::sqrt(res.energy_b / total);
  res.ratio = res.energy_b > 0.0 ? res.energy_a / res.energy_b
                                 : std::numeric_limits<double>::infinity();
  return res;
}

}  // namespace ssl::protocols
