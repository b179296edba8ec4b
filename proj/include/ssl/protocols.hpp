#ifndef SSL_PROTOCOLS_HPP
#define SSL_PROTOCOLS_HPP

#include <string>
#include <utility>
#include <vector>

#include "ssl/solver.hpp"

namespace ssl::protocols {

// Shared parameter bundle for the scripted experiments.
struct RunConfig {
  MediumParams medium;
  CouplingSet couplings;
  PulseSpec pulse;
  GridSpec grid;
  int threads = 0;  // 0 = hardware parallelism
};

struct ScanResult {
  ArrayXd axis;
  ArrayXd t_a, t_b;  // transmissions or retrieved energies per axis value
  std::string axis_name;

  void validate() const;
};

// Energy transmissions of both probes versus the two-photon detuning,
// one propagation per point; the A-channel pulse is the only input.
ScanResult scan_delta(const RunConfig& config, const std::vector<double>& delta_list);

// Transmissions versus the coupling relative phase at fixed detuning.
ScanResult scan_theta(const RunConfig& config, const std::vector<double>& theta_list, double delta);

struct TuneResult {
  double theta_star = 0.0;
  double tb_min = 0.0;
  int evaluations = 0;
};

// Locates the coupling phase that nulls the eps_B output at delta = 0:
// coarse scan over [0, 2pi) followed by golden-section refinement.
TuneResult tune_theta(const RunConfig& config);

struct QubitAmplitudes {
  Complex a, b;

  QubitAmplitudes(Complex a_in, Complex b_in);  // requires |a|^2 + |b|^2 = 1 (1e-12)
  static QubitAmplitudes normalized(Complex a_in, Complex b_in);
};

// Retrieved energies versus the detuning after storing for t_s; the same
// detuning is applied during propagation unless delta_in_propagation is false.
ScanResult interferometer_delta_scan(double t_s, const std::vector<double>& delta_list,
                                     const RunConfig& config, bool delta_in_propagation = true);

// Retrieved energies versus the storage time at fixed detuning.
ScanResult interferometer_time_scan(double delta, const std::vector<double>& ts_list,
                                    const RunConfig& config);

struct TwoColorOutcome {
  double energy_a = 0.0, energy_b = 0.0;  // retrieved, normalized to input energy
  double amp_a = 0.0, amp_b = 0.0;        // normalized magnitudes, amp_a^2 + amp_b^2 = 1
  double ratio = 0.0;                     // energy_a / energy_b
};

// Stores a two-color pulse pair with amplitudes (a, b) sharing one envelope,
// applies delta_store during the storage interval (propagation is resonant)
// and reports the retrieved pair.
TwoColorOutcome two_color_storage(const QubitAmplitudes& q, double t_s, double delta_store,
                                  const RunConfig& config);

// Piecewise storage interval; rotations compose as the sum of duration*delta.
TwoColorOutcome two_color_storage(const QubitAmplitudes& q,
                                  const std::vector<std::pair<double, Detuning>>& storage,
                                  const RunConfig& config);

}  // namespace ssl::protocols

#endif
