#ifndef SSL_IO_HPP
#define SSL_IO_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "ssl/calibration.hpp"
#include "ssl/protocols.hpp"
#include "ssl/solver.hpp"
#include "ssl/types.hpp"

namespace ssl::io {

struct ProtocolSpec {
  std::string name;
  std::vector<double> delta_list;  // Gamma units
  std::vector<double> theta_list;  // radians
  std::vector<double> ts_list;     // Gamma^-1
  double delta = 0.0;
  double t_s = 0.0;
  double delta_store = 0.0;
  Complex qubit_a{1.0, 0.0};
  Complex qubit_b{0.0, 0.0};
  bool delta_in_propagation = true;
  bool fit = true;
};

struct ExperimentConfig {
  UnitSystem units;
  MediumParams medium;
  CouplingSet couplings;
  PulseSpec pulse;
  GridSpec grid;
  ProtocolSpec protocol;
  std::uint64_t seed = 1;
  double noise = 0.0;  // multiplicative Gaussian, applied to emitted powers
  int threads = 0;
  std::string out_dir = ".";
};

// Schema-validated JSON config; SI-suffixed fields (_us, _kHz, _MHz) are
// converted to Gamma units on load. Unknown keys are rejected.
ExperimentConfig load_config(const std::string& path);

// Dispatches the configured protocol, writes CSV/JSON artifacts plus a run
// manifest into out_dir. Returns the process exit status (0 ok, 2 invalid
// config, 3 solver failure).
int run(const ExperimentConfig& config);

// -- tabular formats ------------------------------------------------------
// scan files:  axis,axis_SI,T_A,T_B
// trace files: t_Gamma,t_us,P_in_A,P_out_A,P_out_B
// Numerics carry 12 significant digits.

void write_scan_csv(const std::string& path, const protocols::ScanResult& scan,
                    double axis_si_scale, double noise = 0.0, std::uint64_t seed = 1);
protocols::ScanResult read_scan_csv(const std::string& path);

void write_trace_csv(const std::string& path, const FieldRecord& rec, const UnitSystem& units,
                     double noise = 0.0, std::uint64_t seed = 1);
calibration::TraceData read_trace_csv(const std::string& path);

void write_fit_json(const std::string& path, const calibration::FitResult& fit,
                    const std::vector<std::pair<std::string, double>>& derived = {});

std::uint64_t fnv1a64_file(const std::string& path);

// axis_SI scale factors for the fixed CSV schema
double axis_si_scale_for(const std::string& axis_name, const UnitSystem& units);

}  // namespace ssl::io

#endif
