#ifndef SSL_CALIBRATION_HPP
#define SSL_CALIBRATION_HPP

#include <functional>
#include <map>
#include <string>
#include <vector>

#include "ssl/protocols.hpp"
#include "ssl/solver.hpp"
#include "ssl/types.hpp"

namespace ssl::calibration {

// Measured (or synthetic) probe power traces around a coupling-on interval.
struct TraceData {
  ArrayXd t;        // Gamma^-1, increasing
  ArrayXd p_in_a;   // |eps|^2 scale
  ArrayXd p_out_a;
  ArrayXd p_out_b;  // zero/empty for single-Lambda data

  void validate() const;
};

struct FitResult {
  std::vector<std::string> names;
  Eigen::VectorXd params;
  Eigen::VectorXd sigma;  // from the residual curvature (finite-difference Hessian)
  double rss = 0.0;
  int iterations = 0;
  bool converged = false;
  bool degenerate = false;
  // parameters whose estimate is consistent with zero are reported as bounds
  std::map<std::string, double> upper_bounds;

  double param(const std::string& name) const;
  double sigma_of(const std::string& name) const;
};

struct MinimizeOptions {
  double tol_x = 1e-6;        // simplex diameter
  double tol_f = 1e-10;       // relative objective spread
  int max_iter = 2000;
  double initial_step = 0.1;  // relative, with a small absolute floor
};

struct MinimizeResult {
  Eigen::VectorXd x;
  double f = 0.0;
  int iterations = 0;
  bool converged = false;
  bool degenerate = false;
};

using Objective = std::function<double(const Eigen::VectorXd&)>;

// Nelder-Mead simplex descent with bound reflection. Deterministic given
// (x0, options). Runs to max_iter and returns best-so-far with
// converged = false when the tolerances are not met.
MinimizeResult minimize(const Objective& f, const Eigen::VectorXd& x0, const Eigen::VectorXd& lo,
                        const Eigen::VectorXd& hi, const MinimizeOptions& options = {});

// Forward-model grid used inside the trace fits; coarser than production
// runs, with stop tolerances matched to the cost of a PDE objective.
struct FitOptions {
  int n_z = 64;
  double dt = 0.1;
  MinimizeOptions minimize{1e-4, 1e-8, 400, 0.1};
};

// Single-Lambda slow-light fit over (alpha, omega, gamma): the model keeps one
// coupling field on and drives the z = 0 boundary with the measured input
// trace. Dk plays no role in the single-Lambda output and is excluded.
FitResult fit_single_lambda(const TraceData& data, const UnitSystem& units,
                            const FitOptions& options = {});

// Double-Lambda fit over (omega_b, dk_L) with (alpha, omega_a, gamma) known
// and eps_A the only input; both output traces enter the residual. Only the
// product Dk*L is identifiable (reported as a magnitude).
FitResult fit_double_lambda(const TraceData& data, double alpha, double omega_a, double gamma,
                            const UnitSystem& units, const FitOptions& options = {});

// Joint fit of both channels of a retrieved-energy-versus-detuning scan to
// E0*cos^2(phi) and E0*sin^2(phi), phi = 2*pi*axis/P + phi0. Params
// (period, phi0, envelope). Throws InsufficientCycles below 1.5 cycles.
FitResult fit_oscillation_delta(const protocols::ScanResult& scan,
                                const MinimizeOptions& options = {});

// Joint fit of a storage-time scan to E0*cos^2(pi*t/T_s + phi0)*exp(-t/tau)
// and the complementary sin^2 channel. Params (T_s, tau, phi0, envelope);
// the implied detuning is pi/T_s. Throws InsufficientCycles below one cycle.
FitResult fit_oscillation_time(const protocols::ScanResult& scan,
                               const MinimizeOptions& options = {});

}  // namespace ssl::calibration

#endif
