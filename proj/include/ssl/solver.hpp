#ifndef SSL_SOLVER_HPP
#define SSL_SOLVER_HPP

#include <functional>
#include <optional>
#include <utility>
#include <vector>

#include "ssl/model.hpp"
#include "ssl/types.hpp"

namespace ssl {

struct GridSpec {
  int n_z = 200;
  double dt = 0.05;                 // Gamma^-1
  double t_start = 0.0;
  double t_final = 400.0;
  int field_stride = 0;             // snapshot decimation; 0 = auto (<= ~2001 snapshots)
  bool keep_fields = false;         // space-time grids are large; traces are always kept

  // dt must resolve the fastest scale present.
  void validate(double max_rate) const;
};

// Gaussian input probe envelope. width_e2 is the e^-2 full width of the
// intensity profile; the amplitude envelope is exp(-4 (t-center)^2 / width^2).
struct PulseSpec {
  Complex peak{1e-3, 0.0};  // units of Gamma
  double center = 120.0;
  double width_e2 = 94.0;   // 2.5 us at Gamma = 2*pi*6 MHz
  int channel = 0;          // 0 = A, 1 = B

  Complex amplitude(double t) const {
    const double u = (t - center) / width_e2;
    return peak * std::exp(-4.0 * u * u);
  }
  double energy() const {  // integral of |amplitude|^2 over all time
    return std::norm(peak) * width_e2 * std::sqrt(kPi / 8.0);
  }
  // time by which the given fraction of the pulse energy has passed z = 0
  double entry_time(double fraction) const;

  void validate() const;
};

struct FieldRecord {
  ArrayXd z_grid;                    // n_z points on [0, 1]
  ArrayXd t_trace;                   // one entry per time step
  Eigen::ArrayX2cd input_trace;      // eps at z = 0, columns (A, B)
  Eigen::ArrayX2cd output_trace;     // eps at z = L

  ArrayXd t_fields;                  // decimated snapshot times (empty unless kept)
  Eigen::ArrayXXcd eps_a, eps_b;     // (snapshot, z)
  Eigen::ArrayXXcd rho_a, rho_b, rho_1, rho_2;

  bool has_fields() const { return t_fields.size() > 0; }
  bool empty() const { return t_trace.size() == 0; }
};

// Explicit operator timeline; what unitary reformulations feed to the solver.
struct OperatorSegment {
  double t_start = 0.0;
  double t_end = 0.0;
  LocalOperator op;
};

// March Eqs. of motion in the retarded frame over a 1-D slab: per time step,
// advance the atomic variables at every z with classical RK4 (probe frozen over
// the step), then integrate d(eps)/dz = -/+ i*dk_L * eps + i*(alpha/2)*rho from
// z=0 to L with the integrating factor applied exactly over each dz.
// Deterministic: identical inputs give identical outputs on one platform.
FieldRecord propagate(const std::vector<PulseSpec>& inputs, const CouplingSchedule& schedule,
                      const MediumParams& medium, const GridSpec& grid);

FieldRecord propagate(const std::vector<PulseSpec>& inputs,
                      const std::vector<OperatorSegment>& segments, const MediumParams& medium,
                      const GridSpec& grid);

// Arbitrary z = 0 boundary drive (epsA, epsB)(t); used when the input is a
// measured trace rather than an analytic pulse.
using BoundaryFn = std::function<std::pair<Complex, Complex>(double)>;
FieldRecord propagate(const BoundaryFn& boundary, const std::vector<OperatorSegment>& segments,
                      const MediumParams& medium, const GridSpec& grid);

// Energy transmission of one output channel, normalized to the total input
// energy across both channels. channel: 0 = A, 1 = B.
double output_energy(const FieldRecord& rec, int channel);

// Transmission from trace samples in [t_lo, t_hi] only.
double output_energy_after(const FieldRecord& rec, int channel, double t_from);

struct StorageOutcome {
  FieldRecord record;
  double retrieved_a = 0.0;  // integrated after the re-switch-on, normalized to input energy
  double retrieved_b = 0.0;
  double t_off = 0.0;
  double t_on = 0.0;
};

// Three-segment schedule (on / off / on): couplings switch off at t_off
// (default: when 95% of the input energy has entered), the ground coherences
// evolve for t_s under delta_store and the dephasing rates, then the couplings
// switch back on and the retrieved light is integrated.
StorageOutcome store_and_retrieve(const PulseSpec& input, std::optional<double> t_off, double t_s,
                                  Detuning delta_store, const CouplingSet& base,
                                  const MediumParams& medium, const GridSpec& grid);

// General form: several input pulses, a piecewise storage interval
// (duration, detuning) and an independent propagation detuning.
StorageOutcome store_and_retrieve(const std::vector<PulseSpec>& inputs,
                                  std::optional<double> t_off,
                                  const std::vector<std::pair<double, Detuning>>& storage,
                                  const CouplingSet& base, Detuning delta_propagation,
                                  const MediumParams& medium, const GridSpec& grid);

// Group delay alpha*Gamma/(2 Omega^2) of the symmetric scheme.
double group_delay(double alpha, double omega);

}  // namespace ssl

#endif
