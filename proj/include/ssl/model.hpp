#ifndef SSL_MODEL_HPP
#define SSL_MODEL_HPP

#include <array>
#include <vector>

#include "ssl/types.hpp"

namespace ssl {

// Slab description. alpha is the resonant (intensity) optical density; the
// dephasing rates act on the ground-state coherences rho1, rho2; dk_L is the
// phase-mismatch parameter: eps_A winds by +dk_L and eps_B by -dk_L radians
// over the slab.
struct MediumParams {
  double alpha = 20.0;
  double gamma1 = 0.0;  // units of Gamma
  double gamma2 = 0.0;  // units of Gamma
  double dk_L = 0.0;    // radians over the slab

  void validate() const;
};

// The four complex coupling Rabi frequencies, ordered {A1, A2, B1, B2},
// in units of Gamma.
struct CouplingSet {
  std::array<Complex, 4> omega{};

  static CouplingSet from_theta(double magnitude, double theta);
  static CouplingSet from_phases(const std::array<double, 4>& magnitudes,
                                 const std::array<double, 4>& phases);
  static CouplingSet off();

  // [[A1, A2], [B1, B2]], the matrix acting on (rho1, rho2) in the optical
  // coherence equation.
  Mat2c matrix() const;

  bool symmetric(double tol = 1e-9) const;  // all four magnitudes equal
  bool all_off() const;
  double min_magnitude() const;  // smallest nonzero |Omega_n|, 0 when all off
};

// theta = (th_A1 - th_A2) - (th_B1 - th_B2), wrapped to (-pi, pi].
double relative_phase(const CouplingSet& c);

// Two-photon detuning; applied as +delta on rho1 and -delta on rho2.
struct Detuning {
  double delta = 0.0;
};

struct ScheduleSegment {
  double t_start = 0.0;
  double t_end = 0.0;
  CouplingSet couplings;
  Detuning detuning;

  bool is_off() const { return couplings.all_off(); }
};

// Piecewise-constant coupling/detuning timeline. Segments must be contiguous,
// non-overlapping and cover the simulation window.
struct CouplingSchedule {
  std::vector<ScheduleSegment> segments;

  static CouplingSchedule constant(const CouplingSet& c, Detuning d, double t0, double t1);

  void validate(double t0, double t1) const;  // throws ScheduleGap
  const ScheduleSegment& at(double t) const;
};

struct AtomicState {
  Complex rhoA{}, rhoB{};  // optical coherences
  Complex rho1{}, rho2{};  // ground-state coherences
};

struct ProbePair {
  Complex epsA{}, epsB{};  // probe Rabi-frequency envelopes, units of Gamma
};

// Local atomic evolution written as
//   d/dt (rhoA, rhoB) = i/2 (epsA, epsB) + i/2 C (rho1, rho2) - 1/2 (rhoA, rhoB)
//   d/dt (rho1, rho2) = i/2 C^dag (rhoA, rhoB) + G (rho1, rho2)
// with C the coupling matrix and G = i*delta*sigma3 - diag(gamma1, gamma2).
// Unitary reformulations of the scheme produce the same structure with a
// transformed C and G, so the solver works on this operator pair directly.
struct LocalOperator {
  Mat2c coupling = Mat2c::Zero();
  Mat2c ground = Mat2c::Zero();

  static LocalOperator from(const CouplingSet& c, Detuning d, const MediumParams& m);
};

AtomicState rhs(const AtomicState& s, const ProbePair& p, const LocalOperator& op);
AtomicState rhs(const AtomicState& s, const ProbePair& p, const CouplingSet& c, Detuning d,
                const MediumParams& m);

// Adiabatic CW solution of the atomic equations at gamma1 = gamma2 = 0:
// (rhoA, rhoB) = (i/Gamma) [I + i/(2 delta) C sigma3 C^dag]^-1 (epsA, epsB),
// which for symmetric couplings at theta = pi reduces to the 2x2 system
// [[1, -beta], [beta, 1]] with beta = Omega^2/(delta*Gamma). Throws
// SingularRegime at delta = 0.
AtomicState steady_coherences(const ProbePair& p, const CouplingSet& c, Detuning d);

}  // namespace ssl

#endif
