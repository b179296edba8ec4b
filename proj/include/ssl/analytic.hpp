#ifndef SSL_ANALYTIC_HPP
#define SSL_ANALYTIC_HPP

#include <utility>

#include "ssl/model.hpp"
#include "ssl/types.hpp"

namespace ssl::analytic {

// 2x2 complex map from (epsA, epsB) at z=0 to z=L.
struct TransferMatrix {
  Mat2c m = Mat2c::Identity();

  ProbePair apply(const ProbePair& in) const {
    const Vec2c out = m * Vec2c(in.epsA, in.epsB);
    return {out(0), out(1)};
  }
  // intensity transmissions for a single-channel input on A
  std::pair<double, double> transmissions_for_a_input() const {
    return {std::norm(m(0, 0)), std::norm(m(1, 0))};
  }
};

// beta = Omega^2/(delta*Gamma) and the derived CW phase/loss quantities.
// phi_exact -> phi_approx as beta -> inf with relative error O(1/beta^2).
struct PhaseBeta {
  double beta = 0.0;
  double phi_exact = 0.0;     // (alpha/2) beta/(1+beta^2)
  double phi_approx = 0.0;    // alpha*Gamma*delta/(2 Omega^2)
  double loss_exponent = 0.0; // (alpha/2)/(1+beta^2), per amplitude

  static PhaseBeta from(double alpha, double omega, double delta);
};

// Exact CW transfer for symmetric couplings at theta = pi, Dk = 0, gamma = 0:
// scalar loss times rotation by phi_exact. delta = 0 returns the identity.
TransferMatrix cw_transfer_exact(double alpha, double omega, double delta);

// Large-beta form: loss exp(-2 phi^2/alpha), rotation by phi = alpha*Gamma*delta/(2 Omega^2).
TransferMatrix cw_transfer_approx(double alpha, double omega, double delta);

// (T_A, T_B) = exp(-4 phi^2/alpha) * (cos^2 phi, sin^2 phi) for A-only input.
std::pair<double, double> transmission_pair(double phi, double alpha);

// Oscillation phase accumulated over storage plus propagation: (t_s + t_d) * delta.
double storage_phase(double t_s, double t_d, double delta);

// EIT peak transmission exp[-4 alpha delta^2 Gamma^2 / (sqrt(2) Omega)^4]; equals
// the scalar prefactor of transmission_pair at phi = alpha*Gamma*delta/(2 Omega^2).
double eit_peak_transmission(double alpha, double omega, double delta);

// Probe normal modes (eps_a, eps_b) = (1/sqrt2) [[1, i], [i, 1]] (eps_A, eps_B).
std::pair<Complex, Complex> normal_mode_transform(const ProbePair& p);
ProbePair normal_mode_inverse(Complex eps_a, Complex eps_b);

// Reformulation of the scheme as an equivalent pair of Lambda systems. The
// probes are untouched; the ground coherences transform as rho' = V rho and
// the operator pair (coupling, ground) drives (rho1', rho2').
struct EquivalentSystem {
  double effective_omega = 0.0;  // sqrt(2) * Omega
  Mat2c coupling = Mat2c::Zero();
  Mat2c ground = Mat2c::Zero();
  Mat2c transform = Mat2c::Identity();  // V

  LocalOperator local_operator() const { return LocalOperator{coupling, ground}; }
};

// theta = pi: two uncoupled Lambda systems with coupling sqrt(2)*Omega each,
// cross-linked only through the detuning block [[0, i delta], [i delta, 0]].
// Throws NotApplicable unless the set is symmetric with theta = pi.
EquivalentSystem coupled_lambda_map(const CouplingSet& c, Detuning d);

// theta = 0: double-Lambda structure in which both probes couple to the common
// coherence rho1' while rho2' carries no optical coupling. Predicts identical
// eps_A and eps_B outputs for an A-only input. Throws NotApplicable at theta != 0.
EquivalentSystem degenerate_decomposition(const CouplingSet& c, Detuning d);

}  // namespace ssl::analytic

#endif
