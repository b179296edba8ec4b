#include "ssl/analytic.hpp"

#include <cmath>

#include "ssl/errors.hpp"

namespace ssl::analytic {

namespace {

void check_alpha_omega(double alpha, double omega) {
  if (!(alpha > 0.0) || !std::isfinite(alpha))
    throw InvalidParams("alpha must be positive");
  if (!(omega > 0.0) || !std::isfinite(omega))
    throw InvalidParams("omega must be positive");
}

Mat2c rotation(double phi) {
  Mat2c r;
  r << std::cos(phi), -std::sin(phi), std::sin(phi), std::cos(phi);
  return r;
}

}  // namespace

PhaseBeta PhaseBeta::from(double alpha, double omega, double delta) {
  check_alpha_omega(alpha, omega);
  if (delta == 0.0) throw SingularRegime("beta undefined at delta = 0");
  PhaseBeta pb;
  pb.beta = omega * omega / delta;
  pb.phi_exact = 0.5 * alpha * pb.beta / (1.0 + pb.beta * pb.beta);
  pb.phi_approx = 0.5 * alpha * delta / (omega * omega);
  pb.loss_exponent = 0.5 * alpha / (1.0 + pb.beta * pb.beta);
  return pb;
}

TransferMatrix cw_transfer_exact(double alpha, double omega, double delta) {
  check_alpha_omega(alpha, omega);
  if (delta == 0.0) return TransferMatrix{};  // beta -> inf limit: lossless identity
  const PhaseBeta pb = PhaseBeta::from(alpha, omega, delta);
  return TransferMatrix{std::exp(-pb.loss_exponent) * rotation(pb.phi_exact)};
}

TransferMatrix cw_transfer_approx(double alpha, double omega, double delta) {
  check_alpha_omega(alpha, omega);
  if (delta == 0.0) return TransferMatrix{};
  const double phi = 0.5 * alpha * delta / (omega * omega);
  return TransferMatrix{std::exp(-2.0 * phi * phi / alpha) * rotation(phi)};
}

std::pair<double, double> transmission_pair(double phi, double alpha) {
  if (!(alpha > 0.0)) throw InvalidParams("alpha must be positive");
  const double envelope = std::exp(-4.0 * phi * phi / alpha);
  const double c = std::cos(phi), s = std::sin(phi);
  return {envelope * c * c, envelope * s * s};
}

double storage_phase(double t_s, double t_d, double delta) {
  if (t_s < 0.0 || t_d < 0.0) throw InvalidParams("times must be nonnegative");
  return (t_s + t_d) * delta;
}

double eit_peak_transmission(double alpha, double omega, double delta) {
  check_alpha_omega(alpha, omega);
  const double w4 = 4.0 * omega * omega * omega * omega;  // (sqrt2 Omega)^4
  return std::exp(-4.0 * alpha * delta * delta / w4);
}

std::pair<Complex, Complex> normal_mode_transform(const ProbePair& p) {
  const double r = 1.0 / std::sqrt(2.0);
  return {r * (p.epsA + kI * p.epsB), r * (kI * p.epsA + p.epsB)};
}

ProbePair normal_mode_inverse(Complex eps_a, Complex eps_b) {
  const double r = 1.0 / std::sqrt(2.0);
  return {r * (eps_a - kI * eps_b), r * (-kI * eps_a + eps_b)};
}

namespace {

// Unitary V with Omega_matrix = sqrt(2)*Omega*V, defined whenever the four
// magnitudes are equal and theta = pi (row orthogonality).
Mat2c unitary_factor(const CouplingSet& c, double omega) {
  return c.matrix() / (std::sqrt(2.0) * omega);
}

Mat2c transformed_ground(const Mat2c& v, Detuning d) {
  Mat2c sigma3;
  sigma3 << 1.0, 0.0, 0.0, -1.0;
  return v * (kI * d.delta * sigma3) * v.adjoint();
}

}  // namespace

EquivalentSystem coupled_lambda_map(const CouplingSet& c, Detuning d) {
  if (!c.symmetric())
    throw NotApplicable("coupled-Lambda map requires equal coupling magnitudes");
  const double th = relative_phase(c);
  if (std::abs(std::abs(th) - kPi) > 1e-9)
    throw NotApplicable("coupled-Lambda map requires theta = pi");
  const double omega = std::abs(c.omega[0]);
  EquivalentSystem sys;
  sys.effective_omega = std::sqrt(2.0) * omega;
  sys.transform = unitary_factor(c, omega);
  sys.coupling = c.matrix() * sys.transform.adjoint();  // = sqrt(2)*Omega * I
  sys.ground = transformed_ground(sys.transform, d);
  return sys;
}

EquivalentSystem degenerate_decomposition(const CouplingSet& c, Detuning d) {
  if (!c.symmetric())
    throw NotApplicable("degenerate decomposition requires equal coupling magnitudes");
  const double th = relative_phase(c);
  if (std::abs(th) > 1e-9)
    throw NotApplicable("degenerate decomposition requires theta = 0");
  const double omega = std::abs(c.omega[0]);
  // rows of the coupling matrix are parallel at theta = 0; build V from row A
  const double phA1 = std::arg(c.omega[0]);
  const double phA2 = std::arg(c.omega[1]);
  Mat2c v;
  const double r = 1.0 / std::sqrt(2.0);
  v << r * std::polar(1.0, phA1), r * std::polar(1.0, phA2),
       r * std::polar(1.0, phA1), -r * std::polar(1.0, phA2);
  EquivalentSystem sys;
  sys.effective_omega = std::sqrt(2.0) * omega;
  sys.transform = v;
  sys.coupling = c.matrix() * v.adjoint();  // [[sqrt2 W, 0], [sqrt2 W e^{i psi}, 0]]
  sys.ground = transformed_ground(v, d);
  return sys;
}

}  // namespace ssl::analytic
