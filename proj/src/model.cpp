#include "ssl/model.hpp"

#include <cmath>
#include <sstream>

#include "ssl/errors.hpp"

namespace ssl {

void UnitSystem::validate() const {
  if (!(gamma_SI > 0.0) || !std::isfinite(gamma_SI))
    throw InvalidParams("gamma_SI must be positive and finite");
  if (!(length_L > 0.0) || !std::isfinite(length_L))
    throw InvalidParams("length_L must be positive and finite");
}

void MediumParams::validate() const {
  if (!(alpha >= 0.0) || !std::isfinite(alpha))
    throw InvalidParams("alpha must be nonnegative and finite");
  if (!(gamma1 >= 0.0) || !(gamma2 >= 0.0))
    throw InvalidParams("dephasing rates must be nonnegative");
  if (!std::isfinite(dk_L)) throw InvalidParams("dk_L must be finite");
}

CouplingSet CouplingSet::from_theta(double magnitude, double theta) {
  return from_phases({magnitude, magnitude, magnitude, magnitude}, {theta, 0.0, 0.0, 0.0});
}

CouplingSet CouplingSet::from_phases(const std::array<double, 4>& magnitudes,
                                     const std::array<double, 4>& phases) {
  CouplingSet c;
  for (int n = 0; n < 4; ++n) {
    if (!(magnitudes[n] >= 0.0) || !std::isfinite(magnitudes[n]) || !std::isfinite(phases[n]))
      throw InvalidParams("coupling magnitudes must be nonnegative and finite");
    c.omega[n] = std::polar(magnitudes[n], phases[n]);
  }
  return c;
}

CouplingSet CouplingSet::off() { return CouplingSet{}; }

Mat2c CouplingSet::matrix() const {
  Mat2c m;
  m << omega[0], omega[1], omega[2], omega[3];
  return m;
}

bool CouplingSet::symmetric(double tol) const {
  const double m0 = std::abs(omega[0]);
  for (int n = 1; n < 4; ++n)
    if (std::abs(std::abs(omega[n]) - m0) > tol * std::max(1.0, m0)) return false;
  return true;
}

bool CouplingSet::all_off() const {
  for (const auto& w : omega)
    if (std::abs(w) != 0.0) return false;
  return true;
}

double CouplingSet::min_magnitude() const {
  double m = 0.0;
  bool any = false;
  for (const auto& w : omega) {
    const double a = std::abs(w);
    if (a > 0.0) {
      m = any ? std::min(m, a) : a;
      any = true;
    }
  }
  return any ? m : 0.0;
}

double relative_phase(const CouplingSet& c) {
  for (int n = 0; n < 4; ++n)
    if (std::abs(c.omega[n]) == 0.0)
      throw ZeroCoupling("relative_phase requires all four couplings nonzero");
  // arg(W_A1 * conj(W_A2) * conj(W_B1) * W_B2) = (th_A1-th_A2)-(th_B1-th_B2)
  double th = std::arg(c.omega[0] * std::conj(c.omega[1]) * std::conj(c.omega[2]) * c.omega[3]);
  if (th <= -kPi) th += 2.0 * kPi;  // wrap to (-pi, pi]
  return th;
}

CouplingSchedule CouplingSchedule::constant(const CouplingSet& c, Detuning d, double t0, double t1) {
  CouplingSchedule s;
  s.segments.push_back({t0, t1, c, d});
  return s;
}

void CouplingSchedule::validate(double t0, double t1) const {
  constexpr double tol = 1e-9;
  if (segments.empty()) throw ScheduleGap("schedule has no segments");
  if (segments.front().t_start > t0 + tol || segments.back().t_end < t1 - tol) {
    std::ostringstream os;
    os << "schedule [" << segments.front().t_start << ", " << segments.back().t_end
       << "] does not cover [" << t0 << ", " << t1 << "]";
    throw ScheduleGap(os.str());
  }
  for (std::size_t k = 0; k < segments.size(); ++k) {
    if (!(segments[k].t_end > segments[k].t_start))
      throw ScheduleGap("segment with nonpositive duration");
    if (k > 0 && std::abs(segments[k].t_start - segments[k - 1].t_end) > tol)
      throw ScheduleGap("segments are not contiguous");
  }
}

const ScheduleSegment& CouplingSchedule::at(double t) const {
  for (const auto& seg : segments)
    if (t < seg.t_end || &seg == &segments.back()) return seg;
  return segments.back();
}

LocalOperator LocalOperator::from(const CouplingSet& c, Detuning d, const MediumParams& m) {
  LocalOperator op;
  op.coupling = c.matrix();
  op.ground << Complex(-m.gamma1, d.delta), 0.0, 0.0, Complex(-m.gamma2, -d.delta);
  return op;
}

AtomicState rhs(const AtomicState& s, const ProbePair& p, const LocalOperator& op) {
  const Mat2c& C = op.coupling;
  const Mat2c& G = op.ground;
  AtomicState d;
  d.rhoA = 0.5 * kI * (p.epsA + C(0, 0) * s.rho1 + C(0, 1) * s.rho2) - 0.5 * s.rhoA;
  d.rhoB = 0.5 * kI * (p.epsB + C(1, 0) * s.rho1 + C(1, 1) * s.rho2) - 0.5 * s.rhoB;
  d.rho1 = 0.5 * kI * (std::conj(C(0, 0)) * s.rhoA + std::conj(C(1, 0)) * s.rhoB) +
           G(0, 0) * s.rho1 + G(0, 1) * s.rho2;
  d.rho2 = 0.5 * kI * (std::conj(C(0, 1)) * s.rhoA + std::conj(C(1, 1)) * s.rhoB) +
           G(1, 0) * s.rho1 + G(1, 1) * s.rho2;
  return d;
}

AtomicState rhs(const AtomicState& s, const ProbePair& p, const CouplingSet& c, Detuning d,
                const MediumParams& m) {
  return rhs(s, p, LocalOperator::from(c, d, m));
}

AtomicState steady_coherences(const ProbePair& p, const CouplingSet& c, Detuning d) {
  if (d.delta == 0.0)
    throw SingularRegime("steady_coherences undefined at delta = 0; integrate the dynamics");
  const Mat2c C = c.matrix();
  Mat2c sigma3;
  sigma3 << 1.0, 0.0, 0.0, -1.0;
  const Mat2c A = Mat2c::Identity() + (kI / (2.0 * d.delta)) * C * sigma3 * C.adjoint();
  const Vec2c eps(p.epsA, p.epsB);
  const Vec2c opt = kI * A.lu().solve(eps);
  // ground coherences from the stationarity of rho1, rho2
  const Vec2c grd = -(0.5 / d.delta) * (sigma3 * (C.adjoint() * opt));
  return AtomicState{opt(0), opt(1), grd(0), grd(1)};
}

}  // namespace ssl
