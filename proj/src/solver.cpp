#include "ssl/solver.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "ssl/errors.hpp"
#include "ssl/log.hpp"

namespace ssl {

void GridSpec::validate(double max_rate) const {
  if (n_z < 16) throw InvalidParams("n_z must be at least 16");
  if (!(dt > 0.0) || dt > 0.1) throw InvalidParams("dt must lie in (0, 0.1]");
  const double limit = 0.1 / std::max(1.0, max_rate);
  if (dt > limit + 1e-12) {
    std::ostringstream os;
    os << "dt = " << dt << " does not resolve the fastest rate (need <= " << limit << ")";
    throw InvalidParams(os.str());
  }
  if (!(t_final > t_start)) throw InvalidParams("t_final must exceed t_start");
}

void PulseSpec::validate() const {
  if (!(width_e2 > 0.0)) throw InvalidParams("pulse width_e2 must be positive");
  if (channel != 0 && channel != 1) throw InvalidParams("pulse channel must be A or B");
  if (!std::isfinite(peak.real()) || !std::isfinite(peak.imag()) || !std::isfinite(center))
    throw InvalidParams("pulse parameters must be finite");
}

double PulseSpec::entry_time(double fraction) const {
  if (!(fraction > 0.0 && fraction < 1.0))
    throw InvalidParams("entry fraction must lie in (0, 1)");
  // cumulative energy is Phi((t - center)/(width/4)); invert by bisection
  const double sigma = width_e2 / 4.0;
  double lo = -10.0, hi = 10.0;
  for (int it = 0; it < 80; ++it) {
    const double mid = 0.5 * (lo + hi);
    const double cdf = 0.5 * (1.0 + std::erf(mid / std::sqrt(2.0)));
    (cdf < fraction ? lo : hi) = mid;
  }
  return center + sigma * 0.5 * (lo + hi);
}

double group_delay(double alpha, double omega) {
  if (!(omega > 0.0)) throw InvalidParams("omega must be positive");
  return 0.5 * alpha / (omega * omega);
}

namespace {

struct GridState {
  ArrayXc rA, rB, r1, r2;

  void setZero(int n) {
    rA = ArrayXc::Zero(n);
    rB = ArrayXc::Zero(n);
    r1 = ArrayXc::Zero(n);
    r2 = ArrayXc::Zero(n);
  }
  double max_abs() const {
    return std::max(std::max(rA.abs().maxCoeff(), rB.abs().maxCoeff()),
                    std::max(r1.abs().maxCoeff(), r2.abs().maxCoeff()));
  }
};

void deriv(const GridState& s, const ArrayXc& eA, const ArrayXc& eB, const LocalOperator& op,
           GridState& d) {
  const Mat2c& C = op.coupling;
  const Mat2c& G = op.ground;
  const Complex half_i = 0.5 * kI;
  d.rA = half_i * eA + (half_i * C(0, 0)) * s.r1 + (half_i * C(0, 1)) * s.r2 - 0.5 * s.rA;
  d.rB = half_i * eB + (half_i * C(1, 0)) * s.r1 + (half_i * C(1, 1)) * s.r2 - 0.5 * s.rB;
  d.r1 = (half_i * std::conj(C(0, 0))) * s.rA + (half_i * std::conj(C(1, 0))) * s.rB +
         G(0, 0) * s.r1 + G(0, 1) * s.r2;
  d.r2 = (half_i * std::conj(C(0, 1))) * s.rA + (half_i * std::conj(C(1, 1))) * s.rB +
         G(1, 0) * s.r1 + G(1, 1) * s.r2;
}

void axpy(GridState& out, const GridState& y, double a, const GridState& k) {
  out.rA = y.rA + a * k.rA;
  out.rB = y.rB + a * k.rB;
  out.r1 = y.r1 + a * k.r1;
  out.r2 = y.r2 + a * k.r2;
}

void rk4_accumulate(GridState& y, double dt, const GridState& k1, const GridState& k2,
                    const GridState& k3, const GridState& k4) {
  const double w = dt / 6.0;
  y.rA += w * (k1.rA + 2.0 * k2.rA + 2.0 * k3.rA + k4.rA);
  y.rB += w * (k1.rB + 2.0 * k2.rB + 2.0 * k3.rB + k4.rB);
  y.r1 += w * (k1.r1 + 2.0 * k2.r1 + 2.0 * k3.r1 + k4.r1);
  y.r2 += w * (k1.r2 + 2.0 * k2.r2 + 2.0 * k3.r2 + k4.r2);
}

// z-sweep of the probe equations with the mismatch integrating factor exact
// per dz; each channel winds by -/+ dk_L radians over the slab
void sweep(const GridState& s, double alpha, double dk, double dz, Complex boundary_a,
           Complex boundary_b, ArrayXc& eA, ArrayXc& eB) {
  const int n = static_cast<int>(eA.size());
  const Complex source = 0.5 * kI * alpha;
  const Complex pA = std::exp(-kI * dk * dz);
  const Complex pB = std::exp(+kI * dk * dz);
  const double h = 0.5 * dz;
  eA(0) = boundary_a;
  eB(0) = boundary_b;
  for (int j = 0; j + 1 < n; ++j) {
    eA(j + 1) = pA * (eA(j) + h * source * s.rA(j)) + h * source * s.rA(j + 1);
    eB(j + 1) = pB * (eB(j) + h * source * s.rB(j)) + h * source * s.rB(j + 1);
  }
}

std::pair<Complex, Complex> boundary_at(const std::vector<PulseSpec>& inputs, double t) {
  Complex a{}, b{};
  for (const auto& p : inputs) (p.channel == 0 ? a : b) += p.amplitude(t);
  return {a, b};
}

void check_operator_segments(const std::vector<OperatorSegment>& segs, double t0, double t1) {
  constexpr double tol = 1e-9;
  if (segs.empty()) throw ScheduleGap("operator schedule has no segments");
  if (segs.front().t_start > t0 + tol || segs.back().t_end < t1 - tol)
    throw ScheduleGap("operator schedule does not cover the time span");
  for (std::size_t k = 1; k < segs.size(); ++k)
    if (std::abs(segs[k].t_start - segs[k - 1].t_end) > tol)
      throw ScheduleGap("operator schedule segments are not contiguous");
}

}  // namespace

FieldRecord propagate(const std::vector<PulseSpec>& inputs,
                      const std::vector<OperatorSegment>& segments, const MediumParams& medium,
                      const GridSpec& grid) {
  for (const auto& p : inputs) p.validate();
  return propagate([&inputs](double t) { return boundary_at(inputs, t); }, segments, medium, grid);
}

FieldRecord propagate(const BoundaryFn& boundary, const std::vector<OperatorSegment>& segments,
                      const MediumParams& medium, const GridSpec& grid) {
  medium.validate();
  double max_rate = 0.0;
  for (const auto& seg : segments) {
    for (int r = 0; r < 2; ++r)
      for (int c = 0; c < 2; ++c)
        max_rate = std::max({max_rate, std::abs(seg.op.coupling(r, c)), std::abs(seg.op.ground(r, c))});
  }
  grid.validate(max_rate);
  check_operator_segments(segments, grid.t_start, grid.t_final);

  const int n_z = grid.n_z;
  const double dz = 1.0 / (n_z - 1);
  const int n_steps = static_cast<int>(std::lround((grid.t_final - grid.t_start) / grid.dt));
  const int n_t = n_steps + 1;

  FieldRecord rec;
  rec.z_grid = ArrayXd::LinSpaced(n_z, 0.0, 1.0);
  rec.t_trace = ArrayXd::LinSpaced(n_t, grid.t_start, grid.t_start + n_steps * grid.dt);
  rec.input_trace.resize(n_t, 2);
  rec.output_trace.resize(n_t, 2);

  int stride = 0;
  int n_snap = 0;
  if (grid.keep_fields) {
    stride = grid.field_stride > 0 ? grid.field_stride : std::max(1, (n_t + 2000) / 2001);
    n_snap = (n_steps / stride) + 1;
    if (n_steps % stride != 0) ++n_snap;  // final state is always recorded
    rec.t_fields.resize(n_snap);
    rec.eps_a.resize(n_snap, n_z);
    rec.eps_b.resize(n_snap, n_z);
    rec.rho_a.resize(n_snap, n_z);
    rec.rho_b.resize(n_snap, n_z);
    rec.rho_1.resize(n_snap, n_z);
    rec.rho_2.resize(n_snap, n_z);
  }

  GridState y, k1, k2, k3, k4, tmp;
  y.setZero(n_z);
  k1.setZero(n_z);
  k2.setZero(n_z);
  k3.setZero(n_z);
  k4.setZero(n_z);
  tmp.setZero(n_z);
  ArrayXc eA = ArrayXc::Zero(n_z), eB = ArrayXc::Zero(n_z);

  std::size_t seg_idx = 0;
  auto operator_at = [&](double t) -> const LocalOperator& {
    while (seg_idx + 1 < segments.size() && t >= segments[seg_idx].t_end - 1e-12) ++seg_idx;
    return segments[seg_idx].op;
  };

  int snap_row = 0;
  auto record_step = [&](int i, double t) {
    rec.input_trace(i, 0) = eA(0);
    rec.input_trace(i, 1) = eB(0);
    rec.output_trace(i, 0) = eA(n_z - 1);
    rec.output_trace(i, 1) = eB(n_z - 1);
    if (grid.keep_fields && (i % stride == 0 || i == n_steps)) {
      rec.t_fields(snap_row) = t;
      rec.eps_a.row(snap_row) = eA.transpose();
      rec.eps_b.row(snap_row) = eB.transpose();
      rec.rho_a.row(snap_row) = y.rA.transpose();
      rec.rho_b.row(snap_row) = y.rB.transpose();
      rec.rho_1.row(snap_row) = y.r1.transpose();
      rec.rho_2.row(snap_row) = y.r2.transpose();
      ++snap_row;
    }
  };

  // initial sweep: empty slab driven by the boundary value at t_start
  {
    auto [ba, bb] = boundary(grid.t_start);
    sweep(y, medium.alpha, medium.dk_L, dz, ba, bb, eA, eB);
    record_step(0, grid.t_start);
  }

  const double dt = grid.dt;
  for (int i = 0; i < n_steps; ++i) {
    const double t = grid.t_start + i * dt;
    const LocalOperator& op = operator_at(t);

    deriv(y, eA, eB, op, k1);
    axpy(tmp, y, 0.5 * dt, k1);
    deriv(tmp, eA, eB, op, k2);
    axpy(tmp, y, 0.5 * dt, k2);
    deriv(tmp, eA, eB, op, k3);
    axpy(tmp, y, dt, k3);
    deriv(tmp, eA, eB, op, k4);
    rk4_accumulate(y, dt, k1, k2, k3, k4);

    const double t_next = grid.t_start + (i + 1) * dt;
    auto [ba, bb] = boundary(t_next);
    sweep(y, medium.alpha, medium.dk_L, dz, ba, bb, eA, eB);
    record_step(i + 1, t_next);

    if ((i & 63) == 0) {
      const double m = std::max({y.max_abs(), eA.abs().maxCoeff(), eB.abs().maxCoeff()});
      if (!(m < 1e6)) {
        std::ostringstream os;
        os << "state magnitude " << m << " at t = " << t_next << "; reduce dt";
        throw UnstableStep(os.str());
      }
    }
  }
  return rec;
}

FieldRecord propagate(const std::vector<PulseSpec>& inputs, const CouplingSchedule& schedule,
                      const MediumParams& medium, const GridSpec& grid) {
  schedule.validate(grid.t_start, grid.t_final);

  double peak = 0.0;
  for (const auto& p : inputs) peak = std::max(peak, std::abs(p.peak));
  std::vector<OperatorSegment> segs;
  segs.reserve(schedule.segments.size());
  bool warned = false;
  for (const auto& seg : schedule.segments) {
    if (!seg.is_off() && !warned && peak > 0.1 * seg.couplings.min_magnitude()) {
      std::ostringstream os;
      os << "weak-probe assumption stressed: max|eps| = " << peak << " exceeds 0.1*min|Omega| = "
         << 0.1 * seg.couplings.min_magnitude();
      log::warn(os.str());
      warned = true;
    }
    segs.push_back({seg.t_start, seg.t_end, LocalOperator::from(seg.couplings, seg.detuning, medium)});
  }
  return propagate(inputs, segs, medium, grid);
}

namespace {

double trace_energy(const ArrayXd& t, const Eigen::ArrayX2cd& trace, int channel, double t_from) {
  const auto n = t.size();
  double sum = 0.0;
  for (Eigen::Index i = 0; i + 1 < n; ++i) {
    if (t(i + 1) <= t_from) continue;
    const double dt = t(i + 1) - t(i);
    sum += 0.5 * dt * (std::norm(trace(i, channel)) + std::norm(trace(i + 1, channel)));
  }
  return sum;
}

}  // namespace

double output_energy_after(const FieldRecord& rec, int channel, double t_from) {
  if (rec.empty()) throw EmptyRecord("record has no traces");
  if (channel != 0 && channel != 1) throw InvalidParams("channel must be 0 or 1");
  const double e_in = trace_energy(rec.t_trace, rec.input_trace, 0, -1e300) +
                      trace_energy(rec.t_trace, rec.input_trace, 1, -1e300);
  if (!(e_in > 0.0)) throw EmptyRecord("input traces carry no energy");
  return trace_energy(rec.t_trace, rec.output_trace, channel, t_from) / e_in;
}

double output_energy(const FieldRecord& rec, int channel) {
  return output_energy_after(rec, channel, -1e300);
}

StorageOutcome store_and_retrieve(const PulseSpec& input, std::optional<double> t_off, double t_s,
                                  Detuning delta_store, const CouplingSet& base,
                                  const MediumParams& medium, const GridSpec& grid) {
  return store_and_retrieve(std::vector<PulseSpec>{input}, t_off, {{t_s, delta_store}}, base,
                            delta_store, medium, grid);
}

StorageOutcome store_and_retrieve(const std::vector<PulseSpec>& inputs,
                                  std::optional<double> t_off,
                                  const std::vector<std::pair<double, Detuning>>& storage,
                                  const CouplingSet& base, Detuning delta_propagation,
                                  const MediumParams& medium, const GridSpec& grid) {
  if (inputs.empty()) throw InvalidParams("store_and_retrieve needs at least one input pulse");
  for (const auto& [dur, d] : storage) {
    if (dur < 0.0) throw InvalidParams("storage durations must be nonnegative");
    (void)d;
  }
  const double t0 = grid.t_start;
  auto snap = [&](double t) { return t0 + std::lround((t - t0) / grid.dt) * grid.dt; };

  double off = t_off ? *t_off : inputs.front().entry_time(0.95);
  off = snap(off);
  if (!(off > t0)) throw InvalidParams("switch-off time precedes the window start");

  CouplingSchedule sched;
  double t = off;
  sched.segments.push_back({t0, off, base, delta_propagation});
  for (const auto& [dur, d] : storage) {
    const double end = snap(t + dur);
    if (end > t) {
      sched.segments.push_back({t, end, CouplingSet::off(), d});
      t = end;
    }
  }
  const double t_on = t;
  const double omega = base.min_magnitude();
  const double window = group_delay(medium.alpha, omega > 0 ? omega : 1.0) +
                        inputs.front().width_e2 + 20.0;
  GridSpec g = grid;
  g.t_final = snap(t_on + window);
  sched.segments.push_back({t_on, g.t_final, base, delta_propagation});

  StorageOutcome out;
  out.t_off = off;
  out.t_on = t_on;
  out.record = propagate(inputs, sched, medium, g);
  out.retrieved_a = output_energy_after(out.record, 0, t_on);
  out.retrieved_b = output_energy_after(out.record, 1, t_on);
  return out;
}

}  // namespace ssl
