#include "ssl/calibration.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "ssl/errors.hpp"
#include "ssl/log.hpp"

namespace ssl::calibration {

void TraceData::validate() const {
  const auto n = t.size();
  if (n < 4) throw InvalidParams("trace needs at least 4 samples");
  if (p_in_a.size() != n || p_out_a.size() != n)
    throw InvalidParams("trace columns have mismatched lengths");
  if (p_out_b.size() != 0 && p_out_b.size() != n)
    throw InvalidParams("trace columns have mismatched lengths");
  for (Eigen::Index i = 1; i < n; ++i)
    if (!(t(i) > t(i - 1))) throw InvalidParams("trace times must be strictly increasing");
  auto nonneg = [](const ArrayXd& p) { return p.size() == 0 || p.minCoeff() >= -1e-9; };
  if (!nonneg(p_in_a) || !nonneg(p_out_a) || !nonneg(p_out_b))
    throw InvalidParams("trace powers must be nonnegative");
}

double FitResult::param(const std::string& name) const {
  for (std::size_t i = 0; i < names.size(); ++i)
    if (names[i] == name) return params(static_cast<Eigen::Index>(i));
  throw InvalidParams("unknown fit parameter " + name);
}

double FitResult::sigma_of(const std::string& name) const {
  for (std::size_t i = 0; i < names.size(); ++i)
    if (names[i] == name) return sigma(static_cast<Eigen::Index>(i));
  throw InvalidParams("unknown fit parameter " + name);
}

namespace {

using Eigen::VectorXd;

double safe_eval(const Objective& f, const VectorXd& x) {
  const double v = f(x);
  return std::isfinite(v) ? v : 1e300;
}

// damped reflection: fold violations back inside by half, so a folded trial
// can never coincide with the vertex it was reflected from
VectorXd reflect_into_bounds(VectorXd x, const VectorXd& lo, const VectorXd& hi) {
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    for (int pass = 0; pass < 2; ++pass) {
      if (x(i) < lo(i)) x(i) = lo(i) + 0.5 * (lo(i) - x(i));
      if (x(i) > hi(i)) x(i) = hi(i) - 0.5 * (x(i) - hi(i));
    }
    x(i) = std::clamp(x(i), lo(i), hi(i));
  }
  return x;
}

}  // namespace

MinimizeResult minimize(const Objective& f, const VectorXd& x0, const VectorXd& lo,
                        const VectorXd& hi, const MinimizeOptions& options) {
  const int n = static_cast<int>(x0.size());
  if (lo.size() != n || hi.size() != n) throw InvalidParams("bound sizes do not match x0");
  for (int i = 0; i < n; ++i)
    if (!(lo(i) <= hi(i))) throw InvalidParams("inconsistent bounds");
  if (safe_eval(f, x0) >= 1e300) throw InvalidParams("objective not finite at x0");

  std::vector<VectorXd> v(n + 1, reflect_into_bounds(x0, lo, hi));
  for (int i = 0; i < n; ++i) {
    const double step =
        std::max(options.initial_step * std::abs(x0(i)), 0.02 * (hi(i) - lo(i)));
    VectorXd p = v[0];
    p(i) += (step > 0.0 ? step : options.initial_step);
    v[i + 1] = reflect_into_bounds(p, lo, hi);
  }
  std::vector<double> fv(n + 1);
  for (int i = 0; i <= n; ++i) fv[i] = safe_eval(f, v[i]);
  double initial_diameter = 0.0;
  for (int k = 1; k <= n; ++k)
    initial_diameter = std::max(initial_diameter, (v[k] - v[0]).cwiseAbs().maxCoeff());

  auto order = [&] {
    std::vector<int> idx(n + 1);
    std::iota(idx.begin(), idx.end(), 0);
    std::stable_sort(idx.begin(), idx.end(), [&](int a, int b) { return fv[a] < fv[b]; });
    std::vector<VectorXd> v2(n + 1);
    std::vector<double> f2(n + 1);
    for (int k = 0; k <= n; ++k) {
      v2[k] = v[idx[k]];
      f2[k] = fv[idx[k]];
    }
    v.swap(v2);
    fv.swap(f2);
  };

  MinimizeResult res;
  int iter = 0;
  bool any_variation = false;
  for (; iter < options.max_iter; ++iter) {
    order();
    const double spread = fv[n] - fv[0];
    if (spread > 0.0) any_variation = true;
    double diameter = 0.0;
    for (int k = 1; k <= n; ++k) diameter = std::max(diameter, (v[k] - v[0]).cwiseAbs().maxCoeff());
    // relative objective spread keeps the stop rule invariant under rescaling;
    // a near-tie across a still-large simplex (symmetric straddle of a
    // minimum) is not convergence, so the f rule waits for some contraction
    const bool f_done = spread > 0.0 && spread <= options.tol_f * std::abs(fv[0]) &&
                        diameter <= 0.25 * initial_diameter;
    if (f_done || diameter <= options.tol_x) {
      res.converged = true;
      break;
    }

    VectorXd centroid = VectorXd::Zero(n);
    for (int k = 0; k < n; ++k) centroid += v[k];
    centroid /= n;

    const VectorXd xr = reflect_into_bounds(centroid + (centroid - v[n]), lo, hi);
    const double fr = safe_eval(f, xr);
    if (fr < fv[0]) {
      const VectorXd xe = reflect_into_bounds(centroid + 2.0 * (xr - centroid), lo, hi);
      const double fe = safe_eval(f, xe);
      if (fe < fr) {
        v[n] = xe;
        fv[n] = fe;
      } else {
        v[n] = xr;
        fv[n] = fr;
      }
    } else if (fr < fv[n - 1]) {
      v[n] = xr;
      fv[n] = fr;
    } else {
      const bool outside = fr < fv[n];
      const VectorXd base = outside ? xr : v[n];
      const VectorXd xc = reflect_into_bounds(centroid + 0.5 * (base - centroid), lo, hi);
      const double fc = safe_eval(f, xc);
      if (fc < (outside ? fr : fv[n])) {
        v[n] = xc;
        fv[n] = fc;
      } else {
        for (int k = 1; k <= n; ++k) {
          v[k] = reflect_into_bounds(v[0] + 0.5 * (v[k] - v[0]), lo, hi);
          fv[k] = safe_eval(f, v[k]);
        }
      }
    }
  }
  order();
  res.x = v[0];
  res.f = fv[0];
  res.iterations = iter;
  res.degenerate = !any_variation;
  return res;
}

namespace {

double lin_interp(const ArrayXd& x, const ArrayXd& y, double xi) {
  const auto n = x.size();
  if (xi <= x(0)) return y(0);
  if (xi >= x(n - 1)) return y(n - 1);
  Eigen::Index lo = 0, hi = n - 1;
  while (hi - lo > 1) {
    const Eigen::Index mid = (lo + hi) / 2;
    (x(mid) <= xi ? lo : hi) = mid;
  }
  const double w = (xi - x(lo)) / (x(hi) - x(lo));
  return (1.0 - w) * y(lo) + w * y(hi);
}

// sigma from the curvature of the objective: cov = 2 * (rss/dof) * H^-1,
// with H the finite-difference Hessian at the optimum.
VectorXd curvature_sigma(const Objective& f, const VectorXd& x, const VectorXd& lo,
                         const VectorXd& hi, double rss, Eigen::Index n_data) {
  const int n = static_cast<int>(x.size());
  VectorXd h(n), xc = x;
  for (int i = 0; i < n; ++i) {
    h(i) = std::max(1e-4 * (1.0 + std::abs(x(i))), 1e-4 * (hi(i) - lo(i)));
    xc(i) = std::clamp(x(i), lo(i) + h(i), hi(i) - h(i));
  }
  const double f0 = safe_eval(f, xc);
  Eigen::MatrixXd H(n, n);
  auto at = [&](int i, double si, int j, double sj) {
    VectorXd p = xc;
    p(i) += si * h(i);
    if (j >= 0) p(j) += sj * h(j);
    return safe_eval(f, p);
  };
  for (int i = 0; i < n; ++i) {
    H(i, i) = (at(i, 1, -1, 0) - 2.0 * f0 + at(i, -1, -1, 0)) / (h(i) * h(i));
    for (int j = i + 1; j < n; ++j) {
      H(i, j) = H(j, i) = (at(i, 1, j, 1) - at(i, 1, j, -1) - at(i, -1, j, 1) + at(i, -1, j, -1)) /
                          (4.0 * h(i) * h(j));
    }
  }
  const double s2 = rss / std::max<Eigen::Index>(1, n_data - n);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(H);
  const double floor = std::max(es.eigenvalues().cwiseAbs().maxCoeff(), 1e-300) * 1e-12;
  VectorXd inv_diag = es.eigenvalues();
  for (int i = 0; i < n; ++i) inv_diag(i) = 1.0 / std::max(inv_diag(i), floor);
  const Eigen::MatrixXd cov =
      2.0 * s2 * es.eigenvectors() * inv_diag.asDiagonal() * es.eigenvectors().transpose();
  VectorXd sigma(n);
  for (int i = 0; i < n; ++i) sigma(i) = std::sqrt(std::max(0.0, cov(i, i)));
  return sigma;
}

double trace_energy_1d(const ArrayXd& t, const ArrayXd& p) {
  double e = 0.0;
  for (Eigen::Index i = 0; i + 1 < t.size(); ++i)
    e += 0.5 * (t(i + 1) - t(i)) * (p(i) + p(i + 1));
  return e;
}

// model output powers for a constant-coupling slab driven by the measured
// input amplitude; returns RSS against the recorded output channels
double trace_model_rss(const TraceData& data, const ArrayXd& amp_in, const CouplingSet& couplings,
                       const MediumParams& medium, const FitOptions& options, bool use_channel_b) {
  GridSpec grid;
  grid.n_z = options.n_z;
  grid.dt = options.dt;
  grid.t_start = data.t(0);
  grid.t_final = data.t(data.t.size() - 1);
  std::vector<OperatorSegment> segs{
      {grid.t_start, grid.t_final, LocalOperator::from(couplings, Detuning{0.0}, medium)}};
  BoundaryFn boundary = [&](double t) {
    return std::pair<Complex, Complex>{Complex(lin_interp(data.t, amp_in, t), 0.0), Complex{}};
  };
  const FieldRecord rec = propagate(boundary, segs, medium, grid);
  ArrayXd pa(rec.t_trace.size()), pb(rec.t_trace.size());
  for (Eigen::Index i = 0; i < rec.t_trace.size(); ++i) {
    pa(i) = std::norm(rec.output_trace(i, 0));
    pb(i) = std::norm(rec.output_trace(i, 1));
  }
  // residuals in units of the input peak power, so the objective scale is
  // independent of the probe amplitude
  const double scale = 1.0 / std::max(data.p_in_a.maxCoeff(), 1e-300);
  double rss = 0.0;
  for (Eigen::Index i = 0; i < data.t.size(); ++i) {
    const double ra = scale * (lin_interp(rec.t_trace, pa, data.t(i)) - data.p_out_a(i));
    rss += ra * ra;
    if (use_channel_b) {
      const double rb = scale * (lin_interp(rec.t_trace, pb, data.t(i)) - data.p_out_b(i));
      rss += rb * rb;
    }
  }
  return rss;
}

double centroid(const ArrayXd& t, const ArrayXd& p) {
  double num = 0.0, den = 0.0;
  for (Eigen::Index i = 0; i < t.size(); ++i) {
    num += t(i) * p(i);
    den += p(i);
  }
  return den > 0.0 ? num / den : 0.0;
}

ArrayXd amplitude_from_power(const ArrayXd& p) { return p.max(0.0).sqrt(); }

}  // namespace

FitResult fit_single_lambda(const TraceData& data, const UnitSystem& units,
                            const FitOptions& options) {
  units.validate();
  data.validate();
  const double e_in = trace_energy_1d(data.t, data.p_in_a);
  const double e_out = trace_energy_1d(data.t, data.p_out_a);
  if (!(e_in > 0.0) || e_out <= 1e-8 * e_in)
    throw Unidentifiable("trace lacks a delayed output pulse");

  const ArrayXd amp_in = amplitude_from_power(data.p_in_a);
  const double t_delay = centroid(data.t, data.p_out_a) - centroid(data.t, data.p_in_a);

  // pulse spectral width from the intensity moments of the input
  const double tc = centroid(data.t, data.p_in_a);
  double var = 0.0, wsum = 0.0;
  for (Eigen::Index i = 0; i < data.t.size(); ++i) {
    var += data.p_in_a(i) * (data.t(i) - tc) * (data.t(i) - tc);
    wsum += data.p_in_a(i);
  }
  const double width = 4.0 * std::sqrt(std::max(var / std::max(wsum, 1e-300), 1e-6));

  // initial guesses: T fixes Omega through the EIT bandwidth, the delay fixes alpha
  const double transmission = std::clamp(e_out / e_in, 1e-6, 0.999);
  const double omega2 =
      32.0 * std::max(t_delay, 1.0) / ((1.0 / (transmission * transmission) - 1.0) * width * width);
  const double omega_init = std::clamp(std::sqrt(std::max(omega2, 1e-4)), 0.1, 0.9);
  const double alpha_init = std::clamp(std::max(t_delay, 1.0) * omega_init * omega_init, 2.0, 150.0);

  Eigen::Vector3d x0(alpha_init, omega_init, 1e-3);
  Eigen::Vector3d lo(1.0, 0.05, 0.0), hi(200.0, 1.0, 0.05);
  Objective obj = [&](const VectorXd& x) {
    MediumParams m;
    m.alpha = x(0);
    m.gamma1 = x(2);
    m.gamma2 = 0.0;
    m.dk_L = 0.0;
    CouplingSet c;
    c.omega = {Complex(x(1), 0.0), 0.0, 0.0, 0.0};
    return trace_model_rss(data, amp_in, c, m, options, false);
  };
  const MinimizeResult mr = minimize(obj, x0, lo, hi, options.minimize);

  FitResult fr;
  fr.names = {"alpha", "omega", "gamma"};
  fr.params = mr.x;
  fr.rss = mr.f;
  fr.iterations = mr.iterations;
  fr.converged = mr.converged;
  fr.degenerate = mr.degenerate;
  fr.sigma = curvature_sigma(obj, mr.x, lo, hi, mr.f, data.t.size());
  if (fr.params(2) < 2.0 * fr.sigma(2))
    fr.upper_bounds["gamma"] = fr.params(2) + 2.0 * fr.sigma(2);
  return fr;
}

FitResult fit_double_lambda(const TraceData& data, double alpha, double omega_a, double gamma,
                            const UnitSystem& units, const FitOptions& options) {
  units.validate();
  data.validate();
  if (data.p_out_b.size() != data.t.size())
    throw InvalidParams("double-Lambda data needs the eps_B output trace");
  const double e_in = trace_energy_1d(data.t, data.p_in_a);
  const double e_out_b = trace_energy_1d(data.t, data.p_out_b);
  if (!(e_in > 0.0) || e_out_b <= 1e-9 * e_in)
    throw Unidentifiable("eps_B output is below the noise floor");

  const ArrayXd amp_in = amplitude_from_power(data.p_in_a);
  Eigen::Vector2d x0(omega_a, 0.3);
  Eigen::Vector2d lo(0.05, 0.0), hi(1.0, 3.0);
  Objective obj = [&](const VectorXd& x) {
    MediumParams m;
    m.alpha = alpha;
    m.gamma1 = gamma;
    m.gamma2 = 0.0;
    m.dk_L = x(1);
    CouplingSet c;
    c.omega = {Complex(omega_a, 0.0), 0.0, Complex(x(0), 0.0), 0.0};
    return trace_model_rss(data, amp_in, c, m, options, true);
  };
  const MinimizeResult mr = minimize(obj, x0, lo, hi, options.minimize);

  FitResult fr;
  fr.names = {"omega_b", "dk_L"};
  fr.params = mr.x;
  fr.rss = mr.f;
  fr.iterations = mr.iterations;
  fr.converged = mr.converged;
  fr.degenerate = mr.degenerate;
  fr.sigma = curvature_sigma(obj, mr.x, lo, hi, mr.f, 2 * data.t.size());
  if (fr.params(1) < 2.0 * fr.sigma(1))
    fr.upper_bounds["dk_L"] = fr.params(1) + 2.0 * fr.sigma(1);
  return fr;
}

namespace {

// profile fit of d(x) ~ a*cos(w x) + b*sin(w x) over a frequency grid;
// returns (best w, phase, amplitude)
struct CosineProfile {
  double w = 0.0, phase = 0.0, amplitude = 0.0;
};

CosineProfile best_cosine(const ArrayXd& x, const ArrayXd& d, double w_lo, double w_hi) {
  // stay below the sampling Nyquist limit
  double spacing = 1e300;
  for (Eigen::Index i = 1; i < x.size(); ++i) spacing = std::min(spacing, x(i) - x(i - 1));
  w_hi = std::min(w_hi, 0.95 * kPi / spacing);
  w_lo = std::min(w_lo, 0.5 * w_hi);
  CosineProfile best;
  double best_rss = 1e300;
  constexpr int kGrid = 1200;
  for (int k = 0; k <= kGrid; ++k) {
    const double w = w_lo * std::pow(w_hi / w_lo, static_cast<double>(k) / kGrid);
    double cc = 0, cs = 0, ss = 0, cd = 0, sd = 0;
    for (Eigen::Index i = 0; i < x.size(); ++i) {
      const double c = std::cos(w * x(i)), s = std::sin(w * x(i));
      cc += c * c;
      cs += c * s;
      ss += s * s;
      cd += c * d(i);
      sd += s * d(i);
    }
    const double det = cc * ss - cs * cs;
    if (std::abs(det) < 1e-12) continue;
    const double a = (ss * cd - cs * sd) / det;
    const double b = (cc * sd - cs * cd) / det;
    double rss = 0.0;
    for (Eigen::Index i = 0; i < x.size(); ++i) {
      const double m = a * std::cos(w * x(i)) + b * std::sin(w * x(i));
      rss += (d(i) - m) * (d(i) - m);
    }
    if (rss < best_rss) {
      best_rss = rss;
      best = {w, std::atan2(-b, a), std::hypot(a, b)};
    }
  }
  return best;
}

}  // namespace

FitResult fit_oscillation_delta(const protocols::ScanResult& scan,
                                const MinimizeOptions& options) {
  scan.validate();
  const auto n = scan.axis.size();
  if (n < 8) throw InsufficientCycles("scan has too few points");
  const ArrayXd d = scan.t_a - scan.t_b;  // E0 cos(2 phi)
  const ArrayXd s = scan.t_a + scan.t_b;
  const double span = scan.axis(n - 1) - scan.axis(0);
  // phi = pi*axis/P + phi0, so P is the period of the energy oscillation
  // itself and cos(2 phi) oscillates at w = 2 pi / P
  const CosineProfile prof =
      best_cosine(scan.axis, d, 2.0 * kPi / (2.0 * span), 2.0 * kPi / (span / 20.0));
  const double period_init = 2.0 * kPi / prof.w;
  if (span / period_init < 1.5)
    throw InsufficientCycles("fewer than 1.5 oscillation cycles in the scan");

  Eigen::Vector3d x0(period_init, 0.5 * prof.phase, std::max(s.mean(), 1e-12));
  Eigen::Vector3d lo(0.5 * period_init, -kPi, 0.0);
  Eigen::Vector3d hi(2.0 * period_init, kPi, 2.0 * s.maxCoeff());
  Objective obj = [&](const VectorXd& x) {
    double rss = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
      const double phi = kPi * scan.axis(i) / x(0) + x(1);
      const double c = std::cos(phi), sn = std::sin(phi);
      rss += std::pow(x(2) * c * c - scan.t_a(i), 2) + std::pow(x(2) * sn * sn - scan.t_b(i), 2);
    }
    return rss;
  };
  const MinimizeResult mr = minimize(obj, x0, lo, hi, options);

  FitResult fr;
  fr.names = {"period", "phi0", "envelope"};
  fr.params = mr.x;
  fr.rss = mr.f;
  fr.iterations = mr.iterations;
  fr.converged = mr.converged;
  fr.sigma = curvature_sigma(obj, mr.x, lo, hi, mr.f, 2 * n);
  return fr;
}

FitResult fit_oscillation_time(const protocols::ScanResult& scan, const MinimizeOptions& options) {
  scan.validate();
  const auto n = scan.axis.size();
  if (n < 8) throw InsufficientCycles("scan has too few points");
  const ArrayXd s = scan.t_a + scan.t_b;
  if (s.minCoeff() <= 0.0) throw InvalidParams("total retrieved energy must stay positive");
  const double span = scan.axis(n - 1) - scan.axis(0);

  // total energy decays as exp(-t/tau) regardless of the oscillation
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (Eigen::Index i = 0; i < n; ++i) {
    sx += scan.axis(i);
    sy += std::log(s(i));
    sxx += scan.axis(i) * scan.axis(i);
    sxy += scan.axis(i) * std::log(s(i));
  }
  const double slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
  const double tau_init = slope < -1e-12 ? -1.0 / slope : 1e7;
  const double e0_init = std::exp((sy - slope * sx) / n);

  // normalized channel-A fraction carries the bare oscillation
  ArrayXd frac(n);
  for (Eigen::Index i = 0; i < n; ++i) frac(i) = scan.t_a(i) / s(i) - 0.5;
  const CosineProfile prof =
      best_cosine(scan.axis, frac, 2.0 * kPi / (2.0 * span), 2.0 * kPi / (span / 20.0));
  const double ts_init = 2.0 * kPi / prof.w;
  if (span / ts_init < 1.0) throw InsufficientCycles("less than one oscillation cycle");

  Eigen::Vector4d x0(ts_init, std::clamp(tau_init, span / 10.0, 1e7), 0.5 * prof.phase, e0_init);
  Eigen::Vector4d lo(0.5 * ts_init, span / 10.0, -kPi, 0.0);
  Eigen::Vector4d hi(2.0 * ts_init, 1e7, kPi, 10.0 * e0_init);
  Objective obj = [&](const VectorXd& x) {
    double rss = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
      const double phi = kPi * scan.axis(i) / x(0) + x(2);
      const double env = x(3) * std::exp(-scan.axis(i) / x(1));
      const double c = std::cos(phi), sn = std::sin(phi);
      rss += std::pow(env * c * c - scan.t_a(i), 2) + std::pow(env * sn * sn - scan.t_b(i), 2);
    }
    return rss;
  };
  const MinimizeResult mr = minimize(obj, x0, lo, hi, options);

  FitResult fr;
  fr.names = {"T_s", "tau", "phi0", "envelope"};
  fr.params = mr.x;
  fr.rss = mr.f;
  fr.iterations = mr.iterations;
  fr.converged = mr.converged;
  fr.sigma = curvature_sigma(obj, mr.x, lo, hi, mr.f, 2 * n);
  return fr;
}

}  // namespace ssl::calibration
