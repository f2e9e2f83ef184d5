#include "schrodlab/flow.hpp"

#include <algorithm>
#include <cmath>

namespace schrodlab {

namespace {

using State = std::vector<double>;
using Rhs = std::function<void(double, const State&, State&)>;

struct OdeSample {
  double s;
  State y;
  State dy;
};

struct OdeResult {
  std::vector<OdeSample> samples;  // ordered in integration direction
  TraceStatus status = TraceStatus::Complete;
};

// Dormand-Prince 5(4) embedded pair, FSAL.
constexpr double kC[7] = {0.0, 1.0 / 5, 3.0 / 10, 4.0 / 5, 8.0 / 9, 1.0, 1.0};
constexpr double kA[7][6] = {
    {},
    {1.0 / 5},
    {3.0 / 40, 9.0 / 40},
    {44.0 / 45, -56.0 / 15, 32.0 / 9},
    {19372.0 / 6561, -25360.0 / 2187, 64448.0 / 6561, -212.0 / 729},
    {9017.0 / 3168, -355.0 / 33, 46732.0 / 5247, 49.0 / 176, -5103.0 / 18656},
    {35.0 / 384, 0.0, 500.0 / 1113, 125.0 / 192, -2187.0 / 6784, 11.0 / 84}};
constexpr double kE[7] = {35.0 / 384 - 5179.0 / 57600,
                          0.0,
                          500.0 / 1113 - 7571.0 / 16695,
                          125.0 / 192 - 393.0 / 640,
                          -2187.0 / 6784 + 92097.0 / 339200,
                          11.0 / 84 - 187.0 / 2100,
                          -1.0 / 40};

// Adaptive integration from s0 to s1 (either direction).  `halt` may stop
// the run early after an accepted step; the partial result stays valid.
OdeResult integrate(const Rhs& f, const State& y0, double s0, double s1, double tol,
                    std::size_t max_steps,
                    const std::function<bool(const OdeSample&)>& halt = {}) {
  OdeResult res;
  const std::size_t m = y0.size();
  double s = s0;
  State y = y0;
  State dy(m);
  f(s, y, dy);
  res.samples.push_back({s, y, dy});
  if (s1 == s0) return res;
  const double dir = s1 > s0 ? 1.0 : -1.0;

  double ynorm = 0.0, fnorm = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    ynorm = std::max(ynorm, std::abs(y[i]));
    fnorm = std::max(fnorm, std::abs(dy[i]));
  }
  double h = std::min(std::abs(s1 - s0), 0.01 * (1.0 + ynorm) / (1.0 + fnorm));
  h = std::max(h, 1e-10);

  std::array<State, 7> k;
  for (auto& ki : k) ki.resize(m);
  k[0] = dy;
  State ytmp(m), ynew(m);
  double err_prev = 1.0;

  for (std::size_t step = 0; step < max_steps; ++step) {
    h = std::min(h, std::abs(s1 - s));
    for (int stage = 1; stage < 7; ++stage) {
      for (std::size_t i = 0; i < m; ++i) {
        double acc = 0.0;
        for (int j = 0; j < stage; ++j) acc += kA[stage][j] * k[j][i];
        ytmp[i] = y[i] + dir * h * acc;
      }
      f(s + dir * h * kC[stage], ytmp, k[stage]);
    }
    // Stage 6 already lands on the order-5 solution (FSAL).
    ynew = ytmp;
    double err = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
      double ei = 0.0;
      for (int j = 0; j < 7; ++j) ei += kE[j] * k[j][i];
      double sc = tol + tol * std::max(std::abs(y[i]), std::abs(ynew[i]));
      double r = h * ei / sc;
      err += r * r;
    }
    err = std::sqrt(err / m);

    if (err <= 1.0) {
      s += dir * h;
      y = ynew;
      k[0] = k[6];  // FSAL
      res.samples.push_back({s, y, k[0]});
      err_prev = std::max(err, 1e-10);
      if (halt && halt(res.samples.back())) {
        res.status = TraceStatus::LeftDomain;
        return res;
      }
      if (std::abs(s1 - s) <= 1e-14 * (1.0 + std::abs(s1))) return res;
    }
    double fac = 0.9 * std::pow(std::max(err, 1e-10), -0.2) * std::pow(err_prev, 0.04);
    h *= std::clamp(fac, 0.2, 5.0);
  }
  res.status = TraceStatus::MaxSteps;
  return res;
}

// Right-hand side of the bicharacteristic system on (X, Xi) packed as 2n.
Rhs ray_rhs(const CoefficientField& field) {
  const int n = field.dim;
  return [&field, n](double, const State& y, State& dy) {
    Vec X{}, Xi{};
    for (int j = 0; j < n; ++j) {
      X[j] = y[j];
      Xi[j] = y[n + j];
    }
    Mat A = field.eval(X);
    Vec v = matvec(A, Xi, n);
    for (int j = 0; j < n; ++j) dy[j] = 2.0 * v[j];
    for (int j = 0; j < n; ++j) dy[n + j] = 0.0;
    for (int kk = 0; kk < n; ++kk)
      for (int l = 0; l < n; ++l) {
        Vec g = field.grad_entry(kk, l, X);
        for (int j = 0; j < n; ++j) dy[n + j] -= g[j] * Xi[kk] * Xi[l];
      }
  };
}

RaySample to_ray_sample(const OdeSample& os, int n) {
  RaySample r;
  r.s = os.s;
  for (int j = 0; j < n; ++j) {
    r.X[j] = os.y[j];
    r.Xi[j] = os.y[n + j];
    r.dX[j] = os.dy[j];
    r.dXi[j] = os.dy[n + j];
  }
  return r;
}

RaySample hermite(const RaySample& a, const RaySample& b, double s, int n) {
  double w = b.s - a.s;
  if (w == 0.0) return a;
  double t = (s - a.s) / w;
  double h00 = (1 + 2 * t) * (1 - t) * (1 - t);
  double h10 = t * (1 - t) * (1 - t);
  double h01 = t * t * (3 - 2 * t);
  double h11 = t * t * (t - 1);
  double d00 = 6 * t * (t - 1) / w;
  double d10 = (1 - t) * (1 - 3 * t);
  double d01 = -6 * t * (t - 1) / w;
  double d11 = t * (3 * t - 2);
  RaySample r;
  r.s = s;
  for (int j = 0; j < n; ++j) {
    r.X[j] = h00 * a.X[j] + w * h10 * a.dX[j] + h01 * b.X[j] + w * h11 * b.dX[j];
    r.Xi[j] = h00 * a.Xi[j] + w * h10 * a.dXi[j] + h01 * b.Xi[j] + w * h11 * b.dXi[j];
    r.dX[j] = d00 * a.X[j] + d10 * a.dX[j] + d01 * b.X[j] + d11 * b.dX[j];
    r.dXi[j] = d00 * a.Xi[j] + d10 * a.dXi[j] + d01 * b.Xi[j] + d11 * b.dXi[j];
  }
  return r;
}

}  // namespace

double hamiltonian(const CoefficientField& field, const PhasePoint& p) {
  return field.hamiltonian(p.x, p.xi);
}

double radial_speed(const CoefficientField& field, const Vec& X, const Vec& Xi) {
  Mat A = field.eval(X);
  return 4.0 * dot(X, matvec(A, Xi, field.dim), field.dim);
}

double RayTrajectory::h2_relative_drift() const {
  if (h2_values.empty()) return 0.0;
  double h0 = h2_values.front();
  // Null covectors have h2 = 0; normalize by the seed's covector scale then.
  double denom = std::max(std::abs(h0), norm2(seed.xi, dim));
  if (denom == 0.0) denom = 1.0;
  double worst = 0.0;
  for (double h : h2_values) worst = std::max(worst, std::abs(h - h0));
  return worst / denom;
}

RaySample RayTrajectory::interpolate(double s) const {
  if (samples.empty()) throw ArgumentError("interpolate: empty trajectory");
  if (s <= samples.front().s) return samples.front();
  if (s >= samples.back().s) return samples.back();
  auto it = std::lower_bound(samples.begin(), samples.end(), s,
                             [](const RaySample& a, double v) { return a.s < v; });
  const RaySample& b = *it;
  const RaySample& a = *(it - 1);
  return hermite(a, b, s, dim);
}

RayTrajectory trace_ray(const CoefficientField& field, const PhasePoint& seed,
                        double s_min, double s_max, const TraceOptions& opt) {
  const int n = field.dim;
  if (norm2(seed.xi, n) == 0.0) throw ArgumentError("trace_ray: zero covector seed");
  if (s_min > 0.0 || s_max < 0.0)
    throw ArgumentError("trace_ray: span must contain 0");

  State y0(2 * n);
  for (int j = 0; j < n; ++j) {
    y0[j] = seed.x[j];
    y0[n + j] = seed.xi[j];
  }
  Rhs f = ray_rhs(field);
  auto halt = [&](const OdeSample& os) {
    Vec X{};
    for (int j = 0; j < n; ++j) X[j] = os.y[j];
    double r = norm(X, n);
    if (r > opt.domain_radius) return true;
    if (opt.stop_radius && r >= *opt.stop_radius) {
      Vec Xi{};
      for (int j = 0; j < n; ++j) Xi[j] = os.y[n + j];
      if (radial_speed(field, X, Xi) >= 0.0) return true;
    }
    return false;
  };

  RayTrajectory traj;
  traj.dim = n;
  traj.seed = seed;
  traj.field_ref = field.id;
  traj.tol = opt.tol;

  std::vector<RaySample> backward;
  if (s_min < 0.0) {
    OdeResult back = integrate(f, y0, 0.0, s_min, opt.tol, opt.max_steps, halt);
    if (back.status != TraceStatus::Complete) traj.status = back.status;
    for (std::size_t i = back.samples.size(); i-- > 1;)
      backward.push_back(to_ray_sample(back.samples[i], n));
  }
  OdeResult fwd = integrate(f, y0, 0.0, s_max, opt.tol, opt.max_steps, halt);
  if (fwd.status != TraceStatus::Complete) traj.status = fwd.status;

  traj.samples = std::move(backward);
  for (const auto& os : fwd.samples) traj.samples.push_back(to_ray_sample(os, n));
  traj.h2_values.reserve(traj.samples.size());
  for (const auto& smp : traj.samples)
    traj.h2_values.push_back(field.hamiltonian(smp.X, smp.Xi));
  return traj;
}

PhasePoint flow_point(const CoefficientField& field, const PhasePoint& seed, double s,
                      const TraceOptions& opt) {
  RayTrajectory t = trace_ray(field, seed, std::min(0.0, s), std::max(0.0, s), opt);
  const RaySample& last = (s >= 0.0) ? t.samples.back() : t.samples.front();
  return PhasePoint{last.X, last.Xi};
}

std::pair<double, double> homogeneity_check(const CoefficientField& field,
                                            const PhasePoint& seed, double t, double s,
                                            const TraceOptions& opt) {
  if (!(t > 0.0)) throw ArgumentError("homogeneity_check: t must be positive");
  PhasePoint scaled{seed.x, scale(seed.xi, t, field.dim)};
  PhasePoint lhs = flow_point(field, scaled, s, opt);
  PhasePoint rhs = flow_point(field, seed, t * s, opt);
  double rx = norm(sub(lhs.x, rhs.x, field.dim), field.dim);
  double rxi = norm(sub(lhs.xi, scale(rhs.xi, t, field.dim), field.dim), field.dim);
  return {rx, rxi};
}

double along_flow_derivative(const CoefficientField& field,
                             const std::function<Complex(const Vec&, const Vec&)>& phi,
                             const PhasePoint& p, double h, const TraceOptions& opt) {
  if (!(h > 0.0)) throw ArgumentError("along_flow_derivative: h must be positive");
  PhasePoint fwd = flow_point(field, p, h, opt);
  PhasePoint back = flow_point(field, p, -h, opt);
  Complex d = (phi(fwd.x, fwd.xi) - phi(back.x, back.xi)) / (2.0 * h);
  return d.real();
}

std::optional<double> escape_time(const CoefficientField& field,
                                  const RayTrajectory& traj, double M1) {
  const int n = traj.dim;
  auto outgoing = [&](const RaySample& smp) {
    return norm(smp.X, n) >= M1 && radial_speed(field, smp.X, smp.Xi) >= 0.0;
  };
  double prev_s = 0.0;
  bool have_prev = false;
  for (const RaySample& smp : traj.samples) {
    if (smp.s < 0.0) continue;
    if (outgoing(smp)) {
      if (!have_prev) return smp.s;  // condition holds at the first s >= 0
      // Earliest point in (prev_s, smp.s] where the condition turns on.
      double lo = prev_s, hi = smp.s;
      while (hi - lo > traj.tol) {
        double mid = 0.5 * (lo + hi);
        if (outgoing(traj.interpolate(mid)))
          hi = mid;
        else
          lo = mid;
      }
      return hi;
    }
    prev_s = smp.s;
    have_prev = true;
  }
  return std::nullopt;
}

double DyadicOccupation::ratio(int k) const {
  for (const auto& [key, v] : measures)
    if (key == k) return v / std::pow(2.0, k);
  return 0.0;
}

double DyadicOccupation::max_ratio() const {
  double worst = 0.0;
  for (const auto& [k, v] : measures) worst = std::max(worst, v / std::pow(2.0, k));
  return worst;
}

DyadicOccupation dyadic_occupation(const RayTrajectory& traj, double s0) {
  DyadicOccupation occ;
  if (s0 <= 0.0 || traj.samples.empty()) return occ;
  const int n = traj.dim;
  std::vector<std::pair<int, double>>& bins = occ.measures;
  auto deposit = [&](int k, double dt) {
    for (auto& [key, v] : bins)
      if (key == k) {
        v += dt;
        return;
      }
    bins.emplace_back(k, dt);
  };
  // Subdivide each inter-sample interval; within each sub-interval treat the
  // radius as linear in s and split the time across the dyadic shells the
  // radius range touches, in proportion to radius covered.
  constexpr int kSub = 8;
  auto deposit_span = [&](double r_lo, double r_hi, double dt) {
    if (r_hi < r_lo) std::swap(r_lo, r_hi);
    if (r_hi <= 0.0) return;
    r_lo = std::max(r_lo, 1e-300);
    if (r_hi - r_lo < 1e-12 * r_hi) {
      deposit(static_cast<int>(std::floor(std::log2(0.5 * (r_lo + r_hi)))), dt);
      return;
    }
    int k_lo = static_cast<int>(std::floor(std::log2(r_lo)));
    int k_hi = static_cast<int>(std::floor(std::log2(r_hi)));
    for (int k = k_lo; k <= k_hi; ++k) {
      double shell_lo = std::max(r_lo, std::pow(2.0, k));
      double shell_hi = std::min(r_hi, std::pow(2.0, k + 1));
      if (shell_hi > shell_lo) deposit(k, dt * (shell_hi - shell_lo) / (r_hi - r_lo));
    }
  };
  for (std::size_t i = 1; i < traj.samples.size(); ++i) {
    const RaySample& a = traj.samples[i - 1];
    const RaySample& b = traj.samples[i];
    if (b.s <= 0.0) continue;
    double lo = std::max(a.s, 0.0);
    double hi = std::min(b.s, s0);
    if (hi <= lo) continue;
    double dt = (hi - lo) / kSub;
    double r_prev = norm(traj.interpolate(lo).X, n);
    for (int q = 1; q <= kSub; ++q) {
      double r_next = norm(traj.interpolate(lo + q * dt).X, n);
      deposit_span(r_prev, r_next, dt);
      r_prev = r_next;
    }
  }
  std::sort(bins.begin(), bins.end());
  return occ;
}

std::vector<SeedVerdict> nontrapping_probe(const CoefficientField& field,
                                           const std::vector<PhasePoint>& seeds,
                                           double mu, double s_max, double tol) {
  std::vector<SeedVerdict> out(seeds.size());
  parallel_for(seeds.size(), [&](std::size_t i) {
    SeedVerdict v;
    v.seed = seeds[i];
    try {
      TraceOptions opt;
      opt.tol = tol;
      RayTrajectory traj = trace_ray(field, seeds[i], 0.0, s_max, opt);
      const int n = field.dim;
      double prev_s = 0.0;
      for (const RaySample& smp : traj.samples) {
        if (norm(smp.X, n) >= mu) {
          double lo = prev_s, hi = smp.s;
          while (hi - lo > tol && hi > lo) {
            double mid = 0.5 * (lo + hi);
            if (norm(traj.interpolate(mid).X, n) >= mu)
              hi = mid;
            else
              lo = mid;
          }
          v.escaped = true;
          v.escape_s = hi;
          break;
        }
        prev_s = smp.s;
      }
    } catch (const std::exception& e) {
      v.error = e.what();
    }
    out[i] = v;
  });
  return out;
}

std::vector<std::vector<double>> flow_jacobian(const CoefficientField& field,
                                               const PhasePoint& seed, double s,
                                               double tol) {
  const int n = field.dim;
  const int d = 2 * n;
  if (norm2(seed.xi, n) == 0.0) throw ArgumentError("flow_jacobian: zero covector seed");
  // Augmented state: (X, Xi) followed by the 2n x 2n variational matrix in
  // row-major order; J' = DF(X, Xi) J.
  State y0(d + d * d, 0.0);
  for (int j = 0; j < n; ++j) {
    y0[j] = seed.x[j];
    y0[n + j] = seed.xi[j];
  }
  for (int j = 0; j < d; ++j) y0[d + j * d + j] = 1.0;

  Rhs f = [&field, n, d](double, const State& y, State& dy) {
    Vec X{}, Xi{};
    for (int j = 0; j < n; ++j) {
      X[j] = y[j];
      Xi[j] = y[n + j];
    }
    Mat A = field.eval(X);
    Vec v = matvec(A, Xi, n);
    for (int j = 0; j < n; ++j) dy[j] = 2.0 * v[j];
    std::array<std::array<Vec, kMaxDim>, kMaxDim> g;
    std::array<std::array<Mat, kMaxDim>, kMaxDim> hess;
    for (int kk = 0; kk < n; ++kk)
      for (int l = kk; l < n; ++l) {
        g[kk][l] = field.grad_entry(kk, l, X);
        g[l][kk] = g[kk][l];
        hess[kk][l] = field.hessian_entry(kk, l, X);
        hess[l][kk] = hess[kk][l];
      }
    for (int j = 0; j < n; ++j) {
      double acc = 0.0;
      for (int kk = 0; kk < n; ++kk)
        for (int l = 0; l < n; ++l) acc += g[kk][l][j] * Xi[kk] * Xi[l];
      dy[n + j] = -acc;
    }
    // DF blocks.
    std::array<std::array<double, 2 * kMaxDim>, 2 * kMaxDim> DF{};
    for (int i = 0; i < n; ++i)
      for (int m = 0; m < n; ++m) {
        double dxm = 0.0;
        for (int kk = 0; kk < n; ++kk) dxm += g[i][kk][m] * Xi[kk];
        DF[i][m] = 2.0 * dxm;
        DF[i][n + m] = 2.0 * A(i, m);
      }
    for (int j = 0; j < n; ++j)
      for (int m = 0; m < n; ++m) {
        double hxx = 0.0;
        for (int kk = 0; kk < n; ++kk)
          for (int l = 0; l < n; ++l) hxx += hess[kk][l](j, m) * Xi[kk] * Xi[l];
        DF[n + j][m] = -hxx;
        double hxxi = 0.0;
        for (int l = 0; l < n; ++l) hxxi += g[m][l][j] * Xi[l];
        DF[n + j][n + m] = -2.0 * hxxi;
      }
    for (int r = 0; r < d; ++r)
      for (int c = 0; c < d; ++c) {
        double acc = 0.0;
        for (int q = 0; q < d; ++q) acc += DF[r][q] * y[d + q * d + c];
        dy[d + r * d + c] = acc;
      }
  };

  OdeResult res = integrate(f, y0, 0.0, s, tol, 1000000);
  if (res.status == TraceStatus::MaxSteps)
    throw LabError("flow_jacobian: step budget exceeded");
  const State& yf = res.samples.back().y;
  std::vector<std::vector<double>> J(d, std::vector<double>(d));
  for (int r = 0; r < d; ++r)
    for (int c = 0; c < d; ++c) J[r][c] = yf[d + r * d + c];
  return J;
}

JacobianGrowthReport jacobian_growth_report(const CoefficientField& field, double R,
                                            const std::vector<PhasePoint>& seeds,
                                            const std::vector<double>& s_grid,
                                            double tol) {
  JacobianGrowthReport rep;
  rep.R = R;
  rep.rows.resize(s_grid.size());
  parallel_for(s_grid.size(), [&](std::size_t i) {
    double s = s_grid[i];
    double worst = 0.0;
    for (const PhasePoint& seed : seeds) {
      auto J = flow_jacobian(field, seed, s, tol);
      for (const auto& row : J)
        for (double v : row) worst = std::max(worst, std::abs(v));
    }
    rep.rows[i] = JacobianGrowthRow{s, worst, worst / (1.0 + 2.0 * std::abs(s))};
  });
  for (const auto& row : rep.rows) rep.fitted_c = std::max(rep.fitted_c, row.affine_ratio);
  // Fit the log-log slope over the later half of the grid; an affine-in-s
  // envelope gives slope <= 1 there.
  std::vector<std::pair<double, double>> pts;
  for (const auto& row : rep.rows)
    if (row.s > 0.0 && row.max_entry > 0.0)
      pts.emplace_back(std::log(row.s), std::log(row.max_entry));
  if (pts.size() >= 4) {
    std::size_t half = pts.size() / 2;
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    std::size_t cnt = pts.size() - half;
    for (std::size_t i = half; i < pts.size(); ++i) {
      sx += pts[i].first;
      sy += pts[i].second;
      sxx += pts[i].first * pts[i].first;
      sxy += pts[i].first * pts[i].second;
    }
    double denom = cnt * sxx - sx * sx;
    if (std::abs(denom) > 1e-12) {
      double slope = (cnt * sxy - sx * sy) / denom;
      rep.superlinear_flag = slope > 1.2;
    }
  }
  return rep;
}

namespace {

double adaptive_simpson(const std::function<double(double)>& f, double a, double b,
                        double fa, double fm, double fb, double whole, double tol,
                        int depth) {
  double m = 0.5 * (a + b);
  double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
  double flm = f(lm), frm = f(rm);
  double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
  double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
  if (depth <= 0 || std::abs(left + right - whole) <= 15.0 * tol)
    return left + right + (left + right - whole) / 15.0;
  return adaptive_simpson(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1) +
         adaptive_simpson(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1);
}

double simpson(const std::function<double(double)>& f, double a, double b, double tol) {
  double fa = f(a), fb = f(b), fm = f(0.5 * (a + b));
  double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
  return adaptive_simpson(f, a, b, fa, fm, fb, whole, tol, 40);
}

}  // namespace

MizohataResult mizohata_integral(const std::function<Vec(const Vec&)>& im_b1,
                                 const Vec& x, const Vec& omega, int dim,
                                 double r_max, double tol) {
  if (std::abs(norm(omega, dim) - 1.0) > 1e-9)
    throw ArgumentError("mizohata_integral: omega must be a unit vector");
  auto integrand = [&](double r) {
    Vec p = add(x, scale(omega, r, dim), dim);
    return dot(im_b1(p), omega, dim);
  };
  MizohataResult out;
  double total = 0.0;
  double last_octave = 0.0;
  double a = 0.0, b = std::min(1.0, r_max);
  for (;;) {
    double piece = simpson(integrand, a, b, tol);
    total += piece;
    last_octave = std::abs(piece);
    if (std::abs(total) > 1e6 && last_octave > 0.01 * std::abs(total)) {
      out.diverged = true;
      out.value = total;
      out.tail_estimate = last_octave;
      return out;
    }
    if (b >= r_max) break;
    a = b;
    b = std::min(2.0 * b, r_max);
  }
  out.value = total;
  out.tail_estimate = last_octave;
  return out;
}

FlowIntegral integrate_along_flow(
    const CoefficientField& field, const PhasePoint& seed, double s_end,
    const std::function<double(const Vec&, const Vec&)>& g,
    const std::function<bool(const Vec&, const Vec&)>& halt, double tol,
    std::size_t max_steps) {
  const int n = field.dim;
  if (norm2(seed.xi, n) == 0.0)
    throw ArgumentError("integrate_along_flow: zero covector seed");
  State y0(2 * n + 1, 0.0);
  for (int j = 0; j < n; ++j) {
    y0[j] = seed.x[j];
    y0[n + j] = seed.xi[j];
  }
  Rhs base = ray_rhs(field);
  Rhs f = [&field, base, &g, n](double s, const State& y, State& dy) {
    base(s, y, dy);
    Vec X{}, Xi{};
    for (int j = 0; j < n; ++j) {
      X[j] = y[j];
      Xi[j] = y[n + j];
    }
    dy[2 * n] = g(X, Xi);
  };
  std::function<bool(const OdeSample&)> stop;
  if (halt)
    stop = [&halt, n](const OdeSample& os) {
      Vec X{}, Xi{};
      for (int j = 0; j < n; ++j) {
        X[j] = os.y[j];
        Xi[j] = os.y[n + j];
      }
      return halt(X, Xi);
    };
  OdeResult res = integrate(f, y0, 0.0, s_end, tol, max_steps, stop);
  FlowIntegral out;
  out.value = res.samples.back().y[2 * n];
  out.s_stop = res.samples.back().s;
  out.halted = res.status == TraceStatus::LeftDomain;
  if (res.status == TraceStatus::MaxSteps)
    throw LabError("integrate_along_flow: step budget exceeded");
  return out;
}

namespace {

// One RK4 step of the ray system with the integral of g carried along.
void rk4_step(const Rhs& f, double& s, State& y, double h, State& k1, State& k2,
              State& k3, State& k4, State& tmp) {
  const std::size_t m = y.size();
  f(s, y, k1);
  for (std::size_t i = 0; i < m; ++i) tmp[i] = y[i] + 0.5 * h * k1[i];
  f(s + 0.5 * h, tmp, k2);
  for (std::size_t i = 0; i < m; ++i) tmp[i] = y[i] + 0.5 * h * k2[i];
  f(s + 0.5 * h, tmp, k3);
  for (std::size_t i = 0; i < m; ++i) tmp[i] = y[i] + h * k3[i];
  f(s + h, tmp, k4);
  for (std::size_t i = 0; i < m; ++i)
    y[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
  s += h;
}

}  // namespace

double integrate_along_flow_fixed(const CoefficientField& field, const PhasePoint& seed,
                                  double s_end, int steps,
                                  const std::function<double(const Vec&, const Vec&)>& g) {
  const int n = field.dim;
  if (steps <= 0) throw ArgumentError("integrate_along_flow_fixed: steps must be positive");
  State y(2 * n + 1, 0.0);
  for (int j = 0; j < n; ++j) {
    y[j] = seed.x[j];
    y[n + j] = seed.xi[j];
  }
  Rhs base = ray_rhs(field);
  Rhs f = [&field, base, &g, n](double s, const State& yy, State& dy) {
    base(s, yy, dy);
    Vec X{}, Xi{};
    for (int j = 0; j < n; ++j) {
      X[j] = yy[j];
      Xi[j] = yy[n + j];
    }
    dy[2 * n] = g(X, Xi);
  };
  double s = 0.0;
  double h = s_end / steps;
  State k1(y.size()), k2(y.size()), k3(y.size()), k4(y.size()), tmp(y.size());
  for (int i = 0; i < steps; ++i) rk4_step(f, s, y, h, k1, k2, k3, k4, tmp);
  return y[2 * n];
}

PhasePoint flow_point_fixed(const CoefficientField& field, const PhasePoint& seed,
                            double s_end, int steps) {
  const int n = field.dim;
  if (steps <= 0) throw ArgumentError("flow_point_fixed: steps must be positive");
  State y(2 * n, 0.0);
  for (int j = 0; j < n; ++j) {
    y[j] = seed.x[j];
    y[n + j] = seed.xi[j];
  }
  Rhs f = ray_rhs(field);
  double s = 0.0;
  double h = s_end / steps;
  State k1(y.size()), k2(y.size()), k3(y.size()), k4(y.size()), tmp(y.size());
  for (int i = 0; i < steps; ++i) rk4_step(f, s, y, h, k1, k2, k3, k4, tmp);
  PhasePoint p;
  for (int j = 0; j < n; ++j) {
    p.x[j] = y[j];
    p.xi[j] = y[n + j];
  }
  return p;
}

double escape_quadratic_constant(const CoefficientField& field,
                                 const RayTrajectory& traj, double s0, double M1) {
  (void)field;
  const int n = traj.dim;
  double c2 = std::numeric_limits<double>::infinity();
  for (const RaySample& smp : traj.samples) {
    if (smp.s <= s0) continue;
    double excess = norm2(smp.X, n) - M1 * M1;
    double denom = (smp.s - s0) * (smp.s - s0);
    c2 = std::min(c2, excess / denom);
  }
  if (!std::isfinite(c2)) return 0.0;
  return std::max(c2, 0.0);
}

}  // namespace schrodlab
