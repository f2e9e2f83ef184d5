#include "schrodlab/evolve.hpp"

#include <algorithm>

namespace schrodlab {

namespace {

GridField conj_field(const GridField& u) {
  GridField r = zero_field(u.grid);
  for (std::size_t i = 0; i < r.values.size(); ++i) r.values[i] = std::conj(u.values[i]);
  return r;
}

void axpy(GridField& y, Complex a, const GridField& x) {
  for (std::size_t i = 0; i < y.values.size(); ++i) y.values[i] += a * x.values[i];
  y.spectral_cache.reset();
}

GridField axis_derivative(const GridField& u, int axis) {
  std::array<int, kMaxDim> alpha{};
  alpha[axis] = 1;
  return spectral_derivative(u, alpha);
}

// Divergence-form L u = sum_j d_j (a_jk d_k u) with the coefficient values
// pre-sampled on the nodes.
struct OperatorKernel {
  const LinearOperatorSpec* spec = nullptr;
  BoxGrid grid;
  std::array<std::array<std::vector<double>, kMaxDim>, kMaxDim> coeff;
  std::array<std::array<std::vector<Complex>, kMaxDim>, 2> lower;  // b1_coeff, b2

  OperatorKernel(const LinearOperatorSpec& s, const BoxGrid& g) : spec(&s), grid(g) {
    int n = g.dim;
    for (int j = 0; j < n; ++j)
      for (int k = j; k < n; ++k) {
        std::vector<double> vals(g.total());
        for (std::size_t i = 0; i < vals.size(); ++i)
          vals[i] = s.field.entry[j][k](g.node(i));
        coeff[j][k] = vals;
        if (k != j) coeff[k][j] = std::move(vals);
      }
    for (int j = 0; j < n; ++j) {
      if (s.b1_differential && s.b1_coeff[j]) {
        lower[0][j].resize(g.total());
        for (std::size_t i = 0; i < g.total(); ++i)
          lower[0][j][i] = s.b1_coeff[j](g.node(i));
      }
      if (s.has_b2 && s.b2[j]) {
        lower[1][j].resize(g.total());
        for (std::size_t i = 0; i < g.total(); ++i)
          lower[1][j][i] = s.b2[j](g.node(i));
      }
    }
  }

  GridField rhs(double t, const GridField& u) const {
    int n = grid.dim;
    // i * l_sign * L u.
    std::array<GridField, kMaxDim> du;
    for (int k = 0; k < n; ++k) du[k] = axis_derivative(u, k);
    GridField r = zero_field(grid);
    for (int j = 0; j < n; ++j) {
      GridField wj = zero_field(grid);
      for (int k = 0; k < n; ++k)
        for (std::size_t i = 0; i < wj.values.size(); ++i)
          wj.values[i] += coeff[j][k][i] * du[k].values[i];
      axpy(r, Complex(0.0, spec->l_sign), axis_derivative(wj, j));
    }

    if (spec->b1) {
      if (spec->b1_differential) {
        for (int j = 0; j < n; ++j)
          if (!lower[0][j].empty())
            for (std::size_t i = 0; i < r.values.size(); ++i)
              r.values[i] += lower[0][j][i] * du[j].values[i];
      } else {
        axpy(r, 1.0, apply_pdo(*spec->b1, u));
      }
    }

    GridField ub;
    bool need_conj = spec->has_b2 || spec->c2.has_value();
    if (need_conj) ub = conj_field(u);

    if (spec->has_b2)
      for (int j = 0; j < n; ++j)
        if (!lower[1][j].empty()) {
          GridField dub = axis_derivative(ub, j);
          for (std::size_t i = 0; i < r.values.size(); ++i)
            r.values[i] += lower[1][j][i] * dub.values[i];
        }

    if (spec->c1) axpy(r, 1.0, apply_pdo(*spec->c1, u));
    if (spec->c2) axpy(r, 1.0, apply_pdo(*spec->c2, ub));
    if (spec->forcing) axpy(r, 1.0, spec->forcing(t));
    r.spectral_cache.reset();
    return r;
  }
};

bool finite(const GridField& u) {
  for (const Complex& v : u.values)
    if (!std::isfinite(v.real()) || !std::isfinite(v.imag())) return false;
  return true;
}

double fit_log_slope(const std::vector<double>& t, const std::vector<double>& y) {
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  int m = 0;
  for (std::size_t i = 0; i < t.size(); ++i) {
    if (y[i] <= 0.0) continue;
    double ly = std::log(y[i]);
    sx += t[i];
    sy += ly;
    sxx += t[i] * t[i];
    sxy += t[i] * ly;
    ++m;
  }
  double den = m * sxx - sx * sx;
  return (m >= 2 && den > 0.0) ? (m * sxy - sx * sy) / den : 0.0;
}

// Tiny dense least squares (normal equations + Tikhonov), m <= 8.
std::vector<double> least_squares(const std::vector<std::vector<double>>& A,
                                  const std::vector<double>& y) {
  std::size_t m = A.empty() ? 0 : A[0].size();
  std::vector<std::vector<double>> M(m, std::vector<double>(m + 1, 0.0));
  for (std::size_t r = 0; r < A.size(); ++r)
    for (std::size_t i = 0; i < m; ++i) {
      for (std::size_t j = 0; j < m; ++j) M[i][j] += A[r][i] * A[r][j];
      M[i][m] += A[r][i] * y[r];
    }
  for (std::size_t i = 0; i < m; ++i) M[i][i] += 1e-12 * (1.0 + M[i][i]);
  for (std::size_t col = 0; col < m; ++col) {
    std::size_t piv = col;
    for (std::size_t r = col + 1; r < m; ++r)
      if (std::abs(M[r][col]) > std::abs(M[piv][col])) piv = r;
    std::swap(M[col], M[piv]);
    for (std::size_t r = 0; r < m; ++r) {
      if (r == col || M[col][col] == 0.0) continue;
      double f = M[r][col] / M[col][col];
      for (std::size_t j = col; j <= m; ++j) M[r][j] -= f * M[col][j];
    }
  }
  std::vector<double> x(m, 0.0);
  for (std::size_t i = 0; i < m; ++i)
    if (M[i][i] != 0.0) x[i] = M[i][m] / M[i][i];
  return x;
}

double pair_h2(GainVariant variant, const Vec& xi, int dim) {
  return variant == GainVariant::Ultrahyperbolic ? xi[0] * xi[1] : norm2(xi, dim);
}

// u_hat(xi, t) from the closed-form 2x2 propagator of the (xi, -xi) modes
// of (u, conj u) under dt v = -i h2 v - xi_1 w, dt w = xi_1 v + i h2 w.
std::vector<Complex> pair_spectrum_at(GainVariant variant, const BoxGrid& g,
                                      const std::vector<Complex>& s0, double t,
                                      bool with_coupling) {
  std::vector<Complex> st(s0.size());
  int N = g.points_per_axis;
  for (std::size_t k = 0; k < s0.size(); ++k) {
    if (g.is_nyquist(k)) {
      st[k] = Complex(0.0, 0.0);
      continue;
    }
    Vec xi = g.freq(k);
    double h2 = pair_h2(variant, xi, g.dim);
    if (!with_coupling) {
      st[k] = s0[k] * std::polar(1.0, -h2 * t);
      continue;
    }
    std::array<int, kMaxDim> idx = g.unflatten(k), nidx{};
    for (int a = 0; a < g.dim; ++a) nidx[a] = (N - idx[a]) % N;
    Complex v0 = s0[k];
    Complex w0 = std::conj(s0[g.flatten(nidx)]);
    double omega = std::sqrt(h2 * h2 + xi[0] * xi[0]);
    double c = std::cos(omega * t);
    double s = omega < 1e-14 ? t : std::sin(omega * t) / omega;
    st[k] = c * v0 + s * (Complex(0.0, -h2) * v0 - xi[0] * w0);
  }
  return st;
}

}  // namespace

// Owns a spec copy so the kernel's coefficient samples stay valid.
struct LinearRhs::Impl {
  LinearOperatorSpec spec;
  OperatorKernel kernel;
  Impl(const LinearOperatorSpec& s, const BoxGrid& g) : spec(s), kernel(spec, g) {}
};

LinearRhs::LinearRhs(const LinearOperatorSpec& spec, const BoxGrid& grid)
    : impl_(std::make_shared<Impl>(spec, grid)) {}

GridField LinearRhs::operator()(double t, const GridField& u) const {
  return impl_->kernel.rhs(t, u);
}

void set_differential_b1(LinearOperatorSpec& spec,
                         std::array<std::function<Complex(const Vec&)>, kMaxDim> beta) {
  int dim = spec.field.dim;
  auto shared = std::make_shared<decltype(beta)>(std::move(beta));
  Symbol s;
  s.dim = dim;
  s.order_m = 1.0;
  s.parity = Parity::Odd;
  s.class_tag = "classical";
  s.evaluate = [shared, dim](const Vec& x, const Vec& xi) {
    Complex acc(0.0, 0.0);
    for (int j = 0; j < dim; ++j)
      if ((*shared)[j]) acc += (*shared)[j](x) * Complex(0.0, xi[j]);
    return acc;
  };
  spec.b1 = std::move(s);
  spec.b1_differential = true;
  spec.b1_coeff = *shared;
}

LinearOperatorSpec conjugate_spec(const LinearOperatorSpec& spec) {
  LinearOperatorSpec c = spec;
  c.l_sign = -spec.l_sign;
  auto conj_symbol = [](const Symbol& s) {
    Symbol r = s;
    auto inner = s.evaluate;
    int dim = s.dim;
    r.evaluate = [inner, dim](const Vec& x, const Vec& xi) {
      return std::conj(inner(x, scale(xi, -1.0, dim)));
    };
    return r;
  };
  if (spec.b1) c.b1 = conj_symbol(*spec.b1);
  if (spec.b1_differential)
    for (int j = 0; j < kMaxDim; ++j)
      if (spec.b1_coeff[j]) {
        auto f = spec.b1_coeff[j];
        c.b1_coeff[j] = [f](const Vec& x) { return std::conj(f(x)); };
      }
  if (spec.has_b2)
    for (int j = 0; j < kMaxDim; ++j)
      if (spec.b2[j]) {
        auto f = spec.b2[j];
        c.b2[j] = [f](const Vec& x) { return std::conj(f(x)); };
      }
  if (spec.c1) c.c1 = conj_symbol(*spec.c1);
  if (spec.c2) c.c2 = conj_symbol(*spec.c2);
  if (spec.forcing) {
    auto f = spec.forcing;
    c.forcing = [f](double t) { return conj_field(f(t)); };
  }
  return c;
}

double stable_dt(const BoxGrid& grid, const LinearOperatorSpec& spec) {
  int n = grid.dim;
  double xi_axis = grid.freq_spacing() * (grid.points_per_axis / 2);
  double xi_max = xi_axis * std::sqrt(static_cast<double>(n));

  // Coarse spatial probe set.
  std::vector<Vec> probes;
  int side = 5;
  std::vector<Vec> dirs = sphere_directions(n, 8);
  for (int i = 0; i < side; ++i) {
    double x = -grid.half_length + 2.0 * grid.half_length * i / (side - 1);
    for (int j = 0; j < (n > 1 ? side : 1); ++j) {
      double y = n > 1 ? -grid.half_length + 2.0 * grid.half_length * j / (side - 1) : 0.0;
      probes.push_back(n > 2 ? vec3(x, y, 0.0) : (n > 1 ? vec2(x, y) : vec1(x)));
    }
  }

  double nu = spec.field.nu;
  for (const Vec& x : probes) {
    Mat A = spec.field.eval(x);
    double row = 0.0;
    for (int j = 0; j < n; ++j) {
      double s = 0.0;
      for (int k = 0; k < n; ++k) s += std::abs(A(j, k));
      row = std::max(row, s);
    }
    nu = std::max(nu, row);
  }

  double B1 = 0.0, C0 = 1.0;
  for (const Vec& x : probes) {
    if (spec.b1)
      for (const Vec& d : dirs)
        B1 = std::max(B1, std::abs(spec.b1->evaluate(x, scale(d, xi_max, n))) / xi_max);
    if (spec.has_b2) {
      double s = 0.0;
      for (int j = 0; j < n; ++j)
        if (spec.b2[j]) s += std::abs(spec.b2[j](x));
      B1 = std::max(B1, s);
    }
    for (const Vec& d : dirs) {
      double s = 0.0;
      if (spec.c1) s += std::abs(spec.c1->evaluate(x, scale(d, xi_max, n)));
      if (spec.c2) s += std::abs(spec.c2->evaluate(x, scale(d, xi_max, n)));
      C0 = std::max(C0, s);
    }
  }
  return 2.5 / (nu * xi_max * xi_max + B1 * xi_max + C0);
}

EvolutionTrace evolve_linear(const GridField& u0, const LinearOperatorSpec& spec,
                             double T, const EvolveConfig& cfg) {
  if (T <= 0.0) throw ArgumentError("evolution horizon must be positive");
  const BoxGrid& g = u0.grid;
  double dt = cfg.dt > 0.0 ? cfg.dt : stable_dt(g, spec) * cfg.dt_safety;
  long steps = static_cast<long>(std::ceil(T / dt - 1e-12));
  if (steps < 1) steps = 1;
  if (steps > cfg.max_steps) throw ArgumentError("evolution exceeds the step budget");
  dt = T / steps;

  OperatorKernel kernel(spec, g);
  EvolutionTrace trace;
  trace.dt = dt;

  double n0 = l2_norm(u0);
  GridField u = u0;
  auto record = [&](double t, const GridField& f) {
    trace.snapshots.emplace_back(t, f);
    NormRecord r;
    r.t = t;
    r.l2 = l2_norm(f);
    r.hs = weighted_norm(f, cfg.record_s, 0.0);
    r.weighted = weighted_norm(f, 0.0, cfg.record_weight);
    trace.norm_history.push_back(r);
  };
  record(0.0, u);

  double prev_f_sq = 0.0;
  if (spec.forcing) {
    double nf = l2_norm(spec.forcing(0.0));
    prev_f_sq = nf * nf;
  }

  for (long k = 0; k < steps; ++k) {
    double t = k * dt;
    GridField k1 = kernel.rhs(t, u);
    GridField s2 = u;
    axpy(s2, 0.5 * dt, k1);
    GridField k2 = kernel.rhs(t + 0.5 * dt, s2);
    GridField s3 = u;
    axpy(s3, 0.5 * dt, k2);
    GridField k3 = kernel.rhs(t + 0.5 * dt, s3);
    GridField s4 = u;
    axpy(s4, dt, k3);
    GridField k4 = kernel.rhs(t + dt, s4);

    GridField next = u;
    axpy(next, dt / 6.0, k1);
    axpy(next, dt / 3.0, k2);
    axpy(next, dt / 3.0, k3);
    axpy(next, dt / 6.0, k4);

    double t1 = (k + 1) * dt;
    bool ok = finite(next);
    double nn = ok ? l2_norm(next) : 0.0;
    if (!ok || nn > cfg.blowup_factor * std::max(n0, 1.0)) {
      trace.blew_up = true;
      trace.blowup_time = t1;
      if (trace.snapshots.back().first < t) record(t, u);  // last finite state
      break;
    }
    u = std::move(next);

    if (spec.forcing) {
      double nf = l2_norm(spec.forcing(t1));
      trace.forcing_l2_sq += 0.5 * (prev_f_sq + nf * nf) * dt;
      prev_f_sq = nf * nf;
    }
    if ((k + 1) % cfg.stride == 0 || k + 1 == steps) record(t1, u);
  }

  trace.final_boundary = boundary_report(trace.snapshots.back().second);
  return trace;
}

SmoothingRecord smoothing_functional(const EvolutionTrace& trace, double s,
                                     int N_weight,
                                     const std::function<GridField(double)>& forcing) {
  if (trace.snapshots.size() < 3)
    throw ArgumentError("smoothing functional needs at least 3 snapshots");
  SmoothingRecord rec;
  std::size_t m = trace.snapshots.size();
  std::vector<double> w(m), fl(m, 0.0), fw(m, 0.0);
  for (std::size_t i = 0; i < m; ++i) {
    const GridField& u = trace.snapshots[i].second;
    double v = weighted_norm(u, s + 0.5, -0.5 * N_weight);
    w[i] = v * v;
    double hs = weighted_norm(u, s, 0.0);
    rec.sup_hs_sq = std::max(rec.sup_hs_sq, hs * hs);
    if (forcing) {
      GridField f = forcing(trace.snapshots[i].first);
      double a = l2_norm(f), b = weighted_norm(f, s - 0.5, 0.5 * N_weight);
      fl[i] = a * a;
      fw[i] = b * b;
    }
  }
  for (std::size_t i = 0; i + 1 < m; ++i) {
    double dt = trace.snapshots[i + 1].first - trace.snapshots[i].first;
    rec.lhs += 0.5 * (w[i] + w[i + 1]) * dt;
    rec.forcing_l2_sq += 0.5 * (fl[i] + fl[i + 1]) * dt;
    rec.forcing_weighted_sq += 0.5 * (fw[i] + fw[i + 1]) * dt;
  }
  if (!forcing) rec.forcing_l2_sq = trace.forcing_l2_sq;
  double T = trace.snapshots.back().first;
  rec.rhs = (1.0 + T) * rec.sup_hs_sq + rec.forcing_l2_sq;
  rec.rhs_weighted = (1.0 + T) * rec.sup_hs_sq + rec.forcing_weighted_sq;
  if (rec.rhs <= 0.0) {
    rec.degenerate = true;
  } else {
    rec.ratio = rec.lhs / rec.rhs;
    rec.ratio_weighted = rec.rhs_weighted > 0.0 ? rec.lhs / rec.rhs_weighted : 0.0;
  }
  return rec;
}

EnergyHistory k_transform_energy(const EvolutionTrace& trace, const Symbol& k) {
  EnergyHistory h;
  for (const auto& [t, u] : trace.snapshots) {
    h.t.push_back(t);
    h.raw.push_back(l2_norm(u));
    h.transformed.push_back(l2_norm(adjoint_apply(k, u)));
  }
  h.raw_rate = fit_log_slope(h.t, h.raw);
  h.transformed_rate = fit_log_slope(h.t, h.transformed);
  return h;
}

ErrorOperatorReport error_operator_check(const Symbol& k_tilde, const Symbol& k,
                                         const std::vector<GridField>& probes,
                                         const std::vector<double>& sweep_freqs) {
  ErrorOperatorReport rep;
  auto ratio_of = [&](const GridField& u) {
    double nu = l2_norm(u);
    if (nu == 0.0) return 0.0;
    GridField w = apply_pdo(k_tilde, adjoint_apply(k, u));
    GridField e = u;
    for (std::size_t i = 0; i < e.values.size(); ++i) e.values[i] -= w.values[i];
    return l2_norm(e) / nu;
  };
  for (const GridField& u : probes) rep.ratios.push_back(ratio_of(u));
  if (!probes.empty())
    for (double lam : sweep_freqs) {
      GridField m = probes.front();
      for (std::size_t i = 0; i < m.values.size(); ++i) {
        Vec x = m.grid.node(i);
        m.values[i] *= std::polar(1.0, lam * x[0]);
      }
      m.spectral_cache.reset();
      rep.freq_sweep.emplace_back(lam, ratio_of(m));
    }
  return rep;
}

std::vector<GrowthRow> mizohata_blowup_demo(double lambda, double T,
                                            const BoxGrid& grid, int samples,
                                            bool imaginary_b1) {
  double ratio = lambda / grid.freq_spacing();
  if (std::abs(ratio - std::round(ratio)) > 1e-9)
    throw ArgumentError("packet frequency must lie on the lattice");
  if (samples < 1) throw ArgumentError("need at least one sample time");

  int dim = grid.dim;
  GridField u0 = make_field(grid, [lambda, dim](const Vec& x) {
    return std::polar(std::exp(-0.5 * norm2(x, dim)), -lambda * x[0]);
  });
  const std::vector<Complex>& s0 = spectrum(u0);
  double n0 = spectral_l2_norm(grid, s0);

  std::vector<GrowthRow> rows;
  for (int i = 1; i <= samples; ++i) {
    double t = T * i / samples;
    GrowthRow row;
    row.t = t;
    row.reference = std::exp(lambda * t);
    if (!imaginary_b1) {
      row.growth = 1.0;  // phase multiplier e^{-t(i|xi|^2 + i xi_1)}
    } else {
      double acc = 0.0;
      for (std::size_t kidx = 0; kidx < s0.size(); ++kidx) {
        double xi1 = grid.freq(kidx)[0];
        double amp = std::exp(-t * xi1);
        acc += std::norm(s0[kidx]) * amp * amp;
      }
      row.growth = std::sqrt(acc * grid.freq_cell_volume()) / n0;
    }
    rows.push_back(row);
  }
  return rows;
}

GridField wave_packet(const BoxGrid& grid, double lambda) {
  int dim = grid.dim;
  GridField u = make_field(grid, [lambda, dim](const Vec& x) {
    return std::polar(std::exp(-0.5 * norm2(x, dim)), lambda * x[0]);
  });
  double n = l2_norm(u);
  for (Complex& v : u.values) v /= n;
  u.spectral_cache.reset();
  return u;
}

GridField pair_propagator_apply(GainVariant variant, const GridField& u0, double t,
                                bool with_coupling) {
  if (variant == GainVariant::Ultrahyperbolic && u0.grid.dim < 2)
    throw ArgumentError("ultrahyperbolic variant needs dim >= 2");
  return field_from_spectrum(
      u0.grid, pair_spectrum_at(variant, u0.grid, spectrum(u0), t, with_coupling));
}

std::vector<GainRow> gain_exponent_probe(GainVariant variant,
                                         const std::vector<double>& freqs, double T,
                                         const BoxGrid& grid, int time_samples,
                                         bool with_coupling) {
  if (time_samples < 3) throw ArgumentError("need at least 3 time samples");
  std::vector<GainRow> rows(freqs.size());
  for (std::size_t fi = 0; fi < freqs.size(); ++fi) {
    GridField u0 = wave_packet(grid, freqs[fi]);
    const std::vector<Complex>& s0 = spectrum(u0);
    std::vector<double> wq(time_samples), wh(time_samples);
    for (int i = 0; i < time_samples; ++i) {
      double t = T * i / (time_samples - 1);
      GridField ut = field_from_spectrum(
          grid, pair_spectrum_at(variant, grid, s0, t, with_coupling));
      double a = weighted_norm(ut, 0.25, -1.0);
      double b = weighted_norm(ut, 0.5, -1.0);
      wq[i] = a * a;
      wh[i] = b * b;
    }
    GainRow& row = rows[fi];
    row.freq = freqs[fi];
    double dt = T / (time_samples - 1);
    for (int i = 0; i + 1 < time_samples; ++i) {
      row.ratio_quarter += 0.5 * (wq[i] + wq[i + 1]) * dt;
      row.ratio_half += 0.5 * (wh[i] + wh[i + 1]) * dt;
    }
  }
  return rows;
}

WeightedGrowthReport weighted_growth_check(const GridField& u0,
                                           const LinearOperatorSpec& spec, double T,
                                           int N_weight, double s,
                                           const EvolveConfig& cfg) {
  if (N_weight < 1) throw ArgumentError("weight exponent must be >= 1");
  EvolveConfig c = cfg;
  double dt = c.dt > 0.0 ? c.dt : stable_dt(u0.grid, spec) * c.dt_safety;
  long steps = static_cast<long>(std::ceil(T / dt - 1e-12));
  steps = ((steps + 3) / 4) * 4;
  c.dt = T / steps;
  c.stride = steps / 4;
  EvolutionTrace trace = evolve_linear(u0, spec, T, c);

  WeightedGrowthReport rep;
  for (double frac : {0.0, 0.25, 0.5, 1.0}) {
    double target = frac * T;
    const auto& snap = *std::min_element(
        trace.snapshots.begin(), trace.snapshots.end(), [&](const auto& a, const auto& b) {
          return std::abs(a.first - target) < std::abs(b.first - target);
        });
    rep.times.push_back(snap.first);
    double v = weighted_norm(snap.second, s, 2.0 * N_weight);
    rep.lhs.push_back(v * v);
  }

  int m = 2 * N_weight;
  std::vector<double> q(m + 1);
  for (int j = 0; j <= m; ++j) {
    double v = weighted_norm(u0, s + j, 2.0 * N_weight - j);
    q[j] = v * v;
  }
  rep.fitted_c.assign(m + 1, 0.0);
  if (q[0] <= 0.0) {
    rep.bounded = true;
    return rep;
  }
  rep.fitted_c[0] = rep.lhs[0] / q[0];

  std::vector<std::vector<double>> A;
  std::vector<double> y;
  for (std::size_t i = 1; i < rep.times.size(); ++i) {
    std::vector<double> row(m);
    double t = rep.times[i];
    for (int j = 1; j <= m; ++j) row[j - 1] = std::pow(t, j) * q[j];
    A.push_back(row);
    y.push_back(rep.lhs[i] - rep.fitted_c[0] * q[0]);
  }
  std::vector<double> cj = least_squares(A, y);
  for (int j = 1; j <= m; ++j) rep.fitted_c[j] = cj[j - 1];

  rep.bounded = true;
  for (std::size_t i = 0; i < rep.times.size(); ++i) {
    double rhs = 0.0;
    for (int j = 0; j <= m; ++j) rhs += rep.fitted_c[j] * std::pow(rep.times[i], j) * q[j];
    if (rep.lhs[i] > 1.05 * rhs + 1e-12) rep.bounded = false;
  }
  return rep;
}

}  // namespace schrodlab
