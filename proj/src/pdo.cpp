#include "schrodlab/pdo.hpp"

#include <algorithm>
#include <limits>
#include <sstream>

namespace schrodlab {

namespace {

double two_pi_half(int dim) {
  double v = 1.0;
  for (int a = 0; a < dim; ++a) v *= 2.0 * M_PI;
  return std::sqrt(v);
}

// Per-axis table of e^{i x_j xi_b} = (-1)^{k(b)} e^{2 pi i j b / N}; the
// parity comes from the -L node offset.
struct PhaseTable {
  int N = 0;
  std::vector<Complex> t;  // N * N, row j, column b

  explicit PhaseTable(const BoxGrid& g) : N(g.points_per_axis) {
    t.resize(static_cast<std::size_t>(N) * N);
    for (int j = 0; j < N; ++j)
      for (int b = 0; b < N; ++b) {
        double angle = 2.0 * M_PI * ((static_cast<long>(j) * b) % N) / N;
        double parity = g.freq_index(b) % 2 == 0 ? 1.0 : -1.0;
        t[static_cast<std::size_t>(j) * N + b] =
            parity * Complex(std::cos(angle), std::sin(angle));
      }
  }

  Complex at(int j, int b) const { return t[static_cast<std::size_t>(j) * N + b]; }
};

bool is_x_independent(const Symbol& p) {
  auto it = p.metadata.find("x-independent");
  return it != p.metadata.end() && it->second == "true";
}

std::string index_string(const std::array<int, kMaxDim>& idx, int dim) {
  std::ostringstream os;
  os << "(";
  for (int a = 0; a < dim; ++a) os << (a ? "," : "") << idx[a];
  os << ")";
  return os.str();
}

Complex checked_eval(const Symbol& p, const Vec& x, const Vec& xi,
                     const std::array<int, kMaxDim>& jx,
                     const std::array<int, kMaxDim>& kx, int dim) {
  Complex v = p.evaluate(x, xi);
  if (!std::isfinite(v.real()) || !std::isfinite(v.imag()))
    throw EvalError("symbol evaluation failed at node " + index_string(jx, dim) +
                        ", frequency " + index_string(kx, dim),
                    x);
  return v;
}

GridField lincomb(const GridField& a, double ca, const GridField& b, double cb) {
  GridField r = zero_field(a.grid);
  for (std::size_t i = 0; i < r.values.size(); ++i)
    r.values[i] = ca * a.values[i] + cb * b.values[i];
  return r;
}

GridField multiply_closure(const GridField& u,
                           const std::function<Complex(const Vec&)>& f) {
  GridField r = zero_field(u.grid);
  for (std::size_t i = 0; i < r.values.size(); ++i)
    r.values[i] = f(u.grid.node(i)) * u.values[i];
  return r;
}

Complex i_pow(int k) {
  static const Complex table[4] = {{1, 0}, {0, 1}, {-1, 0}, {0, -1}};
  return table[((k % 4) + 4) % 4];
}

int multi_abs(const std::array<int, kMaxDim>& a, int dim) {
  int s = 0;
  for (int j = 0; j < dim; ++j) s += a[j];
  return s;
}

double multi_factorial(const std::array<int, kMaxDim>& a, int dim) {
  double f = 1.0;
  for (int j = 0; j < dim; ++j)
    for (int k = 2; k <= a[j]; ++k) f *= k;
  return f;
}

double binom(int n, int k) {
  double r = 1.0;
  for (int j = 1; j <= k; ++j) r *= static_cast<double>(n - k + j) / j;
  return r;
}

double multi_binom(const std::array<int, kMaxDim>& a,
                   const std::array<int, kMaxDim>& b, int dim) {
  double r = 1.0;
  for (int j = 0; j < dim; ++j) r *= binom(a[j], b[j]);
  return r;
}

// All multi-indices over `dim` axes with |beta| <= cap.
std::vector<std::array<int, kMaxDim>> indices_up_to(int dim, int cap) {
  std::vector<std::array<int, kMaxDim>> out;
  std::array<int, kMaxDim> cur{};
  std::function<void(int, int)> rec = [&](int axis, int left) {
    if (axis == dim) {
      out.push_back(cur);
      return;
    }
    for (int v = 0; v <= left; ++v) {
      cur[axis] = v;
      rec(axis + 1, left - v);
    }
    cur[axis] = 0;
  };
  rec(0, cap);
  return out;
}

// Subsets beta <= alpha.
std::vector<std::array<int, kMaxDim>> indices_below(
    const std::array<int, kMaxDim>& alpha, int dim) {
  std::vector<std::array<int, kMaxDim>> out;
  std::array<int, kMaxDim> cur{};
  std::function<void(int)> rec = [&](int axis) {
    if (axis == dim) {
      out.push_back(cur);
      return;
    }
    for (int v = 0; v <= alpha[axis]; ++v) {
      cur[axis] = v;
      rec(axis + 1);
    }
    cur[axis] = 0;
  };
  rec(0);
  return out;
}

MultiIndex as_x_index(const std::array<int, kMaxDim>& beta, int dim) {
  MultiIndex mi{};
  for (int a = 0; a < dim; ++a) mi[a] = beta[a];
  return mi;
}

// fd_derivative packs the xi orders right after the dim active x slots.
MultiIndex as_xi_index(const std::array<int, kMaxDim>& beta, int dim) {
  MultiIndex mi{};
  for (int a = 0; a < dim; ++a) mi[dim + a] = beta[a];
  return mi;
}

// Nested central difference of an x-closure.
Complex fd_closure(const std::function<Complex(const Vec&)>& f,
                   std::array<int, kMaxDim> beta, int dim, const Vec& x, double h) {
  for (int a = 0; a < dim; ++a)
    if (beta[a] > 0) {
      --beta[a];
      Vec xp = x, xm = x;
      xp[a] += h;
      xm[a] -= h;
      return (fd_closure(f, beta, dim, xp, h) - fd_closure(f, beta, dim, xm, h)) /
             (2.0 * h);
    }
  return f(x);
}

double monomial(const Vec& x, const std::array<int, kMaxDim>& alpha, int dim) {
  double r = 1.0;
  for (int a = 0; a < dim; ++a)
    for (int k = 0; k < alpha[a]; ++k) r *= x[a];
  return r;
}

}  // namespace

GridField apply_multiplier(const std::function<Complex(const Vec&)>& m,
                           const GridField& u) {
  const BoxGrid& g = u.grid;
  const std::vector<Complex>& sp = spectrum(u);
  std::vector<Complex> out(sp.size());
  for (std::size_t k = 0; k < sp.size(); ++k) {
    if (g.is_nyquist(k)) {
      out[k] = Complex(0.0, 0.0);
      continue;
    }
    Complex mv = m(g.freq(k));
    if (!std::isfinite(mv.real()) || !std::isfinite(mv.imag()))
      throw EvalError("non-finite multiplier value", g.freq(k));
    out[k] = mv * sp[k];
  }
  return field_from_spectrum(g, std::move(out));
}

GridField apply_pdo(const Symbol& p, const GridField& u) {
  const BoxGrid& g = u.grid;
  if (p.dim != g.dim) throw ArgumentError("symbol/grid dimension mismatch");
  if (is_x_independent(p))
    return apply_multiplier([&p](const Vec& xi) { return p.evaluate(Vec{}, xi); }, u);

  const std::vector<Complex>& sp = spectrum(u);
  double coef = g.freq_cell_volume() / two_pi_half(g.dim);
  struct Bin {
    Vec xi;
    Complex weight;
    std::array<int, kMaxDim> idx;
  };
  std::vector<Bin> bins;
  bins.reserve(sp.size());
  for (std::size_t k = 0; k < sp.size(); ++k) {
    if (g.is_nyquist(k) || sp[k] == Complex(0.0, 0.0)) continue;
    bins.push_back({g.freq(k), coef * sp[k], g.unflatten(k)});
  }

  PhaseTable phase(g);
  GridField v = zero_field(g);
  parallel_for(v.values.size(), [&](std::size_t j) {
    std::array<int, kMaxDim> jx = g.unflatten(j);
    Vec x = g.node(j);
    Complex acc(0.0, 0.0);
    for (const Bin& bin : bins) {
      Complex pv = checked_eval(p, x, bin.xi, jx, bin.idx, g.dim);
      Complex ph(1.0, 0.0);
      for (int a = 0; a < g.dim; ++a) ph *= phase.at(jx[a], bin.idx[a]);
      acc += ph * pv * bin.weight;
    }
    v.values[j] = acc;
  });
  return v;
}

GridField bessel(double s, const GridField& u) {
  if (s == 0.0) return u;
  int dim = u.grid.dim;
  return apply_multiplier(
      [s, dim](const Vec& xi) {
        return Complex(std::pow(bracket_vec(xi, dim), s), 0.0);
      },
      u);
}

GridField adjoint_apply(const Symbol& p, const GridField& u) {
  const BoxGrid& g = u.grid;
  if (p.dim != g.dim) throw ArgumentError("symbol/grid dimension mismatch");
  if (is_x_independent(p))
    return apply_multiplier(
        [&p](const Vec& xi) { return std::conj(p.evaluate(Vec{}, xi)); }, u);

  double coef = g.cell_volume() / two_pi_half(g.dim);
  PhaseTable phase(g);
  std::vector<Complex> what(g.total());
  parallel_for(what.size(), [&](std::size_t k) {
    if (g.is_nyquist(k)) {
      what[k] = Complex(0.0, 0.0);
      return;
    }
    std::array<int, kMaxDim> kx = g.unflatten(k);
    Vec xi = g.freq(k);
    Complex acc(0.0, 0.0);
    for (std::size_t j = 0; j < u.values.size(); ++j) {
      if (u.values[j] == Complex(0.0, 0.0)) continue;
      std::array<int, kMaxDim> jx = g.unflatten(j);
      Complex pv = checked_eval(p, g.node(j), xi, jx, kx, g.dim);
      Complex ph(1.0, 0.0);
      for (int a = 0; a < g.dim; ++a) ph *= phase.at(jx[a], kx[a]);
      acc += std::conj(ph) * std::conj(pv) * u.values[j];
    }
    what[k] = coef * acc;
  });
  return field_from_spectrum(g, std::move(what));
}

GridField spectral_derivative(const GridField& u,
                              const std::array<int, kMaxDim>& alpha) {
  int dim = u.grid.dim;
  return apply_multiplier(
      [alpha, dim](const Vec& xi) {
        Complex m(1.0, 0.0);
        for (int a = 0; a < dim; ++a)
          for (int k = 0; k < alpha[a]; ++k) m *= Complex(0.0, xi[a]);
        return m;
      },
      u);
}

OperatorNormEstimate operator_norm_estimate(const Symbol& p, const BoxGrid& grid,
                                            int iters, std::uint64_t seed,
                                            double precompose_order) {
  if (iters < 10) throw ArgumentError("operator norm estimation needs >= 10 iterations");
  CounterRng rng(seed);
  GridField u = zero_field(grid);
  for (Complex& v : u.values) v = Complex(rng.normal(), rng.normal());
  double nu = l2_norm(u);
  if (nu == 0.0) throw LabError("degenerate random start");
  for (Complex& v : u.values) v /= nu;

  OperatorNormEstimate est;
  double prev = -1.0;
  for (int it = 0; it < iters; ++it) {
    GridField t = precompose_order != 0.0 ? bessel(precompose_order, u) : u;
    GridField v = apply_pdo(p, t);
    GridField w = adjoint_apply(p, v);
    if (precompose_order != 0.0) w = bessel(precompose_order, w);
    double lam = l2_norm(v);
    lam *= lam;
    est.value = std::sqrt(std::max(lam, 0.0));
    est.iterations = it + 1;
    if (prev >= 0.0 && std::abs(lam - prev) <= 1e-9 * std::max(lam, 1e-300)) {
      est.converged = true;
      break;
    }
    prev = lam;
    double nw = l2_norm(w);
    if (nw == 0.0) {  // operator annihilates the iterate: norm estimate is 0
      est.value = 0.0;
      est.converged = true;
      break;
    }
    u = w;
    u.spectral_cache.reset();
    for (Complex& c : u.values) c /= nw;
  }
  return est;
}

double composition_residual(const std::function<Complex(const Vec&)>& phi,
                            const std::array<int, kMaxDim>& alpha, const Symbol& b,
                            int N_order, const GridField& u,
                            CompositionVariant variant, const Symbol* b2, double h) {
  const BoxGrid& g = u.grid;
  int dim = g.dim;
  if (multi_abs(alpha, dim) > 2) throw ArgumentError("composition: |alpha| must be <= 2");
  if (N_order < 1 || N_order > 3)
    throw ArgumentError("composition: expansion order must be 1..3");
  double base = l2_norm(u);
  if (base == 0.0) return 0.0;

  GridField lhs = zero_field(g);
  Symbol c;
  c.dim = dim;

  switch (variant) {
    case CompositionVariant::LeftWeight: {
      lhs = multiply_closure(spectral_derivative(apply_pdo(b, u), alpha), phi);
      auto subsets = indices_below(alpha, dim);
      c.evaluate = [&b, phi, alpha, subsets, N_order, dim, h](const Vec& x,
                                                              const Vec& xi) {
        Complex s(0.0, 0.0);
        for (const auto& beta : subsets) {
          if (multi_abs(beta, dim) >= N_order) continue;
          Complex db = multi_abs(beta, dim) == 0
                           ? b.evaluate(x, xi)
                           : fd_derivative(b, as_x_index(beta, dim), x, xi, h, h);
          std::array<int, kMaxDim> rest{};
          for (int a = 0; a < dim; ++a) rest[a] = alpha[a] - beta[a];
          s += multi_binom(alpha, beta, dim) * i_pow(multi_abs(rest, dim)) *
               monomial(xi, rest, dim) * db;
        }
        return phi(x) * s;
      };
      break;
    }
    case CompositionVariant::RightWeight: {
      lhs = apply_pdo(b, multiply_closure(spectral_derivative(u, alpha), phi));
      auto betas = indices_up_to(dim, N_order - 1);
      c.evaluate = [&b, phi, alpha, betas, dim, h](const Vec& x, const Vec& xi) {
        Complex s(0.0, 0.0);
        for (const auto& beta : betas) {
          int ab = multi_abs(beta, dim);
          Complex db = ab == 0 ? b.evaluate(x, xi)
                               : fd_derivative(b, as_xi_index(beta, dim), x, xi, h, h);
          Complex dphi = ab == 0 ? phi(x) : fd_closure(phi, beta, dim, x, h);
          s += i_pow(-ab) / multi_factorial(beta, dim) * db * dphi;
        }
        return i_pow(multi_abs(alpha, dim)) * monomial(xi, alpha, dim) * s;
      };
      break;
    }
    case CompositionVariant::Adjoint: {
      lhs = adjoint_apply(b, u);
      auto gammas = indices_up_to(dim, N_order - 1);
      c.evaluate = [&b, gammas, dim, h](const Vec& x, const Vec& xi) {
        Complex s(0.0, 0.0);
        for (const auto& gamma : gammas) {
          int ag = multi_abs(gamma, dim);
          MultiIndex mi{};
          for (int a = 0; a < dim; ++a) {
            mi[a] = gamma[a];
            mi[dim + a] = gamma[a];
          }
          Complex d = ag == 0 ? b.evaluate(x, xi) : fd_derivative(b, mi, x, xi, h, h);
          s += i_pow(-ag) / multi_factorial(gamma, dim) * std::conj(d);
        }
        return s;
      };
      break;
    }
    case CompositionVariant::Product: {
      if (b2 == nullptr) throw ArgumentError("composition: product variant needs b2");
      lhs = apply_pdo(b, adjoint_apply(*b2, u));
      auto gammas = indices_up_to(dim, N_order - 1);
      c.evaluate = [&b, b2, gammas, dim, h](const Vec& x, const Vec& xi) {
        Complex s(0.0, 0.0);
        for (const auto& gamma : gammas) {
          int ag = multi_abs(gamma, dim);
          // Leibniz split of d_xi^g [b d_x^g conj(b2)].
          Complex term(0.0, 0.0);
          for (const auto& delta : indices_below(gamma, dim)) {
            std::array<int, kMaxDim> rest{};
            for (int a = 0; a < dim; ++a) rest[a] = gamma[a] - delta[a];
            Complex d1 = multi_abs(delta, dim) == 0
                             ? b.evaluate(x, xi)
                             : fd_derivative(b, as_xi_index(delta, dim), x, xi, h, h);
            MultiIndex mi2{};
            for (int a = 0; a < dim; ++a) {
              mi2[a] = gamma[a];
              mi2[dim + a] = rest[a];
            }
            Complex d2 = ag == 0 ? b2->evaluate(x, xi)
                                 : fd_derivative(*b2, mi2, x, xi, h, h);
            term += multi_binom(gamma, delta, dim) * d1 * std::conj(d2);
          }
          s += i_pow(-ag) / multi_factorial(gamma, dim) * term;
        }
        return s;
      };
      break;
    }
  }

  GridField rhs = apply_pdo(c, u);
  return l2_norm(lincomb(lhs, 1.0, rhs, -1.0)) / base;
}

double weight_commutator_residual(const Symbol& p,
                                  const std::array<int, kMaxDim>& alpha,
                                  const GridField& u, double h) {
  const BoxGrid& g = u.grid;
  int dim = g.dim;
  if (multi_abs(alpha, dim) > 2)
    throw ArgumentError("weight commutator: |alpha| must be <= 2");

  auto xmul = [&](const std::array<int, kMaxDim>& a, const GridField& f) {
    return multiply_closure(f, [a, dim](const Vec& x) {
      return Complex(monomial(x, a, dim), 0.0);
    });
  };

  GridField lhs =
      lincomb(xmul(alpha, apply_pdo(p, u)), 1.0, apply_pdo(p, xmul(alpha, u)), -1.0);

  GridField rhs = zero_field(g);
  for (const auto& beta : indices_below(alpha, dim)) {
    int ab = multi_abs(beta, dim);
    if (ab == 0) continue;
    Symbol q;
    q.dim = dim;
    // xi-derivatives preserve x-independence, so the fast path carries over.
    if (auto it = p.metadata.find("x-independent"); it != p.metadata.end())
      q.metadata["x-independent"] = it->second;
    q.evaluate = [&p, beta, ab, dim, h](const Vec& x, const Vec& xi) {
      return i_pow(ab) * fd_derivative(p, as_xi_index(beta, dim), x, xi, h, h);
    };
    std::array<int, kMaxDim> rest{};
    for (int a = 0; a < dim; ++a) rest[a] = alpha[a] - beta[a];
    rhs = lincomb(rhs, 1.0, apply_pdo(q, xmul(rest, u)), multi_binom(alpha, beta, dim));
  }
  return l2_norm(lincomb(lhs, 1.0, rhs, -1.0));
}

double weighted_norm(const GridField& u, double s, double N_weight) {
  GridField w = bessel(s, u);
  int dim = u.grid.dim;
  double acc = 0.0;
  for (std::size_t i = 0; i < w.values.size(); ++i) {
    double wt = std::pow(bracket_vec(u.grid.node(i), dim), N_weight);
    acc += wt * wt * std::norm(w.values[i]);
  }
  return std::sqrt(acc * u.grid.cell_volume());
}

Complex sample_field(const GridField& u, const Vec& x) {
  const BoxGrid& g = u.grid;
  int N = g.points_per_axis;
  std::array<int, kMaxDim> base{};
  std::array<double, kMaxDim> frac{};
  for (int a = 0; a < g.dim; ++a) {
    double t = (x[a] + g.half_length) / g.spacing();
    double fl = std::floor(t);
    frac[a] = t - fl;
    long j = static_cast<long>(fl) % N;
    if (j < 0) j += N;
    base[a] = static_cast<int>(j);
  }
  Complex acc(0.0, 0.0);
  int corners = 1 << g.dim;
  for (int c = 0; c < corners; ++c) {
    double w = 1.0;
    std::array<int, kMaxDim> idx{};
    for (int a = 0; a < g.dim; ++a) {
      int up = (c >> a) & 1;
      idx[a] = (base[a] + up) % N;
      w *= up ? frac[a] : 1.0 - frac[a];
    }
    acc += w * u.values[g.flatten(idx)];
  }
  return acc;
}

std::vector<DecayProbe> decay_probe(const GridField& v,
                                    const std::vector<Vec>& directions,
                                    const std::vector<double>& radii) {
  const BoxGrid& g = v.grid;
  std::vector<DecayProbe> out;
  out.reserve(directions.size());
  for (const Vec& d : directions) {
    DecayProbe probe;
    probe.direction = d;
    double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
    int used = 0;
    for (double r : radii) {
      for (int a = 0; a < g.dim; ++a)
        if (std::abs(r * d[a]) >= g.half_length)
          throw ArgumentError("decay probe radius outside the box");
      double mag = std::abs(sample_field(v, scale(d, r, g.dim)));
      probe.rows.push_back({r, mag});
      if (r > 0.0 && mag > 1e-300) {
        double lx = std::log(r), ly = std::log(mag);
        sx += lx;
        sy += ly;
        sxx += lx * lx;
        sxy += lx * ly;
        ++used;
      }
    }
    if (used >= 2 && used * sxx - sx * sx > 0.0)
      probe.fitted_exponent = -(used * sxy - sx * sy) / (used * sxx - sx * sx);
    else
      probe.fitted_exponent = std::numeric_limits<double>::infinity();
    out.push_back(std::move(probe));
  }
  return out;
}

}  // namespace schrodlab
