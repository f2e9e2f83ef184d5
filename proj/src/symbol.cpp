#include "schrodlab/symbol.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include <json.hpp>

namespace schrodlab {

Symbol constant_symbol(int dim, Complex value) {
  Symbol s;
  s.dim = dim;
  s.order_m = 0.0;
  s.parity = Parity::Even;
  s.class_tag = "classical";
  s.evaluate = [value](const Vec&, const Vec&) { return value; };
  return s;
}

Symbol bracket_power_symbol(int dim, double m) {
  Symbol s;
  s.dim = dim;
  s.order_m = m;
  s.parity = Parity::Even;
  s.class_tag = "classical";
  s.metadata["x-independent"] = "true";
  s.evaluate = [m, dim](const Vec&, const Vec& xi) {
    return Complex(std::pow(bracket_vec(xi, dim), m), 0.0);
  };
  return s;
}

Vec projection(const Vec& y, const Vec& z, int dim) {
  double zz = norm2(z, dim);
  if (zz == 0.0) throw ArgumentError("projection: zero direction");
  return sub(y, scale(z, dot(y, z, dim) / zz, dim), dim);
}

Symbol make_projected_symbol(
    int dim, const std::function<Complex(const Vec&, const Vec&, const Vec&)>& a,
    const Mat& A0, const CutoffProfile& chi, ProjectedVariant variant) {
  Symbol s;
  s.dim = dim;
  s.class_tag = "projected";
  s.parity = Parity::None;
  s.metadata["variant"] =
      variant == ProjectedVariant::Elliptic ? "elliptic" : "hyperbolic";
  s.evaluate = [dim, a, A0, chi](const Vec& x, const Vec& xi) -> Complex {
    double cut = chi(norm(xi, dim));
    if (cut == 0.0) return 0.0;
    Vec dir = matvec(A0, xi, dim);
    if (norm2(dir, dim) == 0.0) return 0.0;  // A0 xi on the degenerate set
    return cut * a(projection(x, dir, dim), x, xi);
  };
  return s;
}

Complex fd_derivative(const Symbol& p, const MultiIndex& alpha, const Vec& x,
                      const Vec& xi, double h_x, double h_xi) {
  const int n = p.dim;
  int axis = -1;
  for (int i = 0; i < 2 * n; ++i)
    if (alpha[i] > 0) {
      axis = i;
      break;
    }
  if (axis < 0) return p.evaluate(x, xi);
  MultiIndex reduced = alpha;
  reduced[axis] -= 1;
  double h = axis < n ? h_x : h_xi;
  Vec xp = x, xm = x, xip = xi, xim = xi;
  if (axis < n) {
    xp[axis] += h;
    xm[axis] -= h;
  } else {
    xip[axis - n] += h;
    xim[axis - n] -= h;
  }
  return (fd_derivative(p, reduced, xp, xip, h_x, h_xi) -
          fd_derivative(p, reduced, xm, xim, h_x, h_xi)) /
         (2.0 * h);
}

namespace {

void enumerate_multi(int axes, int budget, MultiIndex& cur, int axis,
                     const std::function<void(const MultiIndex&)>& visit) {
  if (axis == axes) {
    visit(cur);
    return;
  }
  for (int k = 0; k <= budget; ++k) {
    cur[axis] = k;
    enumerate_multi(axes, budget - k, cur, axis + 1, visit);
  }
  cur[axis] = 0;
}

}  // namespace

double seminorm_estimate(const Symbol& p, int j, double m,
                         const std::vector<PhasePoint>& probes,
                         const SeminormOptions& opt) {
  if (j < 0 || j > 4)
    throw ArgumentError("seminorm_estimate: derivative order must be in [0, 4]");
  const int n = p.dim;
  std::vector<MultiIndex> indices;
  MultiIndex cur{};
  enumerate_multi(2 * n, j, cur, 0, [&](const MultiIndex& mi) { indices.push_back(mi); });

  std::vector<double> per_probe(probes.size(), 0.0);
  parallel_for(probes.size(), [&](std::size_t i) {
    const PhasePoint& pt = probes[i];
    double h_x = opt.h_scale * (1.0 + norm(pt.x, n));
    double h_xi = opt.h_scale * (1.0 + norm(pt.xi, n));
    double bxi = bracket_vec(pt.xi, n);
    double bx = bracket_vec(pt.x, n);
    double worst = 0.0;
    for (const MultiIndex& mi : indices) {
      int xi_order = 0;
      for (int axis = n; axis < 2 * n; ++axis) xi_order += mi[axis];
      Complex d = fd_derivative(p, mi, pt.x, pt.xi, h_x, h_xi);
      double w = std::pow(bxi, -m + xi_order);
      if (opt.x_weighted) w *= std::pow(bx, -xi_order);
      worst = std::max(worst, std::abs(d) * w);
    }
    per_probe[i] = worst;
  });
  double out = 0.0;
  for (double v : per_probe) out = std::max(out, v);
  return out;
}

Complex poisson_bracket(const Symbol& p, const Symbol& q, const PhasePoint& at,
                        double h) {
  const int n = p.dim;
  double h_x = h * (1.0 + norm(at.x, n));
  double h_xi = h * (1.0 + norm(at.xi, n));
  Complex acc = 0.0;
  for (int j = 0; j < n; ++j) {
    Vec xp = at.x, xm = at.x, kp = at.xi, km = at.xi;
    xp[j] += h_x;
    xm[j] -= h_x;
    kp[j] += h_xi;
    km[j] -= h_xi;
    Complex dp_xi = (p.evaluate(at.x, kp) - p.evaluate(at.x, km)) / (2.0 * h_xi);
    Complex dq_x = (q.evaluate(xp, at.xi) - q.evaluate(xm, at.xi)) / (2.0 * h_x);
    Complex dp_x = (p.evaluate(xp, at.xi) - p.evaluate(xm, at.xi)) / (2.0 * h_x);
    Complex dq_xi = (q.evaluate(at.x, kp) - q.evaluate(at.x, km)) / (2.0 * h_xi);
    acc += dp_xi * dq_x - dp_x * dq_xi;
  }
  return acc;
}

// ---------------------------------------------------------------------------
// Tabulation
// ---------------------------------------------------------------------------

std::size_t LatticeSpec::total() const {
  std::size_t t = 1;
  for (int a = 0; a < dim; ++a) t *= static_cast<std::size_t>(count[a]);
  return t;
}

double LatticeSpec::node(int axis, int index) const {
  if (count[axis] <= 1) return lo[axis];
  return lo[axis] + (hi[axis] - lo[axis]) * index / (count[axis] - 1);
}

namespace {

std::size_t flat_index(const LatticeSpec& xg, const LatticeSpec& kg,
                       const std::array<int, kMaxDim>& ix,
                       const std::array<int, kMaxDim>& ik) {
  std::size_t idx = 0;
  for (int a = 0; a < xg.dim; ++a) idx = idx * xg.count[a] + ix[a];
  for (int a = 0; a < kg.dim; ++a) idx = idx * kg.count[a] + ik[a];
  return idx;
}

}  // namespace

Complex SymbolTable::at_node(const std::array<int, kMaxDim>& ix,
                             const std::array<int, kMaxDim>& ik) const {
  return values[flat_index(x_grid, xi_grid, ix, ik)];
}

Complex SymbolTable::interpolate(const Vec& x, const Vec& xi) const {
  const int nx = x_grid.dim, nk = xi_grid.dim;
  const int axes = nx + nk;
  std::array<int, 2 * kMaxDim> base{};
  std::array<double, 2 * kMaxDim> frac{};
  for (int a = 0; a < axes; ++a) {
    const LatticeSpec& g = a < nx ? x_grid : xi_grid;
    int ga = a < nx ? a : a - nx;
    double v = a < nx ? x[ga] : xi[ga];
    if (g.count[ga] <= 1) {
      base[a] = 0;
      frac[a] = 0.0;
      continue;
    }
    double step = (g.hi[ga] - g.lo[ga]) / (g.count[ga] - 1);
    double t = (v - g.lo[ga]) / step;
    t = std::clamp(t, 0.0, static_cast<double>(g.count[ga] - 1));
    int i0 = std::min(static_cast<int>(t), g.count[ga] - 2);
    base[a] = i0;
    frac[a] = t - i0;
    if (interpolation == TableInterpolation::Nearest) {
      base[a] = frac[a] < 0.5 ? i0 : i0 + 1;
      frac[a] = 0.0;
    }
  }
  Complex acc = 0.0;
  for (int corner = 0; corner < (1 << axes); ++corner) {
    double w = 1.0;
    std::array<int, kMaxDim> ix{}, ik{};
    for (int a = 0; a < axes; ++a) {
      int bit = (corner >> a) & 1;
      const LatticeSpec& g = a < nx ? x_grid : xi_grid;
      int ga = a < nx ? a : a - nx;
      int idx = base[a] + bit;
      if (idx >= g.count[ga]) {
        idx = g.count[ga] - 1;
        w *= bit ? frac[a] : 1.0 - frac[a];
      } else {
        w *= bit ? frac[a] : 1.0 - frac[a];
      }
      if (a < nx)
        ix[ga] = idx;
      else
        ik[ga] = idx;
    }
    if (w != 0.0) acc += w * at_node(ix, ik);
  }
  return acc;
}

SymbolTable tabulate(const Symbol& p, const LatticeSpec& x_grid,
                     const LatticeSpec& xi_grid, std::uint64_t probe_seed) {
  SymbolTable t;
  t.x_grid = x_grid;
  t.xi_grid = xi_grid;
  t.source = p.class_tag;
  const std::size_t total = x_grid.total() * xi_grid.total();
  t.values.resize(total);

  const int nx = x_grid.dim, nk = xi_grid.dim;
  std::exception_ptr fill_error;
  parallel_for(total, [&](std::size_t flat) {
    std::size_t rem = flat;
    std::array<int, kMaxDim> ik{}, ix{};
    for (int a = nk - 1; a >= 0; --a) {
      ik[a] = static_cast<int>(rem % xi_grid.count[a]);
      rem /= xi_grid.count[a];
    }
    for (int a = nx - 1; a >= 0; --a) {
      ix[a] = static_cast<int>(rem % x_grid.count[a]);
      rem /= x_grid.count[a];
    }
    Vec x{}, xi{};
    for (int a = 0; a < nx; ++a) x[a] = x_grid.node(a, ix[a]);
    for (int a = 0; a < nk; ++a) xi[a] = xi_grid.node(a, ik[a]);
    Complex v = p.evaluate(x, xi);
    if (!std::isfinite(v.real()) || !std::isfinite(v.imag()))
      throw EvalError("tabulate: non-finite symbol value", x);
    t.values[flat] = v;
  });

  // Interpolation error on seeded random off-grid probes.
  CounterRng rng(probe_seed);
  double worst = 0.0;
  for (int i = 0; i < 1000; ++i) {
    Vec x{}, xi{};
    for (int a = 0; a < nx; ++a)
      x[a] = x_grid.lo[a] + (x_grid.hi[a] - x_grid.lo[a]) * rng.uniform();
    for (int a = 0; a < nk; ++a)
      xi[a] = xi_grid.lo[a] + (xi_grid.hi[a] - xi_grid.lo[a]) * rng.uniform();
    worst = std::max(worst, std::abs(t.interpolate(x, xi) - p.evaluate(x, xi)));
  }
  t.probe_error = worst;
  return t;
}

void save_table(const SymbolTable& table, const std::string& blob_path,
                const std::string& sidecar_path) {
  std::ofstream blob(blob_path, std::ios::binary);
  if (!blob) throw ArgumentError("save_table: cannot open blob " + blob_path);
  for (const Complex& v : table.values) {
    double re = v.real(), im = v.imag();
    blob.write(reinterpret_cast<const char*>(&re), sizeof(double));
    blob.write(reinterpret_cast<const char*>(&im), sizeof(double));
  }
  blob.close();

  nlohmann::json side;
  auto grid_json = [](const LatticeSpec& g) {
    nlohmann::json j;
    j["dim"] = g.dim;
    for (int a = 0; a < g.dim; ++a) {
      j["lo"].push_back(g.lo[a]);
      j["hi"].push_back(g.hi[a]);
      j["count"].push_back(g.count[a]);
    }
    return j;
  };
  side["x_grid"] = grid_json(table.x_grid);
  side["xi_grid"] = grid_json(table.xi_grid);
  side["source"] = table.source;
  side["interpolation"] =
      table.interpolation == TableInterpolation::Multilinear ? "multilinear" : "nearest";
  side["probe_error"] = table.probe_error;
  side["value_count"] = table.values.size();
  side["format"] = "complex128-interleaved-le";
  std::ofstream sc(sidecar_path);
  if (!sc) throw ArgumentError("save_table: cannot open sidecar " + sidecar_path);
  sc << side.dump(2) << "\n";
}

SymbolTable load_table(const std::string& blob_path, const std::string& sidecar_path) {
  std::ifstream sc(sidecar_path);
  if (!sc) throw ArgumentError("load_table: cannot open sidecar " + sidecar_path);
  nlohmann::json side = nlohmann::json::parse(sc);
  SymbolTable t;
  auto grid_from = [](const nlohmann::json& j) {
    LatticeSpec g;
    g.dim = j.at("dim").get<int>();
    for (int a = 0; a < g.dim; ++a) {
      g.lo[a] = j.at("lo")[a].get<double>();
      g.hi[a] = j.at("hi")[a].get<double>();
      g.count[a] = j.at("count")[a].get<int>();
    }
    return g;
  };
  t.x_grid = grid_from(side.at("x_grid"));
  t.xi_grid = grid_from(side.at("xi_grid"));
  t.source = side.at("source").get<std::string>();
  t.interpolation = side.at("interpolation").get<std::string>() == "nearest"
                        ? TableInterpolation::Nearest
                        : TableInterpolation::Multilinear;
  t.probe_error = side.at("probe_error").get<double>();
  std::size_t count = side.at("value_count").get<std::size_t>();

  std::ifstream blob(blob_path, std::ios::binary);
  if (!blob) throw ArgumentError("load_table: cannot open blob " + blob_path);
  t.values.resize(count);
  for (std::size_t i = 0; i < count; ++i) {
    double re = 0.0, im = 0.0;
    blob.read(reinterpret_cast<char*>(&re), sizeof(double));
    blob.read(reinterpret_cast<char*>(&im), sizeof(double));
    t.values[i] = Complex(re, im);
  }
  if (!blob) throw ArgumentError("load_table: blob truncated");
  return t;
}

Symbol table_symbol(const SymbolTable& table, int dim) {
  auto shared = std::make_shared<SymbolTable>(table);
  Symbol s;
  s.dim = dim;
  s.class_tag = "classical";
  s.metadata["backing"] = "table";
  s.evaluate = [shared](const Vec& x, const Vec& xi) { return shared->interpolate(x, xi); };
  return s;
}

}  // namespace schrodlab
