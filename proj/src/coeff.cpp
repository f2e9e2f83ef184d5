#include "schrodlab/coeff.hpp"

#include <algorithm>
#include <cmath>

namespace schrodlab {

Mat CoefficientField::eval(const Vec& x) const {
  for (int j = 0; j < dim; ++j)
    if (!std::isfinite(x[j])) throw EvalError("eval_matrix: non-finite point", x);
  Mat m;
  for (int j = 0; j < dim; ++j) {
    for (int k = j; k < dim; ++k) {
      double v = entry[j][k](x);
      if (!std::isfinite(v)) throw EvalError("eval_matrix: non-finite entry", x);
      m(j, k) = v;
      m(k, j) = v;
    }
  }
  return m;
}

Vec CoefficientField::grad_entry(int j, int k, const Vec& x) const {
  Vec g = grad[j][k](x);
  for (int l = 0; l < dim; ++l)
    if (!std::isfinite(g[l])) throw EvalError("grad_entry: non-finite gradient", x);
  return g;
}

Mat CoefficientField::hessian_entry(int j, int k, const Vec& x) const {
  Mat h;
  double step = fd_step(norm(x, dim));
  for (int m = 0; m < dim; ++m) {
    Vec xp = x, xm = x;
    xp[m] += step;
    xm[m] -= step;
    Vec gp = grad[j][k](xp);
    Vec gm = grad[j][k](xm);
    for (int l = 0; l < dim; ++l) h(l, m) = (gp[l] - gm[l]) / (2.0 * step);
  }
  // Symmetrize; the finite differences of the two mixed entries agree to
  // truncation error.
  for (int l = 0; l < dim; ++l)
    for (int m = l + 1; m < dim; ++m) {
      double v = 0.5 * (h(l, m) + h(m, l));
      h(l, m) = v;
      h(m, l) = v;
    }
  return h;
}

double CoefficientField::hamiltonian(const Vec& x, const Vec& xi) const {
  Mat A = eval(x);
  double s = 0.0;
  for (int j = 0; j < dim; ++j)
    for (int k = 0; k < dim; ++k) s += A(j, k) * xi[j] * xi[k];
  return s;
}

void set_entry(CoefficientField& f, int j, int k, ScalarFn value, GradFn gradient) {
  f.entry[j][k] = value;
  f.entry[k][j] = value;
  f.grad[j][k] = gradient;
  f.grad[k][j] = gradient;
}

CoefficientField constant_field(int dim, const Mat& A0, int signature_k, double nu,
                                FieldKind kind, std::string id) {
  CoefficientField f;
  f.dim = dim;
  f.asymptotic = A0;
  f.signature_k = signature_k;
  f.nu = nu;
  f.kind = kind;
  f.id = std::move(id);
  for (int j = 0; j < dim; ++j)
    for (int k = j; k < dim; ++k) {
      double v = A0(j, k);
      set_entry(f, j, k, [v](const Vec&) { return v; }, [](const Vec&) { return Vec{}; });
    }
  return f;
}

CoefficientField truncate(const CoefficientField& field, double R,
                          const CutoffProfile& theta) {
  if (R == kNoTruncation) return field;  // A^inf = A
  if (!(R > 1.0)) throw ArgumentError("truncate: R must exceed 1");
  CoefficientField out = field;
  out.id = field.id + "-R" + std::to_string(R);
  const int n = field.dim;
  for (int j = 0; j < n; ++j) {
    for (int k = j; k < n; ++k) {
      ScalarFn a = field.entry[j][k];
      GradFn da = field.grad[j][k];
      double a0 = field.asymptotic(j, k);
      auto value = [a, a0, R, theta, n](const Vec& x) {
        double r = norm(x, n) / R;
        return a0 + theta.evaluate(r) * (a(x) - a0);
      };
      auto gradient = [a, da, a0, R, theta, n](const Vec& x) {
        double rx = norm(x, n);
        double r = rx / R;
        double th = theta.evaluate(r);
        Vec g = da(x);
        Vec out_g = scale(g, th, n);
        if (rx > 0.0) {
          double dth = theta.derivative(r) / R;  // d/d|x| of theta(|x|/R)
          double diff = a(x) - a0;
          for (int l = 0; l < n; ++l) out_g[l] += dth * (x[l] / rx) * diff;
        }
        return out_g;
      };
      set_entry(out, j, k, value, gradient);
    }
  }
  return out;
}

std::vector<DecayRow> decay_report(const CoefficientField& field,
                                   const std::vector<double>& radii, double tau,
                                   int directions_per_radius) {
  if (radii.empty()) throw ArgumentError("decay_report: empty radii list");
  for (std::size_t i = 1; i < radii.size(); ++i)
    if (!(radii[i] > radii[i - 1]) || !(radii[0] > 0.0))
      throw ArgumentError("decay_report: radii must be positive increasing");
  auto dirs = sphere_directions(field.dim, directions_per_radius);
  std::vector<DecayRow> rows(radii.size());
  for (std::size_t i = 0; i < radii.size(); ++i) {
    double r = radii[i];
    double worst = 0.0;
    for (const Vec& d : dirs) {
      Vec x = scale(d, r, field.dim);
      for (int j = 0; j < field.dim; ++j)
        for (int k = j; k < field.dim; ++k)
          worst = std::max(worst, norm(field.grad_entry(j, k, x), field.dim));
    }
    rows[i] = DecayRow{r, worst, worst * std::pow(r, tau)};
  }
  return rows;
}

double nondegeneracy_minimum(const CoefficientField& field, double x_extent,
                             int x_samples, int directions) {
  auto dirs = sphere_directions(field.dim, directions);
  auto xdirs = sphere_directions(field.dim, std::max(8, x_samples / 4));
  double worst = std::numeric_limits<double>::infinity();
  std::vector<double> radii;
  for (int i = 0; i < x_samples; ++i)
    radii.push_back(x_extent * (i + 0.5) / x_samples);
  for (double r : radii) {
    for (const Vec& xd : xdirs) {
      Vec x = scale(xd, r, field.dim);
      Mat A = field.eval(x);
      for (const Vec& xi : dirs) {
        double q;
        if (field.kind == FieldKind::Elliptic) {
          double form = 0.0;
          for (int j = 0; j < field.dim; ++j)
            for (int k = 0; k < field.dim; ++k) form += A(j, k) * xi[j] * xi[k];
          q = std::abs(form);
        } else {
          q = norm(matvec(A, xi, field.dim), field.dim);
        }
        worst = std::min(worst, q);
      }
    }
  }
  return worst;
}

CoefficientField perturbed_field(const CoefficientField& field,
                                 const std::array<std::array<ScalarFn, kMaxDim>, kMaxDim>& B1,
                                 const std::array<std::array<GradFn, kMaxDim>, kMaxDim>& B1_grad,
                                 double eps) {
  CoefficientField out = field;
  out.id = field.id + "-pert";
  out.nu = 2.0 * field.nu;
  const int n = field.dim;
  for (int j = 0; j < n; ++j)
    for (int k = j; k < n; ++k) {
      ScalarFn a = field.entry[j][k];
      GradFn da = field.grad[j][k];
      ScalarFn b = B1[j][k];
      GradFn db = B1_grad[j][k];
      set_entry(out, j, k,
                [a, b, eps](const Vec& x) { return a(x) + eps * b(x); },
                [da, db, eps, n](const Vec& x) {
                  Vec g = da(x);
                  Vec h = db(x);
                  for (int l = 0; l < n; ++l) g[l] += eps * h[l];
                  return g;
                });
    }
  if (eps != 0.0) {
    // Verify (2 nu)^{-1} <= |A1(x) xi| on a deterministic grid.
    double threshold = 1.0 / (2.0 * field.nu);
    auto dirs = sphere_directions(n, 64);
    auto xdirs = sphere_directions(n, 32);
    for (int i = 0; i < 16; ++i) {
      double r = 16.0 * (i + 0.5) / 16.0;
      for (const Vec& xd : xdirs) {
        Vec x = scale(xd, r, n);
        Mat A = out.eval(x);
        for (const Vec& xi : dirs) {
          double q = (out.kind == FieldKind::Elliptic)
                         ? std::abs(out.hamiltonian(x, xi))
                         : norm(matvec(A, xi, n), n);
          if (q < threshold)
            throw PerturbationTooLargeError("perturbed_field: non-degeneracy violated", x, xi);
        }
      }
    }
  }
  return out;
}

}  // namespace schrodlab
