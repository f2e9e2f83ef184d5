#include "schrodlab/factor.hpp"

#include <algorithm>
#include <cmath>

namespace schrodlab {

Symbol hamiltonian_symbol(const CoefficientField& field) {
  auto f = std::make_shared<CoefficientField>(field);
  Symbol s;
  s.dim = field.dim;
  s.order_m = 2.0;
  s.parity = Parity::Even;
  s.class_tag = "classical";
  s.metadata["field"] = field.id;
  s.evaluate = [f](const Vec& x, const Vec& xi) {
    return Complex(f->hamiltonian(x, xi), 0.0);
  };
  return s;
}

// ---------------------------------------------------------------------------
// Escape symbol.
// ---------------------------------------------------------------------------

namespace {

double p1_value(const CoefficientField& f, const CutoffProfile& psi, const Vec& x,
                const Vec& xi) {
  const int n = f.dim;
  double cut = psi(norm2(x, n));
  if (cut == 0.0) return 0.0;
  Mat A = f.eval(x);
  return 4.0 * cut * dot(x, matvec(A, xi, n), n) / bracket_vec(xi, n);
}

// -|xi|^{-1} int_0^inf phi1(|X|) <|xi| Xi> du on the unit ray; the ray is
// followed until it leaves supp phi1 outgoing.
double p2_value(const CoefficientField& f, const CutoffProfile& phi1, const Vec& x,
                const Vec& xi, double ray_budget, double tol) {
  const int n = f.dim;
  double mag = norm(xi, n);
  if (mag == 0.0) return 0.0;
  Vec xhat = scale(xi, 1.0 / mag, n);
  double stop_r = phi1.outer_radius;
  auto g = [&f, &phi1, mag, n](const Vec& X, const Vec& Xi) {
    double w = phi1(norm(X, n));
    if (w == 0.0) return 0.0;
    return w * bracket(mag * norm(Xi, n));
  };
  auto halt = [&f, stop_r, n](const Vec& X, const Vec& Xi) {
    return norm(X, n) >= stop_r && radial_speed(f, X, Xi) >= 0.0;
  };
  FlowIntegral I = integrate_along_flow(f, {x, xhat}, ray_budget, g, halt, tol);
  if (!I.halted)
    throw TrappingSuspectedError("escape symbol: ray failed to leave the cutoff region",
                                 x, xi);
  return -I.value / mag;
}

}  // namespace

Symbol doi_symbol(const CoefficientField& field, double M, double c2,
                  const DoiProfiles& profiles, double ray_budget, double tol) {
  if (profiles.phi1.inner_radius < M + 1.0)
    throw ArgumentError("doi_symbol: phi1 must be 1 on |x| <= M+1");
  auto f = std::make_shared<CoefficientField>(field);
  auto prof = std::make_shared<DoiProfiles>(profiles);
  Symbol s;
  s.dim = field.dim;
  s.order_m = 0.0;
  s.class_tag = "doi";
  s.metadata["field"] = field.id;
  s.metadata["c2"] = std::to_string(c2);
  const int n = field.dim;
  s.evaluate = [f, prof, c2, ray_budget, tol, n](const Vec& x, const Vec& xi) -> Complex {
    double p4 = c2 * p1_value(*f, prof->psi, x, xi);
    double gate = prof->phi1(norm(x, n)) * prof->phi2(norm(xi, n));
    if (gate != 0.0)
      p4 += gate * p2_value(*f, prof->phi1, x, xi, ray_budget, tol);
    return Complex(p4, 0.0);
  };
  return s;
}

EscapeReport verify_escape_inequality(const Symbol& p4, const CoefficientField& field,
                                      int N_weight, const std::vector<PhasePoint>& grid,
                                      double h) {
  Symbol h2 = hamiltonian_symbol(field);
  const int n = field.dim;
  std::vector<double> slack(grid.size());
  parallel_for(grid.size(), [&](std::size_t i) {
    const PhasePoint& at = grid[i];
    double br = poisson_bracket(h2, p4, at, h).real();
    double lambda = std::pow(bracket_vec(at.x, n), -N_weight);
    slack[i] = br - lambda * norm(at.xi, n);
  });
  EscapeReport rep;
  rep.min_slack = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < grid.size(); ++i) {
    if (slack[i] < rep.min_slack) {
      rep.min_slack = slack[i];
      rep.worst = grid[i];
    }
  }
  rep.fitted_c = std::max(0.0, -rep.min_slack);
  return rep;
}

ScaledDoiSymbol doi_symbol_autoscaled(const CoefficientField& field, double M,
                                      const DoiProfiles& profiles, int N_weight,
                                      const std::vector<PhasePoint>& grid,
                                      double ray_budget, double c2_init,
                                      int max_doublings) {
  double c2 = c2_init;
  ScaledDoiSymbol out;
  for (int i = 0; i <= max_doublings; ++i) {
    out.p4 = doi_symbol(field, M, c2, profiles, ray_budget);
    out.c2 = c2;
    out.report = verify_escape_inequality(out.p4, field, N_weight, grid);
    if (out.report.min_slack > 0.0) return out;
    c2 *= 2.0;
  }
  return out;  // last attempt; caller inspects report.min_slack
}

// ---------------------------------------------------------------------------
// Integrating-factor family.
// ---------------------------------------------------------------------------

namespace {

double b_generator_value(const CoefficientField& f, const Symbol& b1, double s_param,
                         const Vec& x, const Vec& xi) {
  const int n = f.dim;
  double v = 0.0;
  if (s_param != 0.0) {
    double cubic = 0.0;
    for (int k = 0; k < n; ++k)
      for (int l = 0; l < n; ++l) {
        Vec g = f.grad_entry(k, l, x);
        for (int j = 0; j < n; ++j) cubic += g[j] * xi[j] * xi[k] * xi[l];
      }
    double bx = bracket_vec(xi, n);
    v += s_param * cubic / (bx * bx);
  }
  if (b1.evaluate) v -= b1.evaluate(x, xi).real();
  return v;
}

}  // namespace

IntegratingFactorFamily integrating_factor(const CoefficientField& field_R,
                                           const Symbol& b1, double s_param,
                                           const CutoffProfile& chi,
                                           const IntegratingFactorOptions& opt) {
  auto f = std::make_shared<CoefficientField>(field_R);
  auto b1s = std::make_shared<Symbol>(b1);
  auto chis = std::make_shared<CutoffProfile>(chi);
  auto optp = std::make_shared<IntegratingFactorOptions>(opt);
  auto warnings = std::make_shared<std::atomic<long>>(0);
  const int n = field_R.dim;

  IntegratingFactorFamily fam;
  fam.dim = n;
  fam.s_param = s_param;
  fam.truncation_warnings = warnings;

  fam.b.dim = n;
  fam.b.order_m = 1.0;
  fam.b.parity = Parity::Odd;
  fam.b.class_tag = "integrating-factor";
  fam.b.metadata["role"] = "generator";
  fam.b.evaluate = [f, b1s, s_param](const Vec& x, const Vec& xi) {
    return Complex(b_generator_value(*f, *b1s, s_param, x, xi), 0.0);
  };
  auto b_eval = fam.b.evaluate;

  // chi(|xi|/2) * integral of b over the backward flow, on the unit ray.
  auto p_adaptive = [f, b_eval, chis, optp, warnings, n](const Vec& x,
                                                         const Vec& xi) -> double {
    double mag = norm(xi, n);
    double cut = (*chis)(0.5 * mag);
    if (cut == 0.0 || mag == 0.0) return 0.0;
    Vec xhat = scale(xi, 1.0 / mag, n);
    auto g = [&b_eval, mag, n](const Vec& X, const Vec& Xi) {
      return b_eval(X, scale(Xi, mag, n)).real();
    };
    double tail_tol = optp->tail_tol;
    double free_r = optp->free_radius;
    auto halt = [&g, tail_tol, free_r, n](const Vec& X, const Vec& Xi) {
      return norm(X, n) >= free_r && std::abs(g(X, Xi)) < tail_tol;
    };
    FlowIntegral I =
        integrate_along_flow(*f, {x, xhat}, -optp->ray_budget, g, halt, optp->tol);
    if (!I.halted) warnings->fetch_add(1);
    return -cut * I.value / mag;
  };

  auto p_fixed = [f, b_eval, chis, optp, n](const Vec& x, const Vec& xi) -> double {
    double mag = norm(xi, n);
    double cut = (*chis)(0.5 * mag);
    if (cut == 0.0 || mag == 0.0) return 0.0;
    Vec xhat = scale(xi, 1.0 / mag, n);
    auto g = [&b_eval, mag, n](const Vec& X, const Vec& Xi) {
      return b_eval(X, scale(Xi, mag, n)).real();
    };
    double v = integrate_along_flow_fixed(*f, {x, xhat}, -optp->smooth_horizon,
                                          optp->smooth_steps, g);
    return -cut * v / mag;
  };

  auto wrap = [n](std::function<double(const Vec&, const Vec&)> fn, Parity par,
                  const std::string& role) {
    Symbol s;
    s.dim = n;
    s.order_m = 0.0;
    s.parity = par;
    s.class_tag = "integrating-factor";
    s.metadata["role"] = role;
    s.evaluate = [fn](const Vec& x, const Vec& xi) { return Complex(fn(x, xi), 0.0); };
    return s;
  };

  fam.p = wrap(p_adaptive, Parity::None, "p");
  fam.p_smooth = wrap(p_fixed, Parity::None, "p-smooth");

  auto even_of = [n](std::function<double(const Vec&, const Vec&)> base) {
    return [base, n](const Vec& x, const Vec& xi) {
      return 0.5 * (base(x, xi) + base(x, scale(xi, -1.0, n)));
    };
  };
  auto pe = even_of(p_adaptive);
  auto pe_fixed = even_of(p_fixed);
  fam.p_even = wrap(pe, Parity::Even, "p-even");
  fam.p_even_smooth = wrap(pe_fixed, Parity::Even, "p-even-smooth");
  fam.k = wrap([pe](const Vec& x, const Vec& xi) { return std::exp(pe(x, xi)); },
               Parity::Even, "k");
  fam.k_tilde =
      wrap([pe](const Vec& x, const Vec& xi) { return std::exp(-pe(x, xi)); },
           Parity::Even, "k-tilde");
  fam.k_smooth = wrap(
      [pe_fixed](const Vec& x, const Vec& xi) { return std::exp(pe_fixed(x, xi)); },
      Parity::Even, "k-smooth");
  return fam;
}

// ---------------------------------------------------------------------------
// Cancellation check.
// ---------------------------------------------------------------------------

std::vector<CancellationRow> verify_cancellation(const IntegratingFactorFamily& family,
                                                 const CoefficientField& field_R,
                                                 const std::vector<double>& xi_mags,
                                                 const std::vector<PhasePoint>& probes,
                                                 double h0) {
  const int n = field_R.dim;
  std::vector<CancellationRow> rows(xi_mags.size());
  const std::size_t total = xi_mags.size() * probes.size();
  std::vector<double> res_pe(total, 0.0), res_k(total, 0.0);

  parallel_for(total, [&](std::size_t idx) {
    std::size_t mi = idx / probes.size();
    const PhasePoint& pr = probes[idx % probes.size()];
    double mag = xi_mags[mi];
    Vec dir = scale(pr.xi, 1.0 / norm(pr.xi, n), n);
    Vec xi = scale(dir, mag, n);
    const Vec& x = pr.x;

    // Analytic gradients of h2.
    Mat A = field_R.eval(x);
    Vec dh2_xi = scale(matvec(A, xi, n), 2.0, n);
    Vec dh2_x{};
    for (int k = 0; k < n; ++k)
      for (int l = 0; l < n; ++l) {
        Vec g = field_R.grad_entry(k, l, x);
        for (int j = 0; j < n; ++j) dh2_x[j] += g[j] * xi[k] * xi[l];
      }

    double bmag = bracket(mag);
    double h_x = h0 * std::pow(bmag, -1.5);
    double h_xi = h0 * std::pow(bmag, -0.5);
    auto bracket_with = [&](const Symbol& sym) {
      double acc = 0.0;
      for (int j = 0; j < n; ++j) {
        Vec xp = x, xm = x, kp = xi, km = xi;
        xp[j] += h_x;
        xm[j] -= h_x;
        kp[j] += h_xi;
        km[j] -= h_xi;
        double ds_x = (sym.evaluate(xp, xi).real() - sym.evaluate(xm, xi).real()) /
                      (2.0 * h_x);
        double ds_xi = (sym.evaluate(x, kp).real() - sym.evaluate(x, km).real()) /
                       (2.0 * h_xi);
        acc += dh2_xi[j] * ds_x - dh2_x[j] * ds_xi;
      }
      return acc;
    };

    double b_val = family.b.evaluate(x, xi).real();
    res_pe[idx] = std::abs(bracket_with(family.p_even_smooth) - b_val);
    double k_val = family.k_smooth.evaluate(x, xi).real();
    res_k[idx] = std::abs(bracket_with(family.k_smooth) - k_val * b_val);
  });

  for (std::size_t mi = 0; mi < xi_mags.size(); ++mi) {
    CancellationRow row;
    row.xi_mag = xi_mags[mi];
    for (std::size_t pi = 0; pi < probes.size(); ++pi) {
      row.res_p_even = std::max(row.res_p_even, res_pe[mi * probes.size() + pi]);
      row.res_k = std::max(row.res_k, res_k[mi * probes.size() + pi]);
    }
    rows[mi] = row;
  }
  return rows;
}

// ---------------------------------------------------------------------------
// Light-cone decomposition.
// ---------------------------------------------------------------------------

ProjectedDecomposition decompose_projected(const IntegratingFactorFamily& family,
                                           const CoefficientField& field_R, int j0,
                                           int j_max,
                                           const std::vector<PhasePoint>& probes) {
  if (j_max < j0) throw ArgumentError("decompose_projected: empty dyadic range");
  const int n = family.dim;
  Mat Ah = field_R.asymptotic;
  auto theta = std::make_shared<CutoffProfile>(plateau_profile(1.0, 2.0));
  auto chi = std::make_shared<CutoffProfile>(rising_profile(1.0, 2.0));
  auto psi = std::make_shared<CutoffProfile>(sign_profile());
  auto pe = family.p_even.evaluate;

  // Radial windows: core at 2^{j0}, dyadic shells, tail beyond 2^{j_max+1}.
  auto shell = [theta](double r, int j) {
    return (*theta)(r / std::pow(2.0, j + 1)) - (*theta)(r / std::pow(2.0, j));
  };

  ProjectedDecomposition dec;
  dec.j0 = j0;
  dec.j_max = j_max;

  dec.q = [pe, theta, chi, shell, j0, j_max, n](const Vec& x, const Vec& xi) {
    double r = norm(x, n);
    double pval = pe(x, xi).real();
    double acc = (*theta)(r / std::pow(2.0, j0)) * pval;          // core
    acc += (1.0 - (*theta)(r / std::pow(2.0, j_max + 1))) * pval;  // tail
    for (int j = j0; j <= j_max; ++j)
      acc += shell(r, j) * pval * (1.0 - (*chi)(r / (10.0 * std::pow(2.0, j))));
    return acc;
  };

  // a_j(z; x, xi) per the dyadic light-cone construction; the first argument
  // of p_even is the projected point moved 2^{j+1} along the A_h xi ray.
  auto a_sum = [pe, theta, chi, psi, shell, Ah, j0, j_max, n](const Vec& z, const Vec& x,
                                                             const Vec& xi) {
    double rx = norm(x, n);
    double rxi = norm(xi, n);
    if (rx == 0.0 || rxi == 0.0) return 0.0;
    Vec u = scale(matvec(Ah, xi, n), 1.0 / rxi, n);
    double cosang = dot(x, scale(u, 1.0, n), n) / rx;
    double sgn = (*psi)(cosang);
    double rz = norm(z, n);
    double acc = 0.0;
    for (int j = j0; j <= j_max; ++j) {
      double gate = (*chi)(rx / (10.0 * std::pow(2.0, j)));
      if (gate == 0.0) continue;
      double window = (*theta)(rz / std::pow(2.0, j + 1));
      if (window == 0.0) continue;
      Vec w = add(z, scale(u, std::pow(2.0, j + 1) * sgn, n), n);
      double piece = shell(norm(w, n), j) * pe(w, xi).real();
      acc += gate * window * piece;
    }
    return acc;
  };

  auto q_fn = dec.q;
  dec.a = [q_fn, a_sum](const Vec& z, const Vec& x, const Vec& xi) {
    return std::exp(q_fn(x, xi)) * (std::exp(a_sum(z, x, xi)) - 1.0);
  };

  auto k = family.k.evaluate;
  auto a_fn = dec.a;
  std::vector<double> residuals(probes.size());
  parallel_for(probes.size(), [&](std::size_t i) {
    const PhasePoint& pr = probes[i];
    Vec dir = matvec(Ah, pr.xi, n);
    Vec z = norm2(dir, n) > 0.0 ? projection(pr.x, dir, n) : pr.x;
    double recon = a_fn(z, pr.x, pr.xi) + std::exp(q_fn(pr.x, pr.xi));
    residuals[i] = std::abs(k(pr.x, pr.xi).real() - recon);
  });
  for (std::size_t i = 0; i < probes.size(); ++i)
    if (residuals[i] > dec.max_residual) {
      dec.max_residual = residuals[i];
      dec.worst = probes[i];
    }
  return dec;
}

}  // namespace schrodlab
