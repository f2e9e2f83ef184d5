#include "schrodlab/nlsolve.hpp"

#include <algorithm>

#include <json.hpp>

namespace schrodlab {

namespace {

Complex ipow(Complex z, int k) {
  Complex r(1.0, 0.0);
  for (int i = 0; i < k; ++i) r *= z;
  return r;
}

bool uses_gradients(const NonlinearProblem& p) {
  for (const Monomial& m : p.monomials)
    for (int j = 0; j < kMaxDim; ++j)
      if (m.pow_grad[j] > 0 || m.pow_grad_conj[j] > 0) return true;
  return false;
}

double resolved_dt_index(const PicardConfig& cfg) {
  return std::isnan(cfg.dt_index) ? cfg.s - 2.0 : cfg.dt_index;
}

// Max-norm difference of two traces over their shared snapshot times.
double trace_delta(const EvolutionTrace& a, const EvolutionTrace& b,
                   const PicardConfig& cfg) {
  std::size_t m = std::min(a.snapshots.size(), b.snapshots.size());
  if (m < 3) throw ArgumentError("iterate traces too short to compare");
  EvolutionTrace diff;
  diff.dt = a.dt;
  for (std::size_t i = 0; i < m; ++i) {
    if (std::abs(a.snapshots[i].first - b.snapshots[i].first) > 1e-12)
      throw ArgumentError("iterate traces sample different times");
    GridField d = a.snapshots[i].second;
    for (std::size_t k = 0; k < d.values.size(); ++k)
      d.values[k] -= b.snapshots[i].second.values[k];
    d.spectral_cache.reset();
    diff.snapshots.emplace_back(a.snapshots[i].first, std::move(d));
  }
  return lambda_norms(diff, cfg.s, cfg.N_weight, resolved_dt_index(cfg)).max;
}

PicardState make_state(int index, EvolutionTrace trace, const PicardConfig& cfg,
                       std::vector<double> deltas) {
  PicardState st;
  st.iterate_index = index;
  st.diverged = trace.blew_up;
  st.lambda_record =
      (st.diverged || trace.snapshots.size() < 3)
          ? LambdaRecord{}
          : lambda_norms(trace, cfg.s, cfg.N_weight, resolved_dt_index(cfg));
  st.trace = std::move(trace);
  st.delta_history = std::move(deltas);
  return st;
}

}  // namespace

int monomial_degree(const Monomial& m) {
  int d = m.pow_u + m.pow_conj;
  for (int j = 0; j < kMaxDim; ++j) d += m.pow_grad[j] + m.pow_grad_conj[j];
  return d;
}

void validate_problem(const NonlinearProblem& problem) {
  for (const Monomial& m : problem.monomials) {
    if (m.pow_u < 0 || m.pow_conj < 0)
      throw ArgumentError("negative monomial power");
    for (int j = 0; j < kMaxDim; ++j)
      if (m.pow_grad[j] < 0 || m.pow_grad_conj[j] < 0)
        throw ArgumentError("negative monomial power");
    for (int j = problem.spec.field.dim; j < kMaxDim; ++j)
      if (m.pow_grad[j] > 0 || m.pow_grad_conj[j] > 0)
        throw ArgumentError("monomial uses a gradient beyond the dimension");
    if (monomial_degree(m) < 2)
      throw ArgumentError("nonlinearity has a constant or linear monomial");
  }
}

GridField polynomial_term(const NonlinearProblem& problem, const GridField& u) {
  GridField r = zero_field(u.grid);
  if (problem.monomials.empty()) return r;
  int n = u.grid.dim;
  std::array<GridField, kMaxDim> du;
  if (uses_gradients(problem)) {
    for (int j = 0; j < n; ++j) {
      std::array<int, kMaxDim> alpha{};
      alpha[j] = 1;
      du[j] = spectral_derivative(u, alpha);
    }
  }
  for (const Monomial& m : problem.monomials) {
    for (std::size_t i = 0; i < r.values.size(); ++i) {
      Complex v = m.coeff * ipow(u.values[i], m.pow_u) *
                  ipow(std::conj(u.values[i]), m.pow_conj);
      for (int j = 0; j < n; ++j) {
        if (m.pow_grad[j]) v *= ipow(du[j].values[i], m.pow_grad[j]);
        if (m.pow_grad_conj[j])
          v *= ipow(std::conj(du[j].values[i]), m.pow_grad_conj[j]);
      }
      r.values[i] += v;
    }
  }
  r.spectral_cache.reset();
  return r;
}

LambdaRecord lambda_norms(const EvolutionTrace& trace, double s, int N_weight,
                          double dt_index) {
  std::size_t m = trace.snapshots.size();
  if (m < 3) throw ArgumentError("lambda norms need at least 3 snapshots");
  if (std::isnan(dt_index)) dt_index = s - 2.0;
  LambdaRecord rec;
  std::vector<double> st(m);
  for (std::size_t i = 0; i < m; ++i) {
    const GridField& u = trace.snapshots[i].second;
    rec.sup_hs = std::max(rec.sup_hs, weighted_norm(u, s, 0.0));
    double w = weighted_norm(u, s + 0.5, -static_cast<double>(N_weight));
    st[i] = w * w;
    rec.weighted_sup =
        std::max(rec.weighted_sup, weighted_norm(u, 0.0, 2.0 * N_weight));

    std::size_t lo = i ? i - 1 : 0;
    std::size_t hi = i + 1 < m ? i + 1 : m - 1;
    double span = trace.snapshots[hi].first - trace.snapshots[lo].first;
    GridField dudt = trace.snapshots[hi].second;
    for (std::size_t k = 0; k < dudt.values.size(); ++k)
      dudt.values[k] =
          (dudt.values[k] - trace.snapshots[lo].second.values[k]) / span;
    dudt.spectral_cache.reset();
    rec.dt_weighted = std::max(
        rec.dt_weighted, weighted_norm(dudt, dt_index, 2.0 * N_weight));
  }
  for (std::size_t i = 0; i + 1 < m; ++i)
    rec.space_time += 0.5 * (st[i] + st[i + 1]) *
                      (trace.snapshots[i + 1].first - trace.snapshots[i].first);
  rec.max = std::max({rec.sup_hs, rec.space_time, rec.dt_weighted, rec.weighted_sup});
  return rec;
}

PicardState initial_iterate(const NonlinearProblem& problem, const GridField& u0,
                            double T, const PicardConfig& cfg) {
  validate_problem(problem);
  return make_state(0, evolve_linear(u0, problem.spec, T, cfg.evolve), cfg, {});
}

PicardState duhamel_iterate(const NonlinearProblem& problem, const PicardState& prev,
                            const GridField& u0, double T,
                            const PicardConfig& cfg) {
  validate_problem(problem);
  if (!(prev.trace.snapshots.back().second.grid == u0.grid))
    throw ArgumentError("previous iterate lives on a different grid");
  if (prev.trace.snapshots.back().first < T - 1e-12)
    throw ArgumentError("previous iterate does not cover the horizon");

  LinearOperatorSpec spec = problem.spec;
  if (!problem.monomials.empty()) {
    auto times = std::make_shared<std::vector<double>>();
    auto values = std::make_shared<std::vector<GridField>>();
    for (const auto& [t, v] : prev.trace.snapshots) {
      times->push_back(t);
      values->push_back(polynomial_term(problem, v));
    }
    spec.forcing = [times, values](double t) {
      const std::vector<double>& tt = *times;
      auto it = std::upper_bound(tt.begin(), tt.end(), t);
      std::size_t hi = std::min<std::size_t>(
          std::max<std::ptrdiff_t>(it - tt.begin(), 1), tt.size() - 1);
      std::size_t lo = hi - 1;
      double w = (t - tt[lo]) / (tt[hi] - tt[lo]);
      w = std::clamp(w, 0.0, 1.0);
      GridField f = (*values)[lo];
      for (std::size_t k = 0; k < f.values.size(); ++k)
        f.values[k] = (1.0 - w) * f.values[k] + w * (*values)[hi].values[k];
      f.spectral_cache.reset();
      return f;
    };
  }

  EvolutionTrace tr = evolve_linear(u0, spec, T, cfg.evolve);
  std::vector<double> deltas = prev.delta_history;
  if (!tr.blew_up) deltas.push_back(trace_delta(tr, prev.trace, cfg));
  return make_state(prev.iterate_index + 1, std::move(tr), cfg, std::move(deltas));
}

SolveResult solve_nonlinear(const NonlinearProblem& problem, const GridField& u0,
                            double T_init, double tol, int max_iter,
                            const PicardConfig& cfg) {
  if (T_init <= 0.0 || tol <= 0.0 || max_iter < 1)
    throw ArgumentError("solve_nonlinear needs positive horizon, tolerance, iterations");
  SolveResult out;
  ContractionReport& rep = out.report;
  double T = T_init;

  for (;;) {
    PicardState state = initial_iterate(problem, u0, T, cfg);
    if (T < 2.0 * state.trace.dt) {
      rep.no_certified_existence = true;
      out.trace = std::move(state.trace);
      return out;
    }
    rep.deltas.clear();
    rep.ratios.clear();
    rep.ledger.clear();
    rep.ledger.push_back(state.lambda_record);
    rep.iterations = 1;
    bool restart = false;

    for (int m = 1; m <= max_iter && !restart; ++m) {
      PicardState next = duhamel_iterate(problem, state, u0, T, cfg);
      ++rep.iterations;
      if (next.diverged) {
        restart = true;
        break;
      }
      double delta = next.delta_history.back();
      rep.deltas.push_back(delta);
      rep.ledger.push_back(next.lambda_record);
      if (rep.deltas.size() >= 2) {
        double prev = rep.deltas[rep.deltas.size() - 2];
        double ratio = prev > 0.0 ? delta / prev : 0.0;
        rep.ratios.push_back(ratio);
        if (ratio > 0.5) {
          restart = true;
          break;
        }
      }
      state = std::move(next);
      if (delta < tol) {
        rep.converged = true;
        break;
      }
    }

    if (!restart) {
      rep.certified_T = rep.converged ? T : 0.0;
      std::size_t k = std::min<std::size_t>(rep.ratios.size(), 3);
      rep.certified = rep.converged;
      for (std::size_t i = rep.ratios.size() - k; i < rep.ratios.size(); ++i)
        if (rep.ratios[i] > 0.5) rep.certified = false;
      out.trace = std::move(state.trace);
      return out;
    }
    T *= 0.5;
    ++rep.restarts;
  }
}

std::string contraction_report_json(const ContractionReport& report) {
  nlohmann::json j;
  j["deltas"] = report.deltas;
  j["ratios"] = report.ratios;
  j["converged"] = report.converged;
  j["certified"] = report.certified;
  j["certified_T"] = report.certified_T;
  j["iterations"] = report.iterations;
  j["restarts"] = report.restarts;
  j["no_certified_existence"] = report.no_certified_existence;
  nlohmann::json ledger = nlohmann::json::array();
  for (const LambdaRecord& r : report.ledger)
    ledger.push_back({{"sup_hs", r.sup_hs},
                      {"space_time", r.space_time},
                      {"dt_weighted", r.dt_weighted},
                      {"weighted_sup", r.weighted_sup},
                      {"max", r.max}});
  j["lambda_ledger"] = ledger;
  return j.dump(2);
}

double duhamel_residual(const NonlinearProblem& problem, const GridField& u0,
                        const EvolutionTrace& trace, const PicardConfig& cfg) {
  PicardState st = make_state(0, trace, cfg, {});
  PicardState re =
      duhamel_iterate(problem, st, u0, trace.snapshots.back().first, cfg);
  if (re.diverged) throw LabError("integral map diverged on the converged trace");
  return re.delta_history.back();
}

ComparisonRecord crosscheck_direct(const NonlinearProblem& problem,
                                   const GridField& u0, double T, double tol,
                                   int max_iter, const PicardConfig& cfg) {
  ComparisonRecord rec;

  // Picard limit at the fixed horizon (no halving: the caller chose T).
  PicardState state = initial_iterate(problem, u0, T, cfg);
  for (int m = 1; m <= max_iter; ++m) {
    PicardState next = duhamel_iterate(problem, state, u0, T, cfg);
    if (next.diverged) return rec;
    double delta = next.delta_history.back();
    state = std::move(next);
    if (delta < tol) break;
  }
  const EvolutionTrace& tr = state.trace;

  // Direct RK4 on the same time grid.
  LinearRhs lin(problem.spec, u0.grid);
  auto rhs = [&](double t, const GridField& u) {
    GridField r = lin(t, u);
    if (!problem.monomials.empty()) {
      GridField p = polynomial_term(problem, u);
      for (std::size_t i = 0; i < r.values.size(); ++i) r.values[i] += p.values[i];
      r.spectral_cache.reset();
    }
    return r;
  };
  auto step_add = [](GridField& y, double a, const GridField& x) {
    for (std::size_t i = 0; i < y.values.size(); ++i) y.values[i] += a * x.values[i];
    y.spectral_cache.reset();
  };
  double dt = tr.dt;
  long steps = std::lround(T / dt);
  GridField u = u0;
  GridField at_half = u0;
  long half = steps / 2;
  for (long k = 0; k < steps; ++k) {
    double t = k * dt;
    GridField k1 = rhs(t, u);
    GridField s2 = u;
    step_add(s2, 0.5 * dt, k1);
    GridField k2 = rhs(t + 0.5 * dt, s2);
    GridField s3 = u;
    step_add(s3, 0.5 * dt, k2);
    GridField k3 = rhs(t + 0.5 * dt, s3);
    GridField s4 = u;
    step_add(s4, dt, k3);
    GridField k4 = rhs(t + dt, s4);
    step_add(u, dt / 6.0, k1);
    step_add(u, dt / 3.0, k2);
    step_add(u, dt / 3.0, k3);
    step_add(u, dt / 6.0, k4);
    for (const Complex& v : u.values)
      if (!std::isfinite(v.real()) || !std::isfinite(v.imag())) return rec;
    if (k + 1 == half) at_half = u;
  }

  auto rel_dev = [](const GridField& a, const GridField& b) {
    double num = 0.0, den = 0.0;
    for (std::size_t i = 0; i < a.values.size(); ++i) {
      num += std::norm(a.values[i] - b.values[i]);
      den += std::norm(b.values[i]);
    }
    return den > 0.0 ? std::sqrt(num / den) : std::sqrt(num);
  };

  // Nearest stored snapshots to T/2 and T.
  const GridField* pic_half = nullptr;
  double t_half = half * dt;
  for (const auto& [t, v] : tr.snapshots)
    if (std::abs(t - t_half) < 1e-12) pic_half = &v;
  if (!pic_half) throw LabError("midpoint snapshot missing from the trace");
  rec.available = true;
  rec.t_half = t_half;
  rec.t_final = T;
  rec.dev_half = rel_dev(at_half, *pic_half);
  rec.dev_final = rel_dev(u, tr.snapshots.back().second);
  return rec;
}

}  // namespace schrodlab
