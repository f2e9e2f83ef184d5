#ifndef SCHRODLAB_NLSOLVE_HPP
#define SCHRODLAB_NLSOLVE_HPP

#include <cmath>
#include <string>

#include "schrodlab/evolve.hpp"

namespace schrodlab {

// One term  coeff * u^p * conj(u)^q * prod_j (d_j u)^{r_j} (d_j conj u)^{s_j}
// of the nonlinearity.  Total degree must be >= 2.
struct Monomial {
  Complex coeff{1.0, 0.0};
  int pow_u = 0;
  int pow_conj = 0;
  std::array<int, kMaxDim> pow_grad{};
  std::array<int, kMaxDim> pow_grad_conj{};
};

int monomial_degree(const Monomial& m);

struct NonlinearProblem {
  LinearOperatorSpec spec;
  std::vector<Monomial> monomials;  // empty = linear problem
};

// Throws ArgumentError on constant or linear monomials or negative powers.
void validate_problem(const NonlinearProblem& problem);

// Pointwise evaluation of the nonlinearity on a field (gradients spectral).
GridField polynomial_term(const NonlinearProblem& problem, const GridField& u);

// Discrete norms of a trace: sup-in-time H^s, weighted space-time smoothing,
// weighted sup of the time derivative (centered differences, one-sided at the
// ends) at Sobolev index dt_index (default s - 2), and the weighted sup of
// the field itself; `max` is the largest of the four.
struct LambdaRecord {
  double sup_hs = 0.0;        // sup_t |u|_{H^s}
  double space_time = 0.0;    // int |<x>^{-N} J^{s+1/2} u|^2 dt
  double dt_weighted = 0.0;   // sup_t |<x>^{2N} J^{dt_index} du/dt|
  double weighted_sup = 0.0;  // sup_t |<x>^{2N} u|
  double max = 0.0;
};

LambdaRecord lambda_norms(const EvolutionTrace& trace, double s, int N_weight,
                          double dt_index = std::nan(""));

struct PicardConfig {
  EvolveConfig evolve;
  double s = 1.0;
  int N_weight = 1;
  double dt_index = std::nan("");  // default s - 2
};

struct PicardState {
  int iterate_index = 0;
  EvolutionTrace trace;
  LambdaRecord lambda_record;
  // max-norm of successive iterate differences, one entry per completed
  // iteration after the first.
  std::vector<double> delta_history;
  bool diverged = false;  // inner linear solve blew up; trace is partial
};

// v^(0): the linear evolution of u0 (the first term of the integral map).
PicardState initial_iterate(const NonlinearProblem& problem, const GridField& u0,
                            double T, const PicardConfig& cfg = {});

// One pass of the integral map: evolve the linear part with forcing
// P(v^(m), grad v^(m), ...) interpolated linearly in t between the previous
// iterate's snapshots.  pre: prev.trace covers [0, T] on the same grid.
PicardState duhamel_iterate(const NonlinearProblem& problem, const PicardState& prev,
                            const GridField& u0, double T,
                            const PicardConfig& cfg = {});

struct ContractionReport {
  std::vector<double> deltas;
  std::vector<double> ratios;
  bool converged = false;
  // Successive ratios <= 1/2 over the final (up to) 3 iterations.
  bool certified = false;
  double certified_T = 0.0;
  int iterations = 0;  // Picard states computed, including v^(0)
  int restarts = 0;    // horizon halvings
  bool no_certified_existence = false;  // T underflowed below dt
  std::vector<LambdaRecord> ledger;     // one record per kept iterate
};

struct SolveResult {
  EvolutionTrace trace;  // converged iterate (or last attempt)
  ContractionReport report;
};

// Picard iteration with horizon halving whenever the contraction ratio
// exceeds 1/2 or an iterate diverges.
SolveResult solve_nonlinear(const NonlinearProblem& problem, const GridField& u0,
                            double T_init, double tol, int max_iter,
                            const PicardConfig& cfg = {});

std::string contraction_report_json(const ContractionReport& report);

// Residual of the discrete integral equation at the trace: re-apply the map
// to `trace` and return the max-norm of the change.
double duhamel_residual(const NonlinearProblem& problem, const GridField& u0,
                        const EvolutionTrace& trace, const PicardConfig& cfg = {});

struct ComparisonRecord {
  bool available = false;  // false if either path blew up
  double t_half = 0.0;
  double t_final = 0.0;
  double dev_half = 0.0;   // relative L2 deviation at T/2
  double dev_final = 0.0;  // and at T
};

// Direct RK4 on the full nonlinear semi-discretization against the Picard
// limit at the given horizon.
ComparisonRecord crosscheck_direct(const NonlinearProblem& problem,
                                   const GridField& u0, double T, double tol,
                                   int max_iter, const PicardConfig& cfg = {});

}  // namespace schrodlab

#endif  // SCHRODLAB_NLSOLVE_HPP
