#ifndef SCHRODLAB_FACTOR_HPP
#define SCHRODLAB_FACTOR_HPP

#include <atomic>
#include <memory>

#include "schrodlab/symbol.hpp"

namespace schrodlab {

// h2(x, xi) of a field as a Symbol (shares the field by value).
Symbol hamiltonian_symbol(const CoefficientField& field);

// ---------------------------------------------------------------------------
// Escape symbol.
// ---------------------------------------------------------------------------

struct DoiProfiles {
  CutoffProfile psi;   // profile in |x|^2: 0 near 0, 1 for large |x|^2
  CutoffProfile phi1;  // plateau in |x|: 1 on |x| <= M+1, 0 outside its outer radius
  CutoffProfile phi2;  // rising in |xi|: kills |xi| <= 1
};

// p4 = c2 p1 + p3 with
//   p1 = <xi>^{-1} psi(|x|^2) 4 (x . A(x) xi)
//   p2 = -|xi|^{-1} int_0^inf phi1(|X(u; x, xi/|xi|)|) <|xi| Xi(u)> du
//   p3 = phi1(|x|) phi2(|xi|) p2
// The p2 ray is truncated once it leaves supp phi1 outgoing; a ray that
// fails to leave within ray_budget throws TrappingSuspectedError.
Symbol doi_symbol(const CoefficientField& field, double M, double c2,
                  const DoiProfiles& profiles, double ray_budget = 200.0,
                  double tol = 1e-10);

struct EscapeReport {
  double min_slack = 0.0;  // min over grid of H_{h2} p4 - <x>^{-N} |xi|
  PhasePoint worst;
  double fitted_c = 0.0;   // smallest c making the inequality hold on the grid
};

EscapeReport verify_escape_inequality(const Symbol& p4, const CoefficientField& field,
                                      int N_weight, const std::vector<PhasePoint>& grid,
                                      double h = 1e-3);

// Doubles c2 until the grid slack is positive (or the doubling cap is hit);
// returns the symbol together with the c2 that worked and its report.
struct ScaledDoiSymbol {
  Symbol p4;
  double c2 = 1.0;
  EscapeReport report;
};

ScaledDoiSymbol doi_symbol_autoscaled(const CoefficientField& field, double M,
                                      const DoiProfiles& profiles, int N_weight,
                                      const std::vector<PhasePoint>& grid,
                                      double ray_budget = 200.0, double c2_init = 1.0,
                                      int max_doublings = 12);

// ---------------------------------------------------------------------------
// Integrating-factor family.
// ---------------------------------------------------------------------------

struct IntegratingFactorOptions {
  double s_param = 0.0;
  double tail_tol = 1e-8;     // truncate the backward integral below this
  double ray_budget = 200.0;  // backward unit-ray horizon for the adaptive eval
  double free_radius = 8.0;   // beyond this the tail criterion may fire
  double tol = 1e-10;         // adaptive ray tolerance
  double smooth_horizon = 16.0;  // fixed-step evaluator: backward unit-ray span
  int smooth_steps = 8000;       // fixed-step evaluator: RK4 step count
};

struct IntegratingFactorFamily {
  int dim = 2;
  double s_param = 0.0;
  Symbol b;             // generator: s-term minus Re b1
  Symbol p;             // backward flow integral of b (adaptive evaluator)
  Symbol p_even;        // symmetrization (p(x,xi) + p(x,-xi)) / 2
  Symbol k;             // exp(p_even)
  Symbol k_tilde;       // exp(-p_even)
  Symbol p_smooth;      // fixed-step evaluator of p (for finite differencing)
  Symbol p_even_smooth;
  Symbol k_smooth;
  // Rays that hit ray_budget before the tail criterion (warning, not error).
  std::shared_ptr<std::atomic<long>> truncation_warnings;
};

// Family of Symbols generated by b = s_param * sum d_j a_kl xi_j xi_k xi_l
// <xi>^{-2} - Re b1, integrated backward along the flow.  The chi profile
// gates low frequencies as chi(|xi| / 2).
IntegratingFactorFamily integrating_factor(const CoefficientField& field_R,
                                           const Symbol& b1, double s_param,
                                           const CutoffProfile& chi,
                                           const IntegratingFactorOptions& opt = {});

// ---------------------------------------------------------------------------
// Cancellation and decomposition checks.
// ---------------------------------------------------------------------------

struct CancellationRow {
  double xi_mag = 0.0;
  double res_p_even = 0.0;  // max |{h2, p_even} - b| over probes at this |xi|
  double res_k = 0.0;       // max |{h2, k} - k b|
};

// Bracket residuals per |xi| octave.  Gradients of h2 are analytic (field
// closures); derivatives of p_even and k come from the fixed-step smooth
// evaluators with steps h0 <xi>^{-3/2} in x and h0 <xi>^{-1/2} in xi, so the
// finite-difference noise also shrinks with |xi|.
std::vector<CancellationRow> verify_cancellation(const IntegratingFactorFamily& family,
                                                 const CoefficientField& field_R,
                                                 const std::vector<double>& xi_mags,
                                                 const std::vector<PhasePoint>& probes,
                                                 double h0 = 0.02);

struct ProjectedDecomposition {
  int j0 = 0;
  int j_max = 0;
  // q(x, xi): the part of p_even kept away from the light cone.
  std::function<double(const Vec&, const Vec&)> q;
  // a(z; x, xi): the projected-class part; reconstruction is
  // k(x, xi) = a(P(x, A_h xi); x, xi) + exp(q(x, xi)).
  std::function<double(const Vec&, const Vec&, const Vec&)> a;
  double max_residual = 0.0;
  PhasePoint worst;
};

// Dyadic light-cone decomposition of k for an ultrahyperbolic family; the
// reconstruction residual is evaluated on the probe grid.
ProjectedDecomposition decompose_projected(const IntegratingFactorFamily& family,
                                           const CoefficientField& field_R, int j0,
                                           int j_max,
                                           const std::vector<PhasePoint>& probes);

}  // namespace schrodlab

#endif  // SCHRODLAB_FACTOR_HPP
