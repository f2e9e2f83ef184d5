#ifndef SCHRODLAB_PDO_HPP
#define SCHRODLAB_PDO_HPP

#include "schrodlab/grid.hpp"
#include "schrodlab/symbol.hpp"

namespace schrodlab {

// v(x_j) = sum_k e^{i x_j.xi_k} p(x_j, xi_k) u_hat(xi_k) (freq cell vol) /
// (2pi)^{n/2}.  Nyquist rows are skipped in every symbol application.  Cost
// O(N^{2n}), parallel over output nodes; symbols tagged with metadata
// "x-independent" = "true" take the O(N^n log N) multiplier fast path.
GridField apply_pdo(const Symbol& p, const GridField& u);

// Pure frequency multiplier (fast path, FFT both ways).
GridField apply_multiplier(const std::function<Complex(const Vec&)>& m,
                           const GridField& u);

// <xi>^s multiplier; s = 0 returns the input untouched.
GridField bessel(double s, const GridField& u);

// Exact conjugate transpose of the discrete apply_pdo matrix, matrix-free:
// w_hat(xi_k) = sum_j e^{-i x_j.xi_k} conj(p(x_j, xi_k)) u(x_j) (cell vol) /
// (2pi)^{n/2}, then an inverse transform.
GridField adjoint_apply(const Symbol& p, const GridField& u);

// Spectral derivative: multiplier prod_a (i xi_a)^{alpha_a}.
GridField spectral_derivative(const GridField& u,
                              const std::array<int, kMaxDim>& alpha);

struct OperatorNormEstimate {
  double value = 0.0;
  bool converged = false;
  int iterations = 0;
};

// Power iteration on Psi_p^* Psi_p from a seeded random start; returns the
// square root of the dominant-eigenvalue estimate.  precompose_order != 0
// estimates |Psi_p J^{precompose_order}| instead (J self-adjoint).
OperatorNormEstimate operator_norm_estimate(const Symbol& p, const BoxGrid& grid,
                                            int iters, std::uint64_t seed,
                                            double precompose_order = 0.0);

// Which finite expansion the residual is measured against:
//   LeftWeight:  phi d^alpha Psi_b    - Psi_{c1},  c1 = sum_{b<=a,|b|<N}
//                C(a,b) i^{|a-b|} xi^{a-b} phi(x) d_x^b b
//   RightWeight: Psi_b phi d^alpha    - Psi_{c2},  c2 = (i xi)^alpha
//                sum_{|b|<N} (i^{-|b|}/b!) d_xi^b b d_x^b phi
//   Adjoint:     Psi_b^*              - Psi_c,     c  = sum_{|g|<N}
//                (i^{-|g|}/g!) d_x^g d_xi^g conj(b)      (alpha, phi unused)
//   Product:     Psi_b Psi_{b2}^*     - Psi_c,     c  = sum_{|g|<N}
//                (i^{-|g|}/g!) d_xi^g [ b d_x^g conj(b2) ]  (phi unused)
enum class CompositionVariant { LeftWeight, RightWeight, Adjoint, Product };

// Relative L2 residual |E u| / |u|; symbol derivatives by central
// differences with step h.  pre: |alpha| <= 2, 1 <= N_order <= 3.
double composition_residual(const std::function<Complex(const Vec&)>& phi,
                            const std::array<int, kMaxDim>& alpha, const Symbol& b,
                            int N_order, const GridField& u,
                            CompositionVariant variant = CompositionVariant::LeftWeight,
                            const Symbol* b2 = nullptr, double h = 1e-3);

// |LHS - RHS|_{L2} of the exact weight-commutator identity
//   x^alpha Psi_p u - Psi_p[x^alpha u]
//     = sum_{0<beta<=alpha} C(alpha,beta) Psi_{i^{|beta|} d_xi^beta p}
//       [x^{alpha-beta} u],
// with d_xi^beta p by central differences of step h.  The weight x^alpha is
// evaluated on the box chart, so u must be supported away from the walls.
double weight_commutator_residual(const Symbol& p,
                                  const std::array<int, kMaxDim>& alpha,
                                  const GridField& u, double h);

// |<x>^{N_weight} J^s u|_{L2} on the box chart.
double weighted_norm(const GridField& u, double s, double N_weight);

// Periodic multilinear sample of |u| at an off-grid point.
Complex sample_field(const GridField& u, const Vec& x);

struct DecayProbeRow {
  double radius = 0.0;
  double magnitude = 0.0;
};

struct DecayProbe {
  Vec direction{};
  std::vector<DecayProbeRow> rows;
  double fitted_exponent = 0.0;  // least-squares slope of -log|v| vs log r
};

// Samples |v| along rays from the origin and fits a power-law decay
// exponent per direction.  Radii must stay inside the box.
std::vector<DecayProbe> decay_probe(const GridField& v,
                                    const std::vector<Vec>& directions,
                                    const std::vector<double>& radii);

}  // namespace schrodlab

#endif  // SCHRODLAB_PDO_HPP
