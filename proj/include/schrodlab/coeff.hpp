#ifndef SCHRODLAB_COEFF_HPP
#define SCHRODLAB_COEFF_HPP

#include <limits>
#include <memory>
#include <string>
#include <vector>

#include "schrodlab/base.hpp"

namespace schrodlab {

using ScalarFn = std::function<double(const Vec&)>;
using GradFn = std::function<Vec(const Vec&)>;

enum class FieldKind { Elliptic, Ultrahyperbolic };

// Variable coefficient matrix A(x) = (a_jk(x)), real, symmetric, and
// non-degenerate, together with its gradient closures and the constant
// matrix it approaches at infinity.  Values are immutable after
// construction and closures must be pure, so fields are safe to share
// across parallel workers.
struct CoefficientField {
  int dim = 2;
  // Entry and gradient closures, symmetric by construction: entry[j][k]
  // and entry[k][j] reference the same closure.
  std::array<std::array<ScalarFn, kMaxDim>, kMaxDim> entry;
  std::array<std::array<GradFn, kMaxDim>, kMaxDim> grad;
  Mat asymptotic;          // A^0 (A_h for the ultrahyperbolic normalization)
  int signature_k = 2;     // number of +1 eigenvalues of the normalized A^0
  double nu = 1.0;         // non-degeneracy constant
  FieldKind kind = FieldKind::Elliptic;
  std::string id;

  // A(x); throws EvalError if an entry is non-finite.
  Mat eval(const Vec& x) const;
  // Gradient of entry (j,k) at x.
  Vec grad_entry(int j, int k, const Vec& x) const;
  // Hessian of entry (j,k) by central differences of the gradient closure
  // with step eps^(1/3) (1 + |x|).
  Mat hessian_entry(int j, int k, const Vec& x) const;

  // h2(x, xi) = sum a_jk(x) xi_j xi_k.
  double hamiltonian(const Vec& x, const Vec& xi) const;
};

// Symmetric helper: set entry (j,k) and (k,j) to the same closures.
void set_entry(CoefficientField& f, int j, int k, ScalarFn value, GradFn gradient);

// Constant field A(x) = A0.
CoefficientField constant_field(int dim, const Mat& A0, int signature_k, double nu,
                                FieldKind kind, std::string id = "constant");

// ---------------------------------------------------------------------------
// Operations
// ---------------------------------------------------------------------------

inline constexpr double kNoTruncation = std::numeric_limits<double>::infinity();

// Glue the field to its constant part outside radius 2R:
//   a^R_jk(x) = a^0_jk + theta(x/R) (a_jk(x) - a^0_jk),
// gradients transported accordingly.  R = kNoTruncation returns the field
// unchanged.  Requires R > 1 and a plateau profile with inner 1, outer 2.
CoefficientField truncate(const CoefficientField& field, double R,
                          const CutoffProfile& theta);

struct DecayRow {
  double radius = 0.0;
  double max_grad = 0.0;       // worst gradient norm |grad a_jk| on the sampled sphere
  double weighted = 0.0;       // max_grad * radius^tau
};

// Worst-case weighted gradient over Fibonacci-sphere samples at each radius;
// certifies the decay hypothesis |d a_jk| <= c / (1+|x|)^tau when the
// weighted column stays bounded.
std::vector<DecayRow> decay_report(const CoefficientField& field,
                                   const std::vector<double>& radii, double tau,
                                   int directions_per_radius = 256);

// Field with entries a_jk + eps (B1)_jk and nu doubled.  Non-degeneracy at
// the doubled constant is verified on a deterministic grid; a violation
// throws PerturbationTooLargeError carrying the violating (x, xi).
CoefficientField perturbed_field(const CoefficientField& field,
                                 const std::array<std::array<ScalarFn, kMaxDim>, kMaxDim>& B1,
                                 const std::array<std::array<GradFn, kMaxDim>, kMaxDim>& B1_grad,
                                 double eps);

// min over the verification set of |A(x) xi| on unit xi (ultrahyperbolic) or
// of the quadratic form |A(x) xi . xi| (elliptic).  Used by invariant tests.
double nondegeneracy_minimum(const CoefficientField& field, double x_extent,
                             int x_samples, int directions);

}  // namespace schrodlab

#endif  // SCHRODLAB_COEFF_HPP
