#ifndef SCHRODLAB_SYMBOL_HPP
#define SCHRODLAB_SYMBOL_HPP

#include <map>

#include "schrodlab/flow.hpp"

namespace schrodlab {

enum class Parity { Even, Odd, None };

// A phase-space symbol: a pure closure (x, xi) -> complex plus the class
// metadata the verification operations need.
struct Symbol {
  int dim = 2;
  std::function<Complex(const Vec&, const Vec&)> evaluate;
  double order_m = 0.0;          // intended order of growth in <xi>
  Parity parity = Parity::None;  // declared parity in xi
  std::string class_tag;         // classical | projected | integrating-factor | doi
  std::map<std::string, std::string> metadata;

  Complex operator()(const Vec& x, const Vec& xi) const { return evaluate(x, xi); }
};

// Constant symbol and a few building blocks.
Symbol constant_symbol(int dim, Complex value);
Symbol bracket_power_symbol(int dim, double m);  // <xi>^m

// Projection of y onto the hyperplane orthogonal to z: y - (y.z) z / |z|^2.
Vec projection(const Vec& y, const Vec& z, int dim);

enum class ProjectedVariant { Elliptic, Hyperbolic };

// chi(|xi|) * a(P(x, A0 xi); x, xi).
Symbol make_projected_symbol(
    int dim, const std::function<Complex(const Vec&, const Vec&, const Vec&)>& a,
    const Mat& A0, const CutoffProfile& chi, ProjectedVariant variant);

// ---------------------------------------------------------------------------
// Finite-difference derivative machinery and seminorms.
// ---------------------------------------------------------------------------

// Multi-index over (x_1..x_n, xi_1..xi_n); orders[i] counts derivatives.
using MultiIndex = std::array<int, 2 * kMaxDim>;

// Nested central difference del^alpha p at (x, xi); steps h_x, h_xi per axis
// group.  O(h^2) accurate, cost 2^{|alpha|} evaluations.
Complex fd_derivative(const Symbol& p, const MultiIndex& alpha, const Vec& x,
                      const Vec& xi, double h_x, double h_xi);

struct SeminormOptions {
  double h_scale = 1e-4;   // steps h_scale*(1+|x|) and h_scale*(1+|xi|)
  bool x_weighted = false; // divide by <x>^{#xi-derivatives} (projected class)
};

// max over the probe grid of <xi>^{-m+|alpha_xi|} |del^alpha p| over all
// multi-indices with |alpha| <= j (j <= 4).
double seminorm_estimate(const Symbol& p, int j, double m,
                         const std::vector<PhasePoint>& probes,
                         const SeminormOptions& opt = {});

// {p, q} = sum_j (d_{xi_j} p d_{x_j} q - d_{x_j} p d_{xi_j} q) by central
// differences with steps h*(1+|x|), h*(1+|xi|).
Complex poisson_bracket(const Symbol& p, const Symbol& q, const PhasePoint& at,
                        double h = 1e-4);

// ---------------------------------------------------------------------------
// Tabulation.
// ---------------------------------------------------------------------------

struct LatticeSpec {
  int dim = 2;
  std::array<double, kMaxDim> lo{};
  std::array<double, kMaxDim> hi{};
  std::array<int, kMaxDim> count{};  // nodes per axis, >= 2 for interpolation

  std::size_t total() const;
  double node(int axis, int index) const;
};

enum class TableInterpolation { Nearest, Multilinear };

struct SymbolTable {
  LatticeSpec x_grid;
  LatticeSpec xi_grid;
  std::vector<Complex> values;  // row-major over x axes then xi axes
  std::string source;
  TableInterpolation interpolation = TableInterpolation::Multilinear;
  double probe_error = 0.0;  // max |table - closure| over random off-grid probes

  Complex at_node(const std::array<int, kMaxDim>& ix,
                  const std::array<int, kMaxDim>& ik) const;
  Complex interpolate(const Vec& x, const Vec& xi) const;
};

// Parallel fill over the product lattice; interpolation error estimated on
// 1000 seeded random off-grid probes against the closure.
SymbolTable tabulate(const Symbol& p, const LatticeSpec& x_grid,
                     const LatticeSpec& xi_grid, std::uint64_t probe_seed = 1);

// Binary blob (little-endian doubles, re/im interleaved, row-major) plus a
// JSON sidecar holding both lattices and the source metadata.
void save_table(const SymbolTable& table, const std::string& blob_path,
                const std::string& sidecar_path);
SymbolTable load_table(const std::string& blob_path, const std::string& sidecar_path);

// Symbol backed by a table (multilinear interpolation between nodes).
Symbol table_symbol(const SymbolTable& table, int dim);

}  // namespace schrodlab

#endif  // SCHRODLAB_SYMBOL_HPP
