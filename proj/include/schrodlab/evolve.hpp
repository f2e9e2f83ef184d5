#ifndef SCHRODLAB_EVOLVE_HPP
#define SCHRODLAB_EVOLVE_HPP

#include <memory>
#include <optional>

#include "schrodlab/coeff.hpp"
#include "schrodlab/pdo.hpp"

namespace schrodlab {

// Right-hand side  i L u + Psi_{b1} u + b2 . grad(conj u) + Psi_{c1} u +
// Psi_{c2} conj(u) + f,  with L u = sum_j d_j (a_jk d_k u) in divergence
// form.  l_sign = -1 selects the conjugated equation -iL (see
// conjugate_spec).
struct LinearOperatorSpec {
  CoefficientField field;
  double l_sign = 1.0;

  std::optional<Symbol> b1;  // order 1, odd in xi for the factor machinery
  // When set, Psi_{b1} is realized as sum_j beta_j(x) d_j (the symbol is
  // then sum_j beta_j(x) i xi_j), avoiding the O(N^{2n}) quadrature in the
  // time loop.
  bool b1_differential = false;
  std::array<std::function<Complex(const Vec&)>, kMaxDim> b1_coeff{};

  bool has_b2 = false;
  std::array<std::function<Complex(const Vec&)>, kMaxDim> b2{};

  std::optional<Symbol> c1;
  std::optional<Symbol> c2;  // acts on conj(u)

  std::function<GridField(double)> forcing;  // empty = no forcing
};

// b1 = sum_j beta_j(x) i xi_j with the differential fast path enabled.
void set_differential_b1(LinearOperatorSpec& spec,
                         std::array<std::function<Complex(const Vec&)>, kMaxDim> beta);

// Spec of the complex-conjugated equation: evolving conj(u0) under it gives
// the conjugate of evolving u0 under `spec`.
LinearOperatorSpec conjugate_spec(const LinearOperatorSpec& spec);

struct EvolveConfig {
  double dt = 0.0;       // 0: use stable_dt
  double dt_safety = 1.0;
  int stride = 1;        // snapshot every `stride` steps
  double blowup_factor = 1e8;
  long max_steps = 2000000;
  double record_s = 1.0;        // H^s norm stored per snapshot
  double record_weight = -2.0;  // <x>^w weighted norm stored per snapshot
};

// Explicit-RK4 stability bound dt = 2.5 / (nu xi_max^2 + B1 xi_max + C0)
// with xi_max the lattice frequency radius and B1, C0 sampled from the
// lower-order terms.
double stable_dt(const BoxGrid& grid, const LinearOperatorSpec& spec);

struct NormRecord {
  double t = 0.0;
  double l2 = 0.0;
  double hs = 0.0;
  double weighted = 0.0;
};

struct EvolutionTrace {
  std::vector<std::pair<double, GridField>> snapshots;
  double dt = 0.0;
  std::string scheme = "rk4-mol";
  std::vector<NormRecord> norm_history;
  // Trapezoidal int_0^T |f|_{L2}^2 dt accumulated during the run.
  double forcing_l2_sq = 0.0;
  bool blew_up = false;     // norm exceeded blowup_factor or went non-finite
  double blowup_time = 0.0;
  BoundaryReport final_boundary;
};

// Method-of-lines RK4.  On blow-up the trace ends at the last finite
// snapshot with blew_up set (expected behaviour for ill-posed scenarios).
EvolutionTrace evolve_linear(const GridField& u0, const LinearOperatorSpec& spec,
                             double T, const EvolveConfig& cfg = {});

// One evaluation of the semi-discrete right-hand side evolve_linear
// integrates, with the coefficient samples cached at construction.  Lets a
// caller embed the linear operator in its own stepper.
class LinearRhs {
 public:
  LinearRhs(const LinearOperatorSpec& spec, const BoxGrid& grid);
  GridField operator()(double t, const GridField& u) const;

 private:
  struct Impl;
  std::shared_ptr<const Impl> impl_;
};

// ---------------------------------------------------------------------------
// Functionals on traces.
// ---------------------------------------------------------------------------

struct SmoothingRecord {
  double lhs = 0.0;         // int_0^T |<x>^{-N/2} J^{s+1/2} u|^2 dt
  double sup_hs_sq = 0.0;   // sup_t |u(t)|_{H^s}^2
  double forcing_l2_sq = 0.0;
  double forcing_weighted_sq = 0.0;  // int |<x>^{N/2} J^{s-1/2} f|^2 dt
  double rhs = 0.0;                  // (1+T) sup + forcing (L2 variant)
  double rhs_weighted = 0.0;         // (1+T) sup + weighted forcing variant
  double ratio = 0.0;
  double ratio_weighted = 0.0;
  bool degenerate = false;  // 0/0
};

// Trapezoidal quadrature over the snapshot times; both forcing
// normalizations are reported.  pre: >= 3 snapshots.
SmoothingRecord smoothing_functional(const EvolutionTrace& trace, double s,
                                     int N_weight,
                                     const std::function<GridField(double)>& forcing = {});

struct EnergyHistory {
  std::vector<double> t;
  std::vector<double> raw;          // |u(t)|_{L2}
  std::vector<double> transformed;  // |K^* u(t)|_{L2}
  double raw_rate = 0.0;            // least-squares slope of log norm vs t
  double transformed_rate = 0.0;
};

// K^* u per snapshot for a (tabulated) factor symbol k.
EnergyHistory k_transform_energy(const EvolutionTrace& trace, const Symbol& k);

struct ErrorOperatorReport {
  std::vector<double> ratios;  // |u - Psi_ktilde K^* u| / |u| per probe
  // (modulation frequency, ratio) sweep on the first probe.
  std::vector<std::pair<double, double>> freq_sweep;
};

ErrorOperatorReport error_operator_check(const Symbol& k_tilde, const Symbol& k,
                                         const std::vector<GridField>& probes,
                                         const std::vector<double>& sweep_freqs = {});

// ---------------------------------------------------------------------------
// Constant-coefficient demonstrations.
// ---------------------------------------------------------------------------

struct GrowthRow {
  double t = 0.0;
  double growth = 0.0;     // |u(t)| / |u0|
  double reference = 0.0;  // e^{lambda t}
};

// Exact spectral solution u_hat(t) = e^{-t(i|xi|^2 + xi_1)} u_hat(0) for a
// unit gaussian packet centred at frequency -lambda e_1 (the growing mode).
// imaginary_b1 = false replaces xi_1 by i xi_1, which is unitary.
std::vector<GrowthRow> mizohata_blowup_demo(double lambda, double T,
                                            const BoxGrid& grid, int samples = 8,
                                            bool imaginary_b1 = true);

enum class GainVariant { Ultrahyperbolic, Elliptic };

struct GainRow {
  double freq = 0.0;
  double ratio_quarter = 0.0;
  double ratio_half = 0.0;
};

// Exact per-frequency evolution of the (xi, -xi) mode pair of (u, conj u)
// under h2 plus the b2 = (i, 0) conjugate coupling; reports the smoothing
// ratio int |<x>^{-1} J^gamma u|^2 dt / |u0|^2 at gamma = 1/4 and 1/2 for
// wave packets at the given frequencies.
std::vector<GainRow> gain_exponent_probe(GainVariant variant,
                                         const std::vector<double>& freqs, double T,
                                         const BoxGrid& grid, int time_samples = 33,
                                         bool with_coupling = true);

// The same mode-pair propagator applied to a whole field (oracle for
// evolve_linear on constant-coefficient b2 scenarios).
GridField pair_propagator_apply(GainVariant variant, const GridField& u0, double t,
                                bool with_coupling = true);

// L2-normalized wave packet e^{i lambda e1 . x} e^{-|x|^2/2}.
GridField wave_packet(const BoxGrid& grid, double lambda);

struct WeightedGrowthReport {
  std::vector<double> times;  // 0, T/4, T/2, T
  std::vector<double> lhs;    // |<x>^{2N} u(t)|_{H^s}^2
  std::vector<double> fitted_c;  // c_0 .. c_{2N}
  bool bounded = false;  // lhs <= fitted polynomial at every sample
};

// Fits |<x>^{2N} u(t)|_{H^s}^2 <= sum_j c_j t^j |<x>^{2N-j} u0|_{H^{s+j}}^2
// with c_0 pinned by the t = 0 value.
WeightedGrowthReport weighted_growth_check(const GridField& u0,
                                           const LinearOperatorSpec& spec, double T,
                                           int N_weight, double s,
                                           const EvolveConfig& cfg = {});

}  // namespace schrodlab

#endif  // SCHRODLAB_EVOLVE_HPP
