#ifndef SCHRODLAB_FLOW_HPP
#define SCHRODLAB_FLOW_HPP

#include <optional>

#include "schrodlab/coeff.hpp"

namespace schrodlab {

struct PhasePoint {
  Vec x{};
  Vec xi{};
};

enum class TraceStatus { Complete, MaxSteps, LeftDomain };

struct RaySample {
  double s = 0.0;
  Vec X{};
  Vec Xi{};
  Vec dX{};   // derivatives at the sample, for Hermite interpolation
  Vec dXi{};
};

// A sampled bicharacteristic (X(s), Xi(s)) with conservation diagnostics.
struct RayTrajectory {
  std::vector<RaySample> samples;   // ordered by s
  std::vector<double> h2_values;    // h2 at each sample
  std::string field_ref;
  PhasePoint seed;
  int dim = 2;
  double tol = 1e-10;
  TraceStatus status = TraceStatus::Complete;

  double h2_relative_drift() const;
  // Hermite-interpolated state at s (s within the sampled span).
  RaySample interpolate(double s) const;
};

struct TraceOptions {
  double tol = 1e-10;
  std::size_t max_steps = 1000000;
  double domain_radius = 1e6;
  // Optional early stop once |X| >= stop_radius and the trajectory is
  // outgoing (d|X|^2/ds >= 0).
  std::optional<double> stop_radius;
};

// h2(x, xi) = sum a_jk(x) xi_j xi_k.
double hamiltonian(const CoefficientField& field, const PhasePoint& p);

// Integrate dX/ds = 2 A(X) Xi, dXi_j/ds = -sum d_j a_kl (X) Xi_k Xi_l over
// [s_min, s_max] (s_min <= 0 <= s_max) with an adaptive embedded
// Runge-Kutta 5(4) pair and PI step-size control.
RayTrajectory trace_ray(const CoefficientField& field, const PhasePoint& seed,
                        double s_min, double s_max, const TraceOptions& opt = {});

// Endpoint of the flow at time s (convenience wrapper over trace_ray).
PhasePoint flow_point(const CoefficientField& field, const PhasePoint& seed, double s,
                      const TraceOptions& opt = {});

// Residuals of X(s; x, t xi) = X(ts; x, xi) and Xi(s; x, t xi) = t Xi(ts; x, xi).
std::pair<double, double> homogeneity_check(const CoefficientField& field,
                                            const PhasePoint& seed, double t, double s,
                                            const TraceOptions& opt = {});

// Central difference of phi along the flow; agrees with the Poisson bracket
// {h2, phi} to O(h^2).
double along_flow_derivative(const CoefficientField& field,
                             const std::function<Complex(const Vec&, const Vec&)>& phi,
                             const PhasePoint& p, double h, const TraceOptions& opt = {});

// d|X|^2/ds at a sample, from the closed form 4 <X, A(X) Xi>.
double radial_speed(const CoefficientField& field, const Vec& X, const Vec& Xi);

// Earliest s >= 0 with |X(s)| >= M1 and d|X|^2/ds >= 0, bisection-refined
// between samples; nullopt when the condition is never met on the span.
std::optional<double> escape_time(const CoefficientField& field,
                                  const RayTrajectory& traj, double M1);

struct DyadicOccupation {
  // k -> measure of {s in [0, s0] : 2^k <= |X(s)| <= 2^{k+1}}
  std::vector<std::pair<int, double>> measures;
  double ratio(int k) const;   // |I_k| / 2^k, 0 when k absent
  double max_ratio() const;
};

DyadicOccupation dyadic_occupation(const RayTrajectory& traj, double s0);

struct SeedVerdict {
  PhasePoint seed;
  bool escaped = false;
  double escape_s = 0.0;
  std::string error;  // non-empty if integration failed for this seed
};

// Parallel sweep: first s with |X(s)| >= mu per seed, or undetermined
// within s_max.  Seeds must be unit covectors.
std::vector<SeedVerdict> nontrapping_probe(const CoefficientField& field,
                                           const std::vector<PhasePoint>& seeds,
                                           double mu, double s_max, double tol);

// 2n x 2n Jacobian of (X, Xi)(s) with respect to (x0, xi0), by
// co-integrating the variational system with the main ray.  Row/column
// order: (X_1..X_n, Xi_1..Xi_n) by (x_1..x_n, xi_1..xi_n).
std::vector<std::vector<double>> flow_jacobian(const CoefficientField& field,
                                               const PhasePoint& seed, double s,
                                               double tol);

struct JacobianGrowthRow {
  double s = 0.0;
  double max_entry = 0.0;     // worst |J_ab| over the seed set
  double affine_ratio = 0.0;  // max_entry / (1 + 2|s|)
};

struct JacobianGrowthReport {
  double R = 0.0;  // truncation radius of the field being probed
  std::vector<JacobianGrowthRow> rows;
  double fitted_c = 0.0;          // sup of affine_ratio
  bool superlinear_flag = false;  // log-log slope beyond 1.2 at late s
};

// Expects a field already glued to its constant part at radius R.
JacobianGrowthReport jacobian_growth_report(const CoefficientField& field, double R,
                                            const std::vector<PhasePoint>& seeds,
                                            const std::vector<double>& s_grid,
                                            double tol = 1e-10);

struct MizohataResult {
  bool diverged = false;
  double value = 0.0;
  double tail_estimate = 0.0;
};

// Adaptive quadrature of r -> Im b1(x + r omega) . omega over [0, r_max]
// with octave-based divergence detection.
MizohataResult mizohata_integral(const std::function<Vec(const Vec&)>& im_b1,
                                 const Vec& x, const Vec& omega, int dim,
                                 double r_max, double tol);

struct FlowIntegral {
  double value = 0.0;   // integral of g along the flow over [0, s_stop]
  double s_stop = 0.0;  // where integration actually ended (signed)
  bool halted = false;  // halt condition met before the budget
};

// Integral of g(X(u), Xi(u)) du from 0 to s_end (either sign), accumulated
// as an extra component of the adaptive ray integration so the step control
// bounds the quadrature error too.  `halt` stops the run early once the
// remaining tail is irrelevant; integration to s_end without halting leaves
// halted = false (callers decide whether that is an error).
FlowIntegral integrate_along_flow(
    const CoefficientField& field, const PhasePoint& seed, double s_end,
    const std::function<double(const Vec&, const Vec&)>& g,
    const std::function<bool(const Vec&, const Vec&)>& halt, double tol,
    std::size_t max_steps = 1000000);

// Same integral with a fixed-step RK4 march (`steps` equal steps to s_end).
// Deterministic and smooth in the seed, which makes it the right evaluator
// to put under finite differences.
double integrate_along_flow_fixed(const CoefficientField& field, const PhasePoint& seed,
                                  double s_end, int steps,
                                  const std::function<double(const Vec&, const Vec&)>& g);

// Fixed-step RK4 endpoint of the flow (smooth companion of flow_point).
PhasePoint flow_point_fixed(const CoefficientField& field, const PhasePoint& seed,
                            double s, int steps);

// Fitted constant c2 for |X(s)|^2 >= c2 (s - s0)^2 + M1^2, s >= s0.
double escape_quadratic_constant(const CoefficientField& field,
                                 const RayTrajectory& traj, double s0, double M1);

}  // namespace schrodlab

#endif  // SCHRODLAB_FLOW_HPP
