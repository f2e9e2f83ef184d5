#ifndef SCHRODLAB_BASE_HPP
#define SCHRODLAB_BASE_HPP

#include <array>
#include <cmath>
#include <complex>
#include <cstdint>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

namespace schrodlab {

using Complex = std::complex<double>;

// Maximum spatial dimension supported by the lab (see coeff.hpp).
inline constexpr int kMaxDim = 3;

// A point in R^n, n <= 3.  Components beyond the active dimension are kept
// at zero so that generic loops over kMaxDim remain harmless.
using Vec = std::array<double, kMaxDim>;

// Small dense symmetric-capable matrix, n <= 3.
struct Mat {
  std::array<std::array<double, kMaxDim>, kMaxDim> a{};

  double& operator()(int j, int k) { return a[j][k]; }
  double operator()(int j, int k) const { return a[j][k]; }

  static Mat identity(int n) {
    Mat m;
    for (int j = 0; j < n; ++j) m(j, j) = 1.0;
    return m;
  }
  static Mat diag(int n, std::initializer_list<double> d) {
    Mat m;
    int j = 0;
    for (double v : d) {
      if (j >= n) break;
      m(j, j) = v;
      ++j;
    }
    return m;
  }
};

inline Vec vec1(double x) { return Vec{x, 0.0, 0.0}; }
inline Vec vec2(double x, double y) { return Vec{x, y, 0.0}; }
inline Vec vec3(double x, double y, double z) { return Vec{x, y, z}; }

inline double dot(const Vec& a, const Vec& b, int n) {
  double s = 0.0;
  for (int j = 0; j < n; ++j) s += a[j] * b[j];
  return s;
}

inline double norm2(const Vec& a, int n) { return dot(a, a, n); }
inline double norm(const Vec& a, int n) { return std::sqrt(norm2(a, n)); }

inline Vec add(const Vec& a, const Vec& b, int n) {
  Vec r{};
  for (int j = 0; j < n; ++j) r[j] = a[j] + b[j];
  return r;
}

inline Vec sub(const Vec& a, const Vec& b, int n) {
  Vec r{};
  for (int j = 0; j < n; ++j) r[j] = a[j] - b[j];
  return r;
}

inline Vec scale(const Vec& a, double t, int n) {
  Vec r{};
  for (int j = 0; j < n; ++j) r[j] = t * a[j];
  return r;
}

inline Vec matvec(const Mat& m, const Vec& v, int n) {
  Vec r{};
  for (int j = 0; j < n; ++j)
    for (int k = 0; k < n; ++k) r[j] += m(j, k) * v[k];
  return r;
}

// Japanese bracket <t> = sqrt(1 + t^2).
inline double bracket(double t) { return std::sqrt(1.0 + t * t); }
inline double bracket_vec(const Vec& v, int n) { return std::sqrt(1.0 + norm2(v, n)); }

// ---------------------------------------------------------------------------
// Errors
// ---------------------------------------------------------------------------

struct LabError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Non-finite value met while evaluating a coefficient or symbol closure.
struct EvalError : LabError {
  Vec where{};
  explicit EvalError(const std::string& msg, const Vec& x = Vec{})
      : LabError(msg), where(x) {}
};

struct ArgumentError : LabError {
  using LabError::LabError;
};

// A ray failed to leave the compact region it must leave for a construction
// to terminate (symbol integrals of Section-5 type constructions).
struct TrappingSuspectedError : LabError {
  Vec seed_x{};
  Vec seed_xi{};
  TrappingSuspectedError(const std::string& msg, const Vec& x, const Vec& xi)
      : LabError(msg), seed_x(x), seed_xi(xi) {}
};

struct PerturbationTooLargeError : LabError {
  Vec at_x{};
  Vec at_xi{};
  PerturbationTooLargeError(const std::string& msg, const Vec& x, const Vec& xi)
      : LabError(msg), at_x(x), at_xi(xi) {}
};

// ---------------------------------------------------------------------------
// Deterministic counter-based random numbers.
//
// All randomness in the lab flows from a single seed through this generator,
// so probe sets are reproducible regardless of threading or call order.
// ---------------------------------------------------------------------------

class CounterRng {
 public:
  explicit CounterRng(std::uint64_t seed, std::uint64_t stream = 0)
      : seed_(seed), stream_(stream) {}

  // Stateless draw: value number `i` of this stream.
  double uniform_at(std::uint64_t i) const {
    std::uint64_t z = mix(seed_ ^ (0x9e3779b97f4a7c15ull * (stream_ + 1)) ^
                          (0xbf58476d1ce4e5b9ull * (i + 1)));
    return (z >> 11) * 0x1.0p-53;
  }

  double uniform() { return uniform_at(counter_++); }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // Standard normal via Box-Muller on two counter draws.
  double normal() {
    double u1 = uniform();
    double u2 = uniform();
    if (u1 < 1e-300) u1 = 1e-300;
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
  }

  CounterRng substream(std::uint64_t k) const { return CounterRng(seed_, stream_ * 1013904223ull + k + 1); }

 private:
  static std::uint64_t mix(std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ull;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
  }

  std::uint64_t seed_;
  std::uint64_t stream_;
  std::uint64_t counter_ = 0;
};

// ---------------------------------------------------------------------------
// Parallel map over an index range.  Results must be written to
// pre-allocated per-index slots so the output is deterministic.
// ---------------------------------------------------------------------------

int default_worker_count();
void parallel_for(std::size_t count, const std::function<void(std::size_t)>& body,
                  int workers = 0);

// ---------------------------------------------------------------------------
// Smooth cutoff profiles.
//
// The canonical realization uses eta(t) = exp(-1/t) for t > 0 (0 otherwise):
//   theta(t) = eta(outer - |t|) / (eta(outer - |t|) + eta(|t| - inner)),
// which is C^inf, equals 1 for |t| <= inner and 0 for |t| >= outer.
// ---------------------------------------------------------------------------

struct CutoffProfile {
  double inner_radius = 1.0;
  double outer_radius = 2.0;
  std::function<double(double)> evaluate;
  std::function<double(double)> derivative;  // d/dt, analytic

  double operator()(double t) const { return evaluate(t); }
};

// theta-type: 1 on |t| <= inner, 0 on |t| >= outer.
CutoffProfile plateau_profile(double inner, double outer);
// chi-type: 0 on |t| <= inner, 1 on |t| >= outer  (complement of plateau).
CutoffProfile rising_profile(double inner, double outer);
// One-sided ramp on the real line: 0 for t <= a, 1 for t >= b (no |t|).
CutoffProfile ramp_profile(double a, double b);
// Odd sign profile: -1 for t <= -1/2, +1 for t >= 1/2, monotone between.
CutoffProfile sign_profile();

// ---------------------------------------------------------------------------
// Direction sampling.
// ---------------------------------------------------------------------------

// Deterministic, rotation-fair unit directions: {+-1} for n = 1, equally
// spaced angles for n = 2, a Fibonacci sphere for n = 3.
std::vector<Vec> sphere_directions(int dim, int count);

// Central finite-difference step balancing truncation and cancellation.
inline double fd_step(double scale) {
  static const double cbrt_eps = std::cbrt(2.220446049250313e-16);
  return cbrt_eps * (1.0 + std::abs(scale));
}

}  // namespace schrodlab

#endif  // SCHRODLAB_BASE_HPP
