#include "schrodlab/base.hpp"

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <mutex>
#include <thread>

namespace schrodlab {

int default_worker_count() {
  if (const char* env = std::getenv("LAB_WORKERS")) {
    int w = std::atoi(env);
    if (w > 0) return w;
  }
  unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 4 : static_cast<int>(hw);
}

void parallel_for(std::size_t count, const std::function<void(std::size_t)>& body,
                  int workers) {
  if (workers <= 0) workers = default_worker_count();
  if (count == 0) return;
  if (workers == 1 || count == 1) {
    for (std::size_t i = 0; i < count; ++i) body(i);
    return;
  }
  workers = std::min<std::size_t>(workers, count);
  std::vector<std::thread> pool;
  pool.reserve(workers);
  std::atomic<std::size_t> next{0};
  std::exception_ptr first_error;
  std::mutex error_mutex;
  for (int w = 0; w < workers; ++w) {
    pool.emplace_back([&]() {
      for (;;) {
        std::size_t i = next.fetch_add(1);
        if (i >= count) return;
        try {
          body(i);
        } catch (...) {
          std::lock_guard<std::mutex> lock(error_mutex);
          if (!first_error) first_error = std::current_exception();
          return;
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  if (first_error) std::rethrow_exception(first_error);
}

namespace {

double eta(double t) { return t > 0.0 ? std::exp(-1.0 / t) : 0.0; }
// eta'(t) = eta(t) / t^2 for t > 0.
double eta_prime(double t) { return t > 0.0 ? std::exp(-1.0 / t) / (t * t) : 0.0; }

// Smooth transition g on [a, b] with g(a)=0, g(b)=1, plus derivative.
double ramp_value(double t, double a, double b) {
  if (t <= a) return 0.0;
  if (t >= b) return 1.0;
  double up = eta(t - a);
  double down = eta(b - t);
  return up / (up + down);
}

double ramp_deriv(double t, double a, double b) {
  if (t <= a || t >= b) return 0.0;
  double up = eta(t - a);
  double down = eta(b - t);
  double dup = eta_prime(t - a);
  double ddown = -eta_prime(b - t);
  double denom = up + down;
  return (dup * denom - up * (dup + ddown)) / (denom * denom);
}

}  // namespace

CutoffProfile plateau_profile(double inner, double outer) {
  if (!(outer > inner)) throw ArgumentError("plateau_profile: outer must exceed inner");
  CutoffProfile p;
  p.inner_radius = inner;
  p.outer_radius = outer;
  p.evaluate = [inner, outer](double t) {
    return 1.0 - ramp_value(std::abs(t), inner, outer);
  };
  p.derivative = [inner, outer](double t) {
    double s = t < 0.0 ? -1.0 : 1.0;
    return -s * ramp_deriv(std::abs(t), inner, outer);
  };
  return p;
}

CutoffProfile rising_profile(double inner, double outer) {
  if (!(outer > inner)) throw ArgumentError("rising_profile: outer must exceed inner");
  CutoffProfile p;
  p.inner_radius = inner;
  p.outer_radius = outer;
  p.evaluate = [inner, outer](double t) { return ramp_value(std::abs(t), inner, outer); };
  p.derivative = [inner, outer](double t) {
    double s = t < 0.0 ? -1.0 : 1.0;
    return s * ramp_deriv(std::abs(t), inner, outer);
  };
  return p;
}

CutoffProfile ramp_profile(double a, double b) {
  if (!(b > a)) throw ArgumentError("ramp_profile: b must exceed a");
  CutoffProfile p;
  p.inner_radius = a;
  p.outer_radius = b;
  p.evaluate = [a, b](double t) { return ramp_value(t, a, b); };
  p.derivative = [a, b](double t) { return ramp_deriv(t, a, b); };
  return p;
}

CutoffProfile sign_profile() {
  CutoffProfile p;
  p.inner_radius = 0.5;
  p.outer_radius = 0.5;
  p.evaluate = [](double t) { return 2.0 * ramp_value(t, -0.5, 0.5) - 1.0; };
  p.derivative = [](double t) { return 2.0 * ramp_deriv(t, -0.5, 0.5); };
  return p;
}

std::vector<Vec> sphere_directions(int dim, int count) {
  std::vector<Vec> dirs;
  if (dim == 1) {
    dirs.push_back(vec1(1.0));
    if (count > 1) dirs.push_back(vec1(-1.0));
    return dirs;
  }
  if (dim == 2) {
    dirs.reserve(count);
    for (int k = 0; k < count; ++k) {
      double phi = 2.0 * M_PI * (k + 0.5) / count;
      dirs.push_back(vec2(std::cos(phi), std::sin(phi)));
    }
    return dirs;
  }
  // Fibonacci sphere.
  dirs.reserve(count);
  const double golden = M_PI * (3.0 - std::sqrt(5.0));
  for (int k = 0; k < count; ++k) {
    double z = 1.0 - 2.0 * (k + 0.5) / count;
    double r = std::sqrt(std::max(0.0, 1.0 - z * z));
    double phi = golden * k;
    dirs.push_back(vec3(r * std::cos(phi), r * std::sin(phi), z));
  }
  return dirs;
}

}  // namespace schrodlab
