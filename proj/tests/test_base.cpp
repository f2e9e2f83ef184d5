#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <atomic>
#include <cmath>

#include "schrodlab/base.hpp"

using namespace schrodlab;

TEST_CASE("cutoff profiles hit their plateaus and stay monotone") {
  CutoffProfile theta = plateau_profile(1.0, 2.0);
  CHECK(theta(0.0) == 1.0);
  CHECK(theta(0.99) == 1.0);
  CHECK(theta(2.0) == 0.0);
  CHECK(theta(-3.0) == 0.0);
  CHECK(theta(1.5) == doctest::Approx(0.5));  // symmetric ramp midpoint
  double prev = theta(1.0);
  for (int i = 1; i <= 100; ++i) {
    double v = theta(1.0 + i / 100.0);
    CHECK(v <= prev + 1e-15);
    prev = v;
  }

  CutoffProfile chi = rising_profile(1.0, 2.0);
  for (double t : {0.0, 0.7, 1.3, 1.9, 2.5})
    CHECK(theta(t) + chi(t) == doctest::Approx(1.0).epsilon(1e-14));
}

TEST_CASE("profile derivatives match finite differences") {
  CutoffProfile theta = plateau_profile(1.0, 2.0);
  for (double t : {1.2, 1.5, 1.8, -1.4}) {
    double h = 1e-6;
    double fd = (theta(t + h) - theta(t - h)) / (2.0 * h);
    CHECK(theta.derivative(t) == doctest::Approx(fd).epsilon(1e-5));
  }
  CutoffProfile sgn = sign_profile();
  CHECK(sgn(-1.0) == -1.0);
  CHECK(sgn(1.0) == 1.0);
  CHECK(sgn(0.0) == doctest::Approx(0.0));
  CHECK(sgn(0.3) == doctest::Approx(-sgn(-0.3)));  // odd
}

TEST_CASE("sphere directions are unit and symmetric enough") {
  for (int dim : {1, 2, 3}) {
    auto dirs = sphere_directions(dim, 64);
    Vec mean{};
    for (const Vec& d : dirs) {
      CHECK(norm(d, dim) == doctest::Approx(1.0).epsilon(1e-12));
      mean = add(mean, d, dim);
    }
    CHECK(norm(mean, dim) / dirs.size() < 0.05);
  }
}

TEST_CASE("counter rng is deterministic and order independent") {
  CounterRng a(42), b(42);
  CHECK(a.uniform() == b.uniform_at(0));
  CHECK(a.uniform_at(100) == b.uniform_at(100));
  CounterRng s1 = a.substream(7);
  CounterRng s2 = a.substream(8);
  CHECK(s1.uniform_at(0) != s2.uniform_at(0));
  for (int i = 0; i < 1000; ++i) {
    double u = a.uniform();
    CHECK(u >= 0.0);
    CHECK(u < 1.0);
  }
}

TEST_CASE("parallel_for visits every index once and propagates errors") {
  std::vector<std::atomic<int>> hits(1000);
  parallel_for(1000, [&](std::size_t i) { hits[i].fetch_add(1); }, 8);
  for (auto& h : hits) CHECK(h.load() == 1);
  CHECK_THROWS_AS(
      parallel_for(100, [](std::size_t i) { if (i == 37) throw ArgumentError("boom"); }, 4),
      ArgumentError);
}

TEST_CASE("bracket and fd_step basics") {
  CHECK(bracket(0.0) == 1.0);
  CHECK(bracket(3.0) == doctest::Approx(std::sqrt(10.0)));
  CHECK(fd_step(0.0) > 0.0);
  CHECK(fd_step(100.0) > fd_step(0.0));
}
