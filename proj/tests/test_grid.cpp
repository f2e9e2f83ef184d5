#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstdio>

#include "schrodlab/grid.hpp"

using namespace schrodlab;

namespace {

GridField random_field(const BoxGrid& g, std::uint64_t seed) {
  CounterRng rng(seed);
  GridField u = zero_field(g);
  for (Complex& v : u.values) v = Complex(rng.uniform(-1, 1), rng.uniform(-1, 1));
  return u;
}

}  // namespace

TEST_CASE("grid geometry") {
  BoxGrid g = make_grid(1, 4.0, 8);
  CHECK(g.total() == 8);
  CHECK(g.spacing() == doctest::Approx(1.0));
  CHECK(g.node_coord(0) == doctest::Approx(-4.0));
  CHECK(g.node_coord(7) == doctest::Approx(3.0));
  CHECK(g.freq_spacing() == doctest::Approx(M_PI / 4.0));
  CHECK(g.freq_index(1) == 1);
  CHECK(g.freq_index(7) == -1);
  CHECK(g.freq_index(4) == -4);  // unpaired Nyquist bin
  CHECK(g.is_nyquist(4));
  CHECK(!g.is_nyquist(3));

  BoxGrid g2 = make_grid(2, 5.0, 6);
  CHECK(g2.total() == 36);
  std::array<int, kMaxDim> idx = g2.unflatten(13);  // row-major: (2, 1)
  CHECK(idx[0] == 2);
  CHECK(idx[1] == 1);
  CHECK(g2.flatten(idx) == 13);

  CHECK_THROWS_AS(make_grid(0, 1.0, 8), ArgumentError);
  CHECK_THROWS_AS(make_grid(2, -1.0, 8), ArgumentError);
  CHECK_THROWS_AS(make_grid(2, 1.0, 7), ArgumentError);
  CHECK_THROWS_AS(make_grid(2, 1.0, 2), ArgumentError);
}

TEST_CASE("transform round trip and Parseval") {
  for (int dim : {1, 2}) {
    BoxGrid g = make_grid(dim, 6.0, dim == 1 ? 64 : 24);
    GridField u = random_field(g, 11 + dim);
    std::vector<Complex> spec = forward_transform(g, u.values);
    std::vector<Complex> back = inverse_transform(g, spec);
    double err = 0.0, ref = 0.0;
    for (std::size_t i = 0; i < back.size(); ++i) {
      err = std::max(err, std::abs(back[i] - u.values[i]));
      ref = std::max(ref, std::abs(u.values[i]));
    }
    CHECK(err / ref <= 1e-12);
    CHECK(parseval_defect(u) <= 1e-13);
  }
}

TEST_CASE("plane wave transforms to a single bin") {
  BoxGrid g = make_grid(1, 4.0, 8);
  int k0 = 2;
  double xi0 = g.freq_spacing() * k0;
  GridField u = make_field(g, [xi0](const Vec& x) {
    return Complex(std::cos(xi0 * x[0]), std::sin(xi0 * x[0]));
  });
  std::vector<Complex> spec = forward_transform(g, u.values);
  // sum_j e^{i x (xi0 - xi_k)} = N delta_{k,k0}; coefficient h/sqrt(2 pi).
  Complex expect = g.cell_volume() / std::sqrt(2.0 * M_PI) * 8.0;
  for (std::size_t k = 0; k < spec.size(); ++k) {
    if (static_cast<int>(k) == k0)
      CHECK(std::abs(spec[k] - expect) <= 1e-12);
    else
      CHECK(std::abs(spec[k]) <= 1e-12);
  }
}

TEST_CASE("standard gaussian is self-dual under the unitary normalization") {
  BoxGrid g = make_grid(1, 20.0, 128);
  GridField u =
      make_field(g, [](const Vec& x) { return Complex(std::exp(-0.5 * x[0] * x[0]), 0.0); });
  std::vector<Complex> spec = forward_transform(g, u.values);
  for (std::size_t k = 0; k < spec.size(); ++k) {
    double xi = g.freq_coord(static_cast<int>(k));
    if (std::abs(xi) > 5.0) continue;
    CHECK(std::abs(spec[k] - Complex(std::exp(-0.5 * xi * xi), 0.0)) <= 1e-10);
  }
}

TEST_CASE("spectrum is cached and shared") {
  BoxGrid g = make_grid(1, 5.0, 16);
  GridField u = random_field(g, 3);
  const std::vector<Complex>& s1 = spectrum(u);
  const std::vector<Complex>& s2 = spectrum(u);
  CHECK(&s1 == &s2);
  GridField v = field_from_spectrum(g, s1);
  CHECK(v.spectral_cache != nullptr);
  double err = 0.0;
  for (std::size_t i = 0; i < v.values.size(); ++i)
    err = std::max(err, std::abs(v.values[i] - u.values[i]));
  CHECK(err <= 1e-12);
}

TEST_CASE("boundary mass report") {
  BoxGrid g = make_grid(2, 10.0, 32);
  GridField centered = make_field(g, [](const Vec& x) {
    return Complex(std::exp(-0.5 * (x[0] * x[0] + x[1] * x[1])), 0.0);
  });
  BoundaryReport ok = boundary_report(centered);
  CHECK(ok.fraction < 1e-8);
  CHECK(!ok.flagged);

  GridField shifted = make_field(g, [](const Vec& x) {
    double dx = x[0] - 9.0;
    return Complex(std::exp(-0.5 * (dx * dx + x[1] * x[1])), 0.0);
  });
  CHECK(boundary_report(shifted).flagged);

  CHECK(l2_norm(zero_field(g)) == 0.0);
  CHECK(boundary_report(zero_field(g)).fraction == 0.0);
}

TEST_CASE("field snapshot round trip") {
  BoxGrid g = make_grid(2, 7.0, 10);
  GridField u = random_field(g, 99);
  save_field(u, "field_rt.bin", "field_rt.json", 1.25);
  GridField v = load_field("field_rt.bin", "field_rt.json");
  REQUIRE(v.values.size() == u.values.size());
  CHECK(v.grid == u.grid);
  for (std::size_t i = 0; i < u.values.size(); ++i) CHECK(v.values[i] == u.values[i]);
  std::remove("field_rt.bin");
  std::remove("field_rt.json");
}
