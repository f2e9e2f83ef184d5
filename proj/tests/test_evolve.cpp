#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "schrodlab/evolve.hpp"

using namespace schrodlab;

namespace {

CoefficientField line_bump_field() {
  CoefficientField f = constant_field(1, Mat::identity(1), 1, 2.0, FieldKind::Elliptic,
                                      "line-bump");
  set_entry(
      f, 0, 0, [](const Vec& x) { return 1.0 + std::exp(-x[0] * x[0]); },
      [](const Vec& x) {
        return vec1(-2.0 * x[0] * std::exp(-x[0] * x[0]));
      });
  return f;
}

GridField gaussian_field(const BoxGrid& g) {
  return make_field(g, [&g](const Vec& x) {
    return Complex(std::exp(-0.5 * norm2(x, g.dim)), 0.0);
  });
}

double diff_norm(const GridField& a, const GridField& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.values.size(); ++i)
    s += std::norm(a.values[i] - b.values[i]);
  return std::sqrt(s * a.grid.cell_volume());
}

}  // namespace

TEST_CASE("free evolution of a lattice plane wave matches the exact multiplier") {
  BoxGrid g = make_grid(1, 8.0, 64);
  LinearOperatorSpec spec;
  spec.field = constant_field(1, Mat::identity(1), 1, 1.0, FieldKind::Elliptic);
  double xi0 = g.freq_spacing() * 8;
  GridField u0 = make_field(g, [xi0](const Vec& x) {
    return std::polar(1.0, xi0 * x[0]);
  });
  double T = 0.1;
  EvolutionTrace tr = evolve_linear(u0, spec, T);
  REQUIRE(!tr.blew_up);
  GridField exact = make_field(g, [xi0, T](const Vec& x) {
    return std::polar(1.0, xi0 * x[0] - T * xi0 * xi0);
  });
  double err = diff_norm(tr.snapshots.back().second, exact) / l2_norm(u0);
  CHECK(err <= 1e-5);

  // RK4: halving dt cuts the error about 16x.
  EvolveConfig half;
  half.dt = tr.dt * 0.5;
  EvolutionTrace tr2 = evolve_linear(u0, spec, T, half);
  double err2 = diff_norm(tr2.snapshots.back().second, exact) / l2_norm(u0);
  CHECK(err / err2 >= 8.0);

  // Snapshot norms are recomputable from the stored fields.
  for (std::size_t i = 0; i < tr.snapshots.size(); ++i) {
    CHECK(std::abs(tr.norm_history[i].l2 - l2_norm(tr.snapshots[i].second)) <=
          1e-12 * (1.0 + tr.norm_history[i].l2));
    if (i) CHECK(tr.snapshots[i].first > tr.snapshots[i - 1].first);
  }
}

TEST_CASE("zero data with zero forcing stays zero; unitarity baseline") {
  BoxGrid g = make_grid(1, 8.0, 64);
  LinearOperatorSpec spec;
  spec.field = line_bump_field();
  EvolutionTrace z = evolve_linear(zero_field(g), spec, 0.3);
  for (const auto& r : z.norm_history) CHECK(r.l2 == 0.0);

  GridField u0 = gaussian_field(g);
  EvolutionTrace tr = evolve_linear(u0, spec, 1.0);
  REQUIRE(!tr.blew_up);
  double n0 = l2_norm(u0);
  for (const auto& r : tr.norm_history)
    CHECK(std::abs(r.l2 - n0) / n0 <= 1e-6);  // iL is skew-adjoint
}

TEST_CASE("forcing linearity and trace forcing integral") {
  BoxGrid g = make_grid(1, 8.0, 48);
  LinearOperatorSpec spec;
  spec.field = line_bump_field();
  GridField u0 = gaussian_field(g);
  GridField fsrc = make_field(g, [](const Vec& x) {
    return Complex(std::exp(-x[0] * x[0]), 0.3);
  });
  LinearOperatorSpec forced = spec;
  forced.forcing = [fsrc](double t) {
    GridField f = fsrc;
    for (Complex& v : f.values) v *= std::cos(t);
    return f;
  };
  EvolveConfig cfg;
  cfg.dt = 0.004;
  double T = 0.2;
  EvolutionTrace both = evolve_linear(u0, forced, T, cfg);
  EvolutionTrace homog = evolve_linear(u0, spec, T, cfg);
  EvolutionTrace part = evolve_linear(zero_field(g), forced, T, cfg);
  GridField sum = homog.snapshots.back().second;
  for (std::size_t i = 0; i < sum.values.size(); ++i)
    sum.values[i] += part.snapshots.back().second.values[i];
  CHECK(diff_norm(both.snapshots.back().second, sum) / l2_norm(u0) <= 1e-10);

  // int |f|^2 dt for f = cos(t) f0.
  double f0 = l2_norm(fsrc);
  double exact = f0 * f0 * 0.5 * (T + std::sin(2 * T) / 2.0);
  CHECK(both.forcing_l2_sq == doctest::Approx(exact).epsilon(1e-4));
}

TEST_CASE("conjugation consistency with all lower-order terms") {
  BoxGrid g = make_grid(1, 8.0, 48);
  LinearOperatorSpec spec;
  spec.field = line_bump_field();
  set_differential_b1(spec, {[](const Vec& x) {
    return Complex(0.0, 0.2 * std::exp(-x[0] * x[0]));
  }});
  spec.has_b2 = true;
  spec.b2[0] = [](const Vec& x) { return Complex(0.1, 0.05) * std::exp(-x[0] * x[0]); };
  Symbol c1;
  c1.dim = 1;
  c1.evaluate = [](const Vec& x, const Vec& xi) {
    return Complex(0.3 * std::exp(-x[0] * x[0]), 0.1 / bracket(xi[0]));
  };
  spec.c1 = c1;

  GridField u0 = make_field(g, [](const Vec& x) {
    return std::polar(std::exp(-0.5 * x[0] * x[0]), 0.7 * x[0]);
  });
  EvolveConfig cfg;
  cfg.dt = 0.005;
  EvolutionTrace fwd = evolve_linear(u0, spec, 0.1, cfg);

  GridField u0c = u0;
  for (Complex& v : u0c.values) v = std::conj(v);
  EvolutionTrace cj = evolve_linear(u0c, conjugate_spec(spec), 0.1, cfg);

  GridField expect = fwd.snapshots.back().second;
  for (Complex& v : expect.values) v = std::conj(v);
  CHECK(diff_norm(cj.snapshots.back().second, expect) / l2_norm(u0) <= 1e-12);
}

TEST_CASE("b2 coupling cross-checked against the mode-pair oracle") {
  // N chosen so the packet has no Nyquist content (the oracle zeroes that
  // bin, the time stepper leaves it frozen).
  BoxGrid g = make_grid(2, 8.0, 48);
  LinearOperatorSpec spec;
  spec.field = constant_field(2, Mat::identity(2), 2, 1.0, FieldKind::Elliptic);
  spec.has_b2 = true;
  spec.b2[0] = [](const Vec&) { return Complex(0.0, 1.0); };
  GridField u0 = wave_packet(g, 2.0);
  EvolveConfig cfg;
  cfg.dt_safety = 0.05;
  double T = 0.1;
  EvolutionTrace tr = evolve_linear(u0, spec, T, cfg);
  GridField oracle = pair_propagator_apply(GainVariant::Elliptic, u0, T);
  CHECK(diff_norm(tr.snapshots.back().second, oracle) <= 1e-6);
}

TEST_CASE("smoothing functional") {
  BoxGrid g = make_grid(1, 8.0, 64);
  LinearOperatorSpec spec;
  spec.field = line_bump_field();

  EvolutionTrace z = evolve_linear(zero_field(g), spec, 0.2);
  SmoothingRecord zr = smoothing_functional(z, 1.0, 2);
  CHECK(zr.degenerate);

  GridField u0 = gaussian_field(g);
  EvolutionTrace tr = evolve_linear(u0, spec, 0.4);
  SmoothingRecord r = smoothing_functional(tr, 1.0, 2);
  CHECK(!r.degenerate);
  CHECK(r.ratio > 0.0);
  CHECK(std::isfinite(r.ratio));

  EvolveConfig half;
  half.dt = tr.dt * 0.5;
  SmoothingRecord r2 = smoothing_functional(evolve_linear(u0, spec, 0.4, half), 1.0, 2);
  CHECK(std::abs(r2.ratio - r.ratio) / r.ratio <= 0.05);

  EvolutionTrace tiny = tr;
  tiny.snapshots.resize(2);
  CHECK_THROWS_AS(smoothing_functional(tiny, 1.0, 2), ArgumentError);
}

TEST_CASE("k-transform energy history") {
  BoxGrid g = make_grid(1, 8.0, 48);
  LinearOperatorSpec spec;
  spec.field = line_bump_field();
  GridField u0 = gaussian_field(g);
  EvolutionTrace tr = evolve_linear(u0, spec, 0.2);

  Symbol one = constant_symbol(1, 1.0);
  EnergyHistory h = k_transform_energy(tr, one);
  REQUIRE(h.raw.size() == tr.snapshots.size());
  for (std::size_t i = 0; i < h.raw.size(); ++i)
    CHECK(std::abs(h.transformed[i] - h.raw[i]) <= 1e-10 * (1.0 + h.raw[i]));

  // Determinism: a re-run reproduces the history bit for bit.
  EnergyHistory h2 = k_transform_energy(evolve_linear(u0, spec, 0.2), one);
  for (std::size_t i = 0; i < h.raw.size(); ++i) {
    CHECK(h2.raw[i] == h.raw[i]);
    CHECK(h2.transformed[i] == h.transformed[i]);
  }
}

TEST_CASE("error operator of an integrating-factor pair") {
  BoxGrid g = make_grid(1, 10.0, 256);
  GridField probe = gaussian_field(g);

  Symbol one = constant_symbol(1, 1.0);
  ErrorOperatorReport trivial = error_operator_check(one, one, {probe});
  CHECK(trivial.ratios[0] <= 1e-12);

  // k = exp(p), ktilde = exp(-p) with p of order -1: the composition error
  // decays on high-frequency probes.
  auto p_fn = [](const Vec& x, const Vec& xi) {
    return 0.5 * std::exp(-x[0] * x[0]) / bracket(xi[0]);
  };
  Symbol k;
  k.dim = 1;
  k.evaluate = [p_fn](const Vec& x, const Vec& xi) {
    return Complex(std::exp(p_fn(x, xi)), 0.0);
  };
  Symbol kt;
  kt.dim = 1;
  kt.evaluate = [p_fn](const Vec& x, const Vec& xi) {
    return Complex(std::exp(-p_fn(x, xi)), 0.0);
  };
  ErrorOperatorReport rep = error_operator_check(kt, k, {probe}, {8.0, 16.0, 32.0});
  CHECK(rep.ratios[0] < 1.0);
  REQUIRE(rep.freq_sweep.size() == 3);
  CHECK(rep.freq_sweep[1].second < rep.freq_sweep[0].second);
  CHECK(rep.freq_sweep[2].second < rep.freq_sweep[1].second);
}

TEST_CASE("constant-coefficient degenerate-direction growth demo") {
  BoxGrid g = make_grid(1, 4.0 * M_PI, 320);

  std::vector<GrowthRow> base = mizohata_blowup_demo(0.0, 0.5, g, 4);
  for (const GrowthRow& r : base) CHECK(r.growth >= 1.0);

  std::vector<GrowthRow> grow = mizohata_blowup_demo(8.0, 0.5, g, 4);
  const GrowthRow& last = grow.back();
  CHECK(last.t == doctest::Approx(0.5));
  // Exact gaussian-packet value e^{lambda t + t^2/2}; within 15% of e^{lambda t}.
  double exact = std::exp(8.0 * 0.5 + 0.25 * 0.5);
  CHECK(last.growth == doctest::Approx(exact).epsilon(1e-3));
  CHECK(std::abs(last.growth - last.reference) / last.reference <= 0.15);

  std::vector<GrowthRow> unit = mizohata_blowup_demo(8.0, 0.5, g, 4, false);
  for (const GrowthRow& r : unit) CHECK(r.growth == 1.0);

  CHECK_THROWS_AS(mizohata_blowup_demo(8.1, 0.5, g, 4), ArgumentError);
}

TEST_CASE("gain exponent dichotomy") {
  BoxGrid g = make_grid(2, 12.0, 192);
  std::vector<double> freqs = {4.0, 8.0, 16.0};
  double T = 0.25;

  // Free case: both exponents bounded.
  std::vector<GainRow> fr =
      gain_exponent_probe(GainVariant::Ultrahyperbolic, freqs, T, g, 17, false);
  auto spread = [](const std::vector<GainRow>& rows, bool half) {
    double lo = 1e300, hi = 0.0;
    for (const GainRow& r : rows) {
      double v = half ? r.ratio_half : r.ratio_quarter;
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
    return hi / lo;
  };
  CHECK(spread(fr, true) <= 2.0);
  CHECK(spread(fr, false) <= 2.0);

  // Conjugate coupling: the ultrahyperbolic variant loses the half gain but
  // keeps the quarter gain; the elliptic variant keeps the half gain.
  std::vector<GainRow> uh =
      gain_exponent_probe(GainVariant::Ultrahyperbolic, freqs, T, g, 17, true);
  CHECK(uh[1].ratio_half > uh[0].ratio_half);
  CHECK(uh[2].ratio_half > uh[1].ratio_half);
  CHECK(uh[2].ratio_half / uh[0].ratio_half >= 1.5);
  CHECK(spread(uh, false) <= 2.0);

  std::vector<GainRow> el =
      gain_exponent_probe(GainVariant::Elliptic, freqs, T, g, 17, true);
  CHECK(spread(el, true) <= 2.0);
}

TEST_CASE("weighted growth bound") {
  BoxGrid g = make_grid(1, 8.0, 64);
  LinearOperatorSpec spec;
  spec.field = line_bump_field();

  WeightedGrowthReport z =
      weighted_growth_check(zero_field(g), spec, 0.2, 1, 0.0);
  CHECK(z.bounded);
  for (double v : z.lhs) CHECK(v == 0.0);

  GridField u0 = gaussian_field(g);
  WeightedGrowthReport r = weighted_growth_check(u0, spec, 0.2, 1, 0.0);
  double w0 = weighted_norm(u0, 0.0, 2.0);
  CHECK(r.lhs[0] == doctest::Approx(w0 * w0).epsilon(1e-12));
  CHECK(r.fitted_c[0] == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(r.bounded);
  for (double c : r.fitted_c) CHECK(std::isfinite(c));

  WeightedGrowthReport rh = weighted_growth_check(u0, spec, 0.1, 1, 0.0);
  for (std::size_t j = 1; j < r.fitted_c.size(); ++j)
    if (std::abs(r.fitted_c[j]) > 1e-6)
      CHECK(std::abs(rh.fitted_c[j]) <= 2.5 * std::abs(r.fitted_c[j]) + 1.0);
}
