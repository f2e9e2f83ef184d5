#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "schrodlab/factor.hpp"

using namespace schrodlab;

namespace {

CoefficientField line_field() {
  return constant_field(1, Mat::identity(1), 1, 1.0, FieldKind::Elliptic, "line");
}

// A(x) = (1 + e^{-|x|^2}) I on R^2.
CoefficientField elliptic_bump() {
  CoefficientField f;
  f.dim = 2;
  f.asymptotic = Mat::identity(2);
  f.nu = 2.0;
  f.kind = FieldKind::Elliptic;
  f.id = "test-bump";
  for (int j = 0; j < 2; ++j)
    for (int k = j; k < 2; ++k) {
      double kron = (j == k) ? 1.0 : 0.0;
      set_entry(f, j, k,
                [kron](const Vec& x) { return kron * (1.0 + std::exp(-norm2(x, 2))); },
                [kron](const Vec& x) {
                  double e = std::exp(-norm2(x, 2));
                  return scale(x, -2.0 * e * kron, 2);
                });
    }
  return f;
}

Symbol gaussian_b1_1d() {
  // Re b1(x, xi) = -e^{-x^2} xi.
  Symbol b1;
  b1.dim = 1;
  b1.order_m = 1.0;
  b1.parity = Parity::Odd;
  b1.class_tag = "classical";
  b1.evaluate = [](const Vec& x, const Vec& xi) {
    return Complex(-std::exp(-x[0] * x[0]) * xi[0], 0.0);
  };
  return b1;
}

DoiProfiles test_profiles() {
  DoiProfiles p;
  p.psi = rising_profile(1.0, 4.0);     // in |x|^2: 1 for |x| >= 2
  p.phi1 = plateau_profile(3.0, 6.0);   // 1 on |x| <= 3
  p.phi2 = rising_profile(1.0, 2.0);    // kills |xi| <= 1
  return p;
}

}  // namespace

TEST_CASE("trivial integrating factor: zero generator") {
  auto f = elliptic_bump();
  Symbol zero = constant_symbol(2, 0.0);
  auto fam = integrating_factor(f, zero, 0.0, rising_profile(1.0, 2.0));
  Vec x = vec2(0.5, -0.3), xi = vec2(5.0, 1.0);
  CHECK(fam.b.evaluate(x, xi).real() == 0.0);
  CHECK(fam.p.evaluate(x, xi).real() == 0.0);
  CHECK(fam.p_even.evaluate(x, xi).real() == 0.0);
  CHECK(fam.k.evaluate(x, xi).real() == 1.0);
  CHECK(fam.k_tilde.evaluate(x, xi).real() == 1.0);
  CHECK(fam.truncation_warnings->load() == 0);
}

TEST_CASE("backward flow integral matches the error-function closed form") {
  auto f = line_field();
  auto fam = integrating_factor(f, gaussian_b1_1d(), 0.0, rising_profile(1.0, 2.0));
  // p(x, xi) = chi(|xi|/2) (sqrt(pi)/4)(1 + erf(x)) for xi > 0.
  for (double x : {-1.5, -0.5, 0.0, 0.8, 2.0}) {
    double want = 0.25 * std::sqrt(M_PI) * (1.0 + std::erf(x));
    double got = fam.p.evaluate(vec1(x), vec1(5.0)).real();
    CHECK(got == doctest::Approx(want).epsilon(1e-6));
    double got_smooth = fam.p_smooth.evaluate(vec1(x), vec1(5.0)).real();
    CHECK(got_smooth == doctest::Approx(want).epsilon(1e-6));
  }
  // xi < 0 branch: -(sqrt(pi)/4)(1 - erf(x)).
  double want_neg = -0.25 * std::sqrt(M_PI) * (1.0 - std::erf(0.3));
  CHECK(fam.p.evaluate(vec1(0.3), vec1(-5.0)).real() ==
        doctest::Approx(want_neg).epsilon(1e-6));
  // Low frequencies are gated off.
  CHECK(fam.p.evaluate(vec1(0.0), vec1(1.5)).real() == 0.0);
}

TEST_CASE("family invariants: evenness, positivity, reciprocal") {
  auto f = elliptic_bump();
  Symbol b1;
  b1.dim = 2;
  b1.parity = Parity::Odd;
  b1.evaluate = [](const Vec& x, const Vec& xi) {
    return Complex(-std::exp(-norm2(x, 2)) * (xi[0] + 0.5 * xi[1]), 0.0);
  };
  auto fam = integrating_factor(f, b1, 0.0, rising_profile(1.0, 2.0));
  CounterRng rng(11);
  for (int i = 0; i < 10; ++i) {
    Vec x = vec2(rng.uniform(-2, 2), rng.uniform(-2, 2));
    Vec xi = vec2(rng.uniform(-8, 8), rng.uniform(-8, 8));
    if (norm(xi, 2) < 4.0) xi = scale(xi, 4.0 / std::max(norm(xi, 2), 0.1), 2);
    double pe = fam.p_even.evaluate(x, xi).real();
    double pe_neg = fam.p_even.evaluate(x, scale(xi, -1.0, 2)).real();
    CHECK(pe == doctest::Approx(pe_neg).epsilon(1e-12));  // even
    double k = fam.k.evaluate(x, xi).real();
    double kt = fam.k_tilde.evaluate(x, xi).real();
    CHECK(k > 0.0);
    CHECK(kt > 0.0);
    CHECK(k * kt == doctest::Approx(1.0).epsilon(1e-12));  // reciprocal
    // Odd generator: p_even integrates an odd symbol over symmetrized rays.
    double b = fam.b.evaluate(x, xi).real();
    double b_neg = fam.b.evaluate(x, scale(xi, -1.0, 2)).real();
    CHECK(b == doctest::Approx(-b_neg).epsilon(1e-12));
  }
}

TEST_CASE("cancellation residuals vanish for the zero family and decay for gaussian b1") {
  auto f = line_field();
  Symbol zero = constant_symbol(1, 0.0);
  auto fam0 = integrating_factor(f, zero, 0.0, rising_profile(1.0, 2.0));
  std::vector<PhasePoint> probes{{vec1(0.0), vec1(1.0)}, {vec1(0.7), vec1(-1.0)}};
  auto rows0 = verify_cancellation(fam0, f, {4.0, 8.0}, probes);
  for (const auto& r : rows0) {
    CHECK(r.res_p_even == 0.0);
    CHECK(r.res_k == 0.0);
  }

  // Constant coefficients + gaussian b1: {h2, p_e} = b holds exactly, so the
  // measured residual is pure finite-difference noise and halves per octave.
  auto fam = integrating_factor(f, gaussian_b1_1d(), 0.0, rising_profile(1.0, 2.0));
  std::vector<PhasePoint> xs;
  for (double x : {-0.8, 0.0, 0.6}) xs.push_back({vec1(x), vec1(1.0)});
  auto rows = verify_cancellation(fam, f, {4.0, 8.0, 16.0}, xs);
  REQUIRE(rows.size() == 3);
  CHECK(rows[0].res_p_even < 1e-3);
  CHECK(rows[1].res_p_even <= rows[0].res_p_even / 2.0);
  CHECK(rows[2].res_p_even <= rows[1].res_p_even / 2.0);
  CHECK(rows[1].res_k <= rows[0].res_k / 2.0);
  CHECK(rows[2].res_k <= rows[1].res_k / 2.0);
}

TEST_CASE("escape symbol support structure") {
  auto f = elliptic_bump();
  DoiProfiles prof = test_profiles();
  Symbol p4 = doi_symbol(f, 2.0, 1.5, prof);
  Symbol p4_scaled = doi_symbol(f, 2.0, 3.0, prof);
  // |x| beyond phi1's outer radius: p3 dies, p4 = c2 p1 and scales with c2.
  Vec x_far = vec2(7.0, 0.0), xi = vec2(4.0, 1.0);
  double v = p4.evaluate(x_far, xi).real();
  double v2 = p4_scaled.evaluate(x_far, xi).real();
  CHECK(v2 == doctest::Approx(2.0 * v).epsilon(1e-12));
  double p1_direct = 4.0 * dot(x_far, matvec(f.eval(x_far), xi, 2), 2) /
                     bracket_vec(xi, 2);
  CHECK(v == doctest::Approx(1.5 * p1_direct).epsilon(1e-12));
  // |xi| <= 1: phi2 kills p3 there too.
  Vec x_mid = vec2(1.0, 0.5), xi_low = vec2(0.6, 0.0);
  double vlow = p4.evaluate(x_mid, xi_low).real();
  double p1_mid = 4.0 * prof.psi(norm2(x_mid, 2)) *
                  dot(x_mid, matvec(f.eval(x_mid), xi_low, 2), 2) /
                  bracket_vec(xi_low, 2);
  CHECK(vlow == doctest::Approx(1.5 * p1_mid).epsilon(1e-10));
  CHECK_THROWS_AS(doi_symbol(f, 10.0, 1.0, prof), ArgumentError);
}

TEST_CASE("free-flow bracket of c2 p1 in the outer region") {
  // A = I, psi = 1: {h2, p1} = 8 |xi|^2 / <xi>.
  auto f = constant_field(2, Mat::identity(2), 2, 1.0, FieldKind::Elliptic);
  DoiProfiles prof = test_profiles();
  double c2 = 2.0;
  Symbol p4 = doi_symbol(f, 2.0, c2, prof);
  Symbol h2 = hamiltonian_symbol(f);
  PhasePoint at{vec2(8.0, 1.0), vec2(3.0, -2.0)};  // psi = 1, phi1 = 0 here
  double want = 8.0 * c2 * norm2(at.xi, 2) / bracket_vec(at.xi, 2);
  CHECK(poisson_bracket(h2, p4, at).real() == doctest::Approx(want).epsilon(1e-5));
}

TEST_CASE("escape inequality on the constant elliptic field") {
  auto f = constant_field(2, Mat::identity(2), 2, 1.0, FieldKind::Elliptic);
  DoiProfiles prof = test_profiles();
  std::vector<PhasePoint> grid;
  auto xdirs = sphere_directions(2, 8);
  auto kdirs = sphere_directions(2, 8);
  for (double rx : {0.5, 2.0, 5.0, 8.0})
    for (const Vec& xd : xdirs)
      for (double rk : {2.0, 4.0, 8.0})
        for (const Vec& kd : kdirs) grid.push_back({scale(xd, rx, 2), scale(kd, rk, 2)});
  auto scaled = doi_symbol_autoscaled(f, 2.0, prof, 2, grid);
  CHECK(scaled.report.min_slack > 0.0);
  CHECK(scaled.c2 < 200.0);
  // Same c2 passes on a denser grid (stability of the fitted constant).
  std::vector<PhasePoint> grid2;
  for (double rx : {1.0, 3.0, 6.5})
    for (const Vec& xd : sphere_directions(2, 12))
      for (double rk : {3.0, 6.0})
        for (const Vec& kd : sphere_directions(2, 12))
          grid2.push_back({scale(xd, rx, 2), scale(kd, rk, 2)});
  auto rep2 = verify_escape_inequality(scaled.p4, f, 2, grid2);
  CHECK(rep2.min_slack > -0.5);
}

TEST_CASE("ray budget exhaustion raises trapping suspicion") {
  auto f = elliptic_bump();
  DoiProfiles prof = test_profiles();
  Symbol p4 = doi_symbol(f, 2.0, 1.0, prof, /*ray_budget=*/0.05);
  // Inside phi1 with an honest covector: the ray cannot reach |x| = 6 in
  // time 0.05, so evaluation must refuse rather than truncate silently.
  CHECK_THROWS_AS(p4.evaluate(vec2(0.0, 0.0), vec2(3.0, 0.0)), TrappingSuspectedError);
}

TEST_CASE("light-cone decomposition: trivial family reconstructs exactly") {
  auto uh = constant_field(2, Mat::diag(2, {1.0, -1.0}), 1, 1.0,
                           FieldKind::Ultrahyperbolic);
  Symbol zero = constant_symbol(2, 0.0);
  auto fam = integrating_factor(uh, zero, 0.0, rising_profile(1.0, 2.0));
  std::vector<PhasePoint> probes;
  CounterRng rng(3);
  for (int i = 0; i < 16; ++i) {
    double ang = rng.uniform(0.0, 2.0 * M_PI);
    double r = rng.uniform(0.5, 30.0);
    probes.push_back({vec2(r * std::cos(ang), r * std::sin(ang)),
                      scale(vec2(std::cos(ang * 2), std::sin(ang * 2)), 5.0, 2)});
  }
  auto dec = decompose_projected(fam, uh, 0, 5, probes);
  CHECK(dec.max_residual <= 1e-12);
  // q of the zero family is identically zero.
  CHECK(dec.q(vec2(3.0, 1.0), vec2(5.0, 0.0)) == 0.0);
}
