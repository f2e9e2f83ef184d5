#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "schrodlab/scenario.hpp"

using namespace schrodlab;

TEST_CASE("builtin catalogue") {
  auto names = builtin_names();
  CHECK(names.size() == 6);
  for (const std::string& n : names) {
    CoefficientField f = builtin_field(n);
    CHECK(f.dim == 2);
    CHECK(nondegeneracy_minimum(f, 4.0, 9, 32) > 0.0);
  }
  CHECK(is_field_builtin("elliptic-bump"));
  CHECK(!is_field_builtin("model-nls"));
  CHECK_THROWS_AS(builtin_field("nope"), ArgumentError);
}

TEST_CASE("builtin geometry spot values") {
  CoefficientField uh = builtin_field("ultrahyperbolic-bump");
  Vec z{};
  CHECK(uh.entry[0][0](z) == doctest::Approx(1.4));
  CHECK(uh.entry[1][1](z) == doctest::Approx(-0.6));
  CHECK(uh.entry[0][1](z) == doctest::Approx(0.1));
  Vec far = vec2(8.0, 0.0);
  CHECK(std::abs(uh.entry[0][0](far) - 1.0) < 1e-20);

  CoefficientField g = builtin_field("trapped-gallery");
  CHECK(g.entry[0][0](vec2(3.0, 0.0)) == doctest::Approx(0.15));
  CHECK(g.entry[0][1](vec2(3.0, 0.0)) == doctest::Approx(0.0));
}

TEST_CASE("config parse, validate, round trip") {
  ScenarioConfig c = parse_scenario_config(R"({
    "name": "demo", "builtin": "elliptic-bump",
    "grid": {"dim": 2, "half_length": 8.0, "points": 64},
    "evolution": {"T": 0.2, "dt": 0.001, "stride": 2},
    "sweep": [4.0, 8.0], "experiments": ["trace", "evolve"], "seed": 7
  })");
  CHECK(c.name == "demo");
  CHECK(c.grid.points == 64);
  CHECK(c.evolution.stride == 2);
  CHECK(c.experiments.size() == 2);

  ScenarioConfig back = parse_scenario_config(scenario_config_to_json(c));
  CHECK(scenario_config_to_json(back) == scenario_config_to_json(c));
  CHECK(config_fingerprint(back) == config_fingerprint(c));
  CHECK(config_fingerprint(c).size() == 16);

  ScenarioConfig other = c;
  other.seed = 8;
  CHECK(config_fingerprint(other) != config_fingerprint(c));
}

TEST_CASE("invalid configs report every violation") {
  CHECK_THROWS_AS(parse_scenario_config("not json"), ArgumentError);
  try {
    parse_scenario_config(R"({"builtin": "nope",
      "grid": {"points": 63}, "experiments": ["bogus"]})");
    CHECK(false);
  } catch (const ArgumentError& e) {
    std::string msg = e.what();
    CHECK(msg.find("unknown builtin") != std::string::npos);
    CHECK(msg.find("points") != std::string::npos);
    CHECK(msg.find("bogus") != std::string::npos);
  }
}

TEST_CASE("scenario field applies truncation and perturbation") {
  ScenarioConfig c;
  c.builtin = "ultrahyperbolic-bump";
  c.truncation_radius = 8.0;
  CoefficientField f = scenario_field(c);
  // Constant beyond 2R.
  Vec far = vec2(17.0, 0.0);
  CHECK(f.entry[0][0](far) == doctest::Approx(1.0));
  CHECK(f.entry[1][1](far) == doctest::Approx(-1.0));

  c.truncation_radius = 0.0;
  c.epsilon = 0.01;
  CoefficientField p = scenario_field(c);
  Vec z{};
  CHECK(p.entry[0][0](z) == doctest::Approx(1.4 + 0.01));
  CHECK(p.entry[0][1](z) == doctest::Approx(0.1 + 0.003));

  CHECK_THROWS_AS(scenario_field([] {
                    ScenarioConfig bad;
                    bad.builtin = "elliptic-bump";
                    bad.epsilon = 10.0;  // breaks nondegeneracy
                    return bad;
                  }()),
                  PerturbationTooLargeError);
}

TEST_CASE("schwartz first-order term is purely imaginary and decaying") {
  LinearOperatorSpec spec;
  spec.field = builtin_field("elliptic-bump");
  add_schwartz_b1(spec, 2, 0.15);
  CHECK(spec.b1_differential);
  Complex v = spec.b1_coeff[0](vec2(0.0, 0.0));
  CHECK(v.real() == 0.0);
  CHECK(v.imag() == doctest::Approx(0.15));
  CHECK(std::abs(spec.b1_coeff[1](vec2(5.0, 0.0))) < 1e-9);
}

TEST_CASE("model problem validates") {
  NonlinearProblem p = model_nls_problem(2);
  validate_problem(p);
  CHECK(monomial_degree(p.monomials[0]) == 2);
}
