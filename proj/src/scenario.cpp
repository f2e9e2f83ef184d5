#include "schrodlab/scenario.hpp"

#include <cmath>
#include <cstdio>

#include <json.hpp>

namespace schrodlab {

namespace {

CoefficientField elliptic_bump_field() {
  CoefficientField f;
  f.dim = 2;
  f.asymptotic = Mat::identity(2);
  f.signature_k = 2;
  f.nu = 2.0;
  f.kind = FieldKind::Elliptic;
  f.id = "elliptic-bump";
  for (int j = 0; j < 2; ++j)
    for (int k = j; k < 2; ++k) {
      double kron = (j == k) ? 1.0 : 0.0;
      set_entry(f, j, k,
                [kron](const Vec& x) { return kron * (1.0 + std::exp(-norm2(x, 2))); },
                [kron](const Vec& x) {
                  return scale(x, -2.0 * kron * std::exp(-norm2(x, 2)), 2);
                });
    }
  return f;
}

CoefficientField ultrahyperbolic_bump_field() {
  CoefficientField f;
  f.dim = 2;
  f.asymptotic = Mat::diag(2, {1.0, -1.0});
  f.signature_k = 1;
  f.nu = 1.0;
  f.kind = FieldKind::Ultrahyperbolic;
  f.id = "ultrahyperbolic-bump";
  auto bump_entry = [&f](int j, int k, double base, double amp) {
    set_entry(f, j, k,
              [base, amp](const Vec& x) { return base + amp * std::exp(-norm2(x, 2)); },
              [amp](const Vec& x) {
                return scale(x, -2.0 * amp * std::exp(-norm2(x, 2)), 2);
              });
  };
  bump_entry(0, 0, 1.0, 0.4);
  bump_entry(1, 1, -1.0, 0.4);
  bump_entry(0, 1, 0.0, 0.1);
  return f;
}

CoefficientField trapped_gallery_field() {
  CoefficientField f;
  f.dim = 2;
  f.asymptotic = Mat::identity(2);
  f.signature_k = 2;
  f.nu = 0.15;  // well floor 1 - 0.85
  f.kind = FieldKind::Elliptic;
  f.id = "trapped-gallery";
  auto c = [](double r) { return 1.0 - 0.85 * std::exp(-2.0 * (r - 3.0) * (r - 3.0)); };
  auto dc = [](double r) {
    return 3.4 * (r - 3.0) * std::exp(-2.0 * (r - 3.0) * (r - 3.0));
  };
  for (int j = 0; j < 2; ++j)
    for (int k = j; k < 2; ++k) {
      double kron = (j == k) ? 1.0 : 0.0;
      set_entry(f, j, k, [kron, c](const Vec& x) { return kron * c(norm(x, 2)); },
                [kron, dc](const Vec& x) {
                  double r = norm(x, 2);
                  if (r < 1e-12 || kron == 0.0) return Vec{};
                  return scale(x, kron * dc(r) / r, 2);
                });
    }
  return f;
}

const std::vector<std::string> kBuiltins = {
    "elliptic-bump", "ultrahyperbolic-bump", "trapped-gallery",
    "mizohata-constant", "quarter-gain", "model-nls"};

}  // namespace

std::vector<std::string> builtin_names() { return kBuiltins; }

bool is_field_builtin(const std::string& name) {
  return name == "elliptic-bump" || name == "ultrahyperbolic-bump" ||
         name == "trapped-gallery";
}

CoefficientField builtin_field(const std::string& name) {
  if (name == "elliptic-bump") return elliptic_bump_field();
  if (name == "ultrahyperbolic-bump") return ultrahyperbolic_bump_field();
  if (name == "trapped-gallery") return trapped_gallery_field();
  if (name == "mizohata-constant" || name == "quarter-gain" || name == "model-nls")
    return constant_field(2, Mat::identity(2), 2, 1.0, FieldKind::Elliptic, name);
  throw ArgumentError("unknown builtin '" + name + "'");
}

void add_schwartz_b1(LinearOperatorSpec& spec, int dim, double strength) {
  std::array<std::function<Complex(const Vec&)>, kMaxDim> beta{};
  for (int j = 0; j < dim; ++j)
    beta[j] = [strength, dim](const Vec& x) {
      return Complex(0.0, strength * std::exp(-norm2(x, dim)));
    };
  set_differential_b1(spec, beta);
}

NonlinearProblem model_nls_problem(int dim) {
  NonlinearProblem p;
  p.spec.field = constant_field(dim, Mat::identity(dim), dim, 1.0,
                                FieldKind::Elliptic, "model-nls");
  Monomial m;
  m.pow_u = 1;
  m.pow_grad[0] = 1;
  p.monomials.push_back(m);
  return p;
}

ScenarioConfig parse_scenario_config(const std::string& json_text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(json_text);
  } catch (const nlohmann::json::exception& e) {
    throw ArgumentError(std::string("config is not valid JSON: ") + e.what());
  }
  ScenarioConfig c;
  std::vector<std::string> errors;
  try {
    c.name = j.value("name", std::string("run"));
    c.builtin = j.value("builtin", std::string(""));
    if (j.contains("grid")) {
      const auto& g = j.at("grid");
      c.grid.dim = g.value("dim", 2);
      c.grid.half_length = g.value("half_length", 12.0);
      c.grid.points = g.value("points", 64);
    }
    if (j.contains("evolution")) {
      const auto& e = j.at("evolution");
      c.evolution.T = e.value("T", 0.25);
      c.evolution.dt = e.value("dt", 0.0);
      c.evolution.stride = e.value("stride", 1);
    }
    c.b1_strength = j.value("b1_strength", 0.0);
    c.epsilon = j.value("epsilon", 0.0);
    c.truncation_radius = j.value("truncation_radius", 0.0);
    c.s_param = j.value("s_param", 0.0);
    c.seed = j.value("seed", std::uint64_t{1});
    if (j.contains("sweep")) c.sweep = j.at("sweep").get<std::vector<double>>();
    if (j.contains("experiments"))
      c.experiments = j.at("experiments").get<std::vector<std::string>>();
  } catch (const nlohmann::json::exception& e) {
    throw ArgumentError(std::string("config field has the wrong type: ") + e.what());
  }

  bool known = false;
  for (const std::string& b : kBuiltins) known = known || b == c.builtin;
  if (!known) errors.push_back("unknown builtin '" + c.builtin + "'");
  if (c.grid.dim < 1 || c.grid.dim > 3) errors.push_back("grid.dim must be 1..3");
  if (c.grid.points < 4 || c.grid.points % 2 != 0)
    errors.push_back("grid.points must be even and >= 4");
  if (!(c.grid.half_length > 0.0)) errors.push_back("grid.half_length must be positive");
  if (!(c.evolution.T >= 0.0)) errors.push_back("evolution.T must be non-negative");
  if (c.evolution.dt < 0.0) errors.push_back("evolution.dt must be non-negative");
  if (c.evolution.stride < 1) errors.push_back("evolution.stride must be >= 1");
  if (c.truncation_radius != 0.0 && c.truncation_radius <= 1.0)
    errors.push_back("truncation_radius must be > 1 (or 0 for none)");
  for (const std::string& e : c.experiments)
    if (e != "trace" && e != "symbol" && e != "evolve" && e != "smooth" &&
        e != "nonlinear" && e != "verify")
      errors.push_back("unknown experiment '" + e + "'");
  if (!errors.empty()) {
    std::string msg = "invalid scenario config:";
    for (const std::string& e : errors) msg += "\n  - " + e;
    throw ArgumentError(msg);
  }
  return c;
}

std::string scenario_config_to_json(const ScenarioConfig& c) {
  nlohmann::json j;
  j["name"] = c.name;
  j["builtin"] = c.builtin;
  j["grid"] = {{"dim", c.grid.dim},
               {"half_length", c.grid.half_length},
               {"points", c.grid.points}};
  j["evolution"] = {{"T", c.evolution.T},
                    {"dt", c.evolution.dt},
                    {"stride", c.evolution.stride}};
  j["b1_strength"] = c.b1_strength;
  j["epsilon"] = c.epsilon;
  j["truncation_radius"] = c.truncation_radius;
  j["s_param"] = c.s_param;
  j["sweep"] = c.sweep;
  j["experiments"] = c.experiments;
  j["seed"] = c.seed;
  return j.dump(2);
}

std::string config_fingerprint(const ScenarioConfig& config) {
  std::string s = scenario_config_to_json(config);
  std::uint64_t h = 14695981039346656037ull;
  for (unsigned char ch : s) {
    h ^= ch;
    h *= 1099511628211ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

CoefficientField scenario_field(const ScenarioConfig& config) {
  CoefficientField f = builtin_field(config.builtin);
  if (config.truncation_radius > 0.0)
    f = truncate(f, config.truncation_radius, plateau_profile(1.0, 2.0));
  if (config.epsilon != 0.0) {
    std::array<std::array<ScalarFn, kMaxDim>, kMaxDim> B1{};
    std::array<std::array<GradFn, kMaxDim>, kMaxDim> B1g{};
    // Symmetric gaussian perturbation with mixed signs.
    const double w[2][2] = {{1.0, 0.3}, {0.3, -0.5}};
    for (int j = 0; j < f.dim && j < 2; ++j)
      for (int k = 0; k < f.dim && k < 2; ++k) {
        double a = w[j][k];
        int n = f.dim;
        B1[j][k] = [a, n](const Vec& x) { return a * std::exp(-norm2(x, n)); };
        B1g[j][k] = [a, n](const Vec& x) {
          return scale(x, -2.0 * a * std::exp(-norm2(x, n)), n);
        };
      }
    f = perturbed_field(f, B1, B1g, config.epsilon);
  }
  return f;
}

}  // namespace schrodlab
