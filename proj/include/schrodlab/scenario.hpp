#ifndef SCHRODLAB_SCENARIO_HPP
#define SCHRODLAB_SCENARIO_HPP

#include "schrodlab/nlsolve.hpp"

namespace schrodlab {

// Builtin geometries and model problems.  Field builtins:
//   elliptic-bump          (1 + e^{-|x|^2}) I on R^2
//   ultrahyperbolic-bump   diag(1,-1) plus a gaussian perturbation
//   trapped-gallery        radial well c(r) I, a trapping negative control
// Model builtins (constant geometry plus lower-order/nonlinear structure):
//   mizohata-constant, quarter-gain, model-nls
std::vector<std::string> builtin_names();
bool is_field_builtin(const std::string& name);

CoefficientField builtin_field(const std::string& name);

// Schwartz-decaying first-order term Im b1 = strength e^{-|x|^2} xi_j per
// axis, installed through the differential fast path.
void add_schwartz_b1(LinearOperatorSpec& spec, int dim, double strength);

// The model derivative nonlinearity u d_{x_1} u over the free flow.
NonlinearProblem model_nls_problem(int dim);

struct GridSpec {
  int dim = 2;
  double half_length = 12.0;
  int points = 64;
};

struct EvolutionSpec {
  double T = 0.25;
  double dt = 0.0;  // 0: stability-bound default
  int stride = 1;
};

struct ScenarioConfig {
  std::string name;     // run label
  std::string builtin;  // one of builtin_names()
  GridSpec grid;
  EvolutionSpec evolution;
  double b1_strength = 0.0;
  double epsilon = 0.0;            // field perturbation amplitude
  double truncation_radius = 0.0;  // 0: untruncated
  double s_param = 0.0;
  std::vector<double> sweep;  // packet frequencies / experiment sweep values
  std::vector<std::string> experiments;  // trace|symbol|evolve|smooth|nonlinear
  std::uint64_t seed = 1;
};

// Parses and validates a JSON config; throws ArgumentError with a message
// listing every violation.
ScenarioConfig parse_scenario_config(const std::string& json_text);
std::string scenario_config_to_json(const ScenarioConfig& config);

// FNV-1a over the canonical JSON form.
std::string config_fingerprint(const ScenarioConfig& config);

// Field for a config: builtin, truncated and perturbed as requested.
CoefficientField scenario_field(const ScenarioConfig& config);

}  // namespace schrodlab

#endif  // SCHRODLAB_SCENARIO_HPP
