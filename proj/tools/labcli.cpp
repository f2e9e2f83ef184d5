// Command-line front end: scenario experiments, the acceptance battery, and
// config canonicalization.  Exit codes: 0 success (findings included),
// 1 internal error, 2 config error, 3 verification failure.
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <CLI11.hpp>

#include "schrodlab/accept.hpp"
#include "schrodlab/runio.hpp"

namespace {

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw schrodlab::ArgumentError("cannot open config file " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

struct CommonOpts {
  std::string config;
  std::string out = "out";
  std::uint64_t seed = 0;  // 0: keep the config's seed
  int workers = 0;
};

int run_experiment(const CommonOpts& o, const std::string& experiment) {
  schrodlab::ScenarioConfig cfg =
      schrodlab::parse_scenario_config(read_file(o.config));
  if (o.seed != 0) cfg.seed = o.seed;
  cfg.experiments = {experiment};
  schrodlab::RunOutcome res = schrodlab::run_scenario(cfg, o.out, o.workers);
  for (const schrodlab::CheckSummary& c : res.manifest.checks)
    std::printf("%s [%s] %s\n", c.name.c_str(), c.status.c_str(),
                c.detail.c_str());
  return res.verification_failed ? 3 : 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"variable-coefficient Schrodinger verification lab"};
  app.require_subcommand(1);

  CommonOpts o;
  std::string tier = "fast";
  std::string experiment;
  for (const char* name :
       {"trace", "symbol", "smooth", "evolve", "nonlinear"}) {
    CLI::App* sub = app.add_subcommand(name, std::string("run the ") + name +
                                                 " experiment of a config");
    sub->add_option("--config", o.config, "scenario config JSON")->required();
    sub->add_option("--out", o.out, "output directory");
    sub->add_option("--seed", o.seed, "override the config seed");
    sub->add_option("--workers", o.workers, "worker threads (0: auto)");
    sub->callback([&o, &experiment, name] { experiment = name; });
  }

  CLI::App* verify = app.add_subcommand("verify", "run the acceptance battery");
  verify->add_option("--out", o.out, "directory for per-criterion CSV tables");
  verify->add_option("--workers", o.workers, "worker threads (0: auto)");
  verify->add_option("--tier", tier, "fast | full")
      ->check(CLI::IsMember({"fast", "full"}));

  CLI::App* exp = app.add_subcommand(
      "export", "canonicalize a config and print its fingerprint");
  exp->add_option("--config", o.config, "scenario config JSON")->required();
  exp->add_option("--out", o.out, "output directory");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 2;
  }

  try {
    if (!experiment.empty()) return run_experiment(o, experiment);

    if (verify->parsed()) {
      if (o.workers > 0)
        setenv("LAB_WORKERS", std::to_string(o.workers).c_str(), 1);
      schrodlab::Tier t =
          tier == "full" ? schrodlab::Tier::Full : schrodlab::Tier::Fast;
      std::filesystem::create_directories(o.out);
      schrodlab::CsvSink sink = [&o](const std::string& stem,
                                     const std::string& text) {
        std::ofstream(std::filesystem::path(o.out) / (stem + ".csv")) << text;
      };
      int failures = 0;
      for (const schrodlab::CriterionResult& r :
           schrodlab::run_acceptance(t, sink)) {
        std::printf("%s\n", schrodlab::format_acceptance_line(r).c_str());
        std::fflush(stdout);
        failures += r.pass ? 0 : 1;
      }
      return failures == 0 ? 0 : 3;
    }

    if (exp->parsed()) {
      schrodlab::ScenarioConfig cfg =
          schrodlab::parse_scenario_config(read_file(o.config));
      std::filesystem::create_directories(o.out);
      std::ofstream(std::filesystem::path(o.out) / "config.json")
          << schrodlab::scenario_config_to_json(cfg);
      std::printf("%s\n", schrodlab::config_fingerprint(cfg).c_str());
      return 0;
    }
  } catch (const schrodlab::ArgumentError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "internal error: %s\n", e.what());
    return 1;
  }
  return 1;
}
