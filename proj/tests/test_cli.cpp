#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "schrodlab/runio.hpp"

using namespace schrodlab;
namespace fs = std::filesystem;

namespace {

const char* kSmallConfig = R"({
  "name": "cli-smoke", "builtin": "elliptic-bump",
  "grid": {"dim": 1, "half_length": 8.0, "points": 32},
  "evolution": {"T": 0.05, "stride": 2},
  "sweep": [4.0], "seed": 5
})";

fs::path work() {
  fs::path w = CLI_WORK_DIR;
  fs::create_directories(w);
  return w;
}

int run_cli(const std::string& args) {
  std::string cmd = std::string(LABCLI_PATH) + " " + args + " > /dev/null 2>&1";
  int rc = std::system(cmd.c_str());
  return WEXITSTATUS(rc);
}

std::string slurp(const fs::path& p) {
  std::ostringstream ss;
  ss << std::ifstream(p, std::ios::binary).rdbuf();
  return ss.str();
}

}  // namespace

TEST_CASE("run_scenario writes deterministic outputs and a manifest") {
  fs::path w = work();
  ScenarioConfig cfg = parse_scenario_config(kSmallConfig);
  cfg.experiments = {"trace", "evolve", "smooth"};

  RunOutcome a = run_scenario(cfg, (w / "runA").string());
  RunOutcome b = run_scenario(cfg, (w / "runB").string());
  CHECK(!a.verification_failed);
  CHECK(a.manifest.fingerprint == config_fingerprint(cfg));
  CHECK(a.manifest.checks.size() == 3);
  for (const CheckSummary& c : a.manifest.checks) CHECK(c.status != "failed");

  // Data files are byte-identical across reruns of the same (config, seed).
  for (const char* f : {"config.json", "trace.csv", "evolve.csv", "smooth.csv"}) {
    CHECK(fs::exists(w / "runA" / f));
    CHECK(slurp(w / "runA" / f) == slurp(w / "runB" / f));
  }
  CHECK(fs::exists(w / "runA" / "manifest.json"));

  // A different seed changes the seeded outputs.
  ScenarioConfig other = cfg;
  other.seed = 6;
  run_scenario(other, (w / "runC").string());
  CHECK(slurp(w / "runA" / "trace.csv") != slurp(w / "runC" / "trace.csv"));

  // Empty experiment list still produces config + manifest.
  ScenarioConfig none = cfg;
  none.experiments.clear();
  RunOutcome empty = run_scenario(none, (w / "runD").string());
  CHECK(empty.manifest.checks.empty());
  CHECK(fs::exists(w / "runD" / "manifest.json"));
}

TEST_CASE("nonlinear experiment emits the contraction report") {
  fs::path w = work();
  ScenarioConfig cfg = parse_scenario_config(kSmallConfig);
  cfg.experiments = {"nonlinear"};
  cfg.builtin = "model-nls";
  RunOutcome res = run_scenario(cfg, (w / "runN").string());
  CHECK(!res.verification_failed);
  std::string js = slurp(w / "runN" / "nonlinear_report.json");
  CHECK(js.find("certified") != std::string::npos);
  CHECK(fs::exists(w / "runN" / "nonlinear.csv"));
}

TEST_CASE("cli exit codes and byte determinism") {
  fs::path w = work();
  fs::path cfg = w / "smoke.json";
  std::ofstream(cfg) << kSmallConfig;

  CHECK(run_cli("trace --config " + cfg.string() + " --out " +
                (w / "cliA").string() + " --workers 2") == 0);
  CHECK(run_cli("trace --config " + cfg.string() + " --out " +
                (w / "cliB").string() + " --workers 1") == 0);
  CHECK(slurp(w / "cliA" / "trace.csv") == slurp(w / "cliB" / "trace.csv"));

  // Seed override changes the data.
  CHECK(run_cli("trace --config " + cfg.string() + " --out " +
                (w / "cliC").string() + " --seed 9") == 0);
  CHECK(slurp(w / "cliA" / "trace.csv") != slurp(w / "cliC" / "trace.csv"));

  CHECK(run_cli("export --config " + cfg.string() + " --out " +
                (w / "cliE").string()) == 0);
  CHECK(fs::exists(w / "cliE" / "config.json"));

  // Config errors exit 2; bad flags exit 2; missing subcommand exits 2.
  fs::path bad = w / "bad.json";
  std::ofstream(bad) << "{\"builtin\": \"nope\"}";
  CHECK(run_cli("trace --config " + bad.string()) == 2);
  CHECK(run_cli("trace --config " + (w / "missing.json").string()) == 2);
  CHECK(run_cli("verify --tier bogus") == 2);
}
