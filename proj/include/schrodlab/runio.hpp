#ifndef SCHRODLAB_RUNIO_HPP
#define SCHRODLAB_RUNIO_HPP

#include "schrodlab/scenario.hpp"

namespace schrodlab {

inline constexpr const char* kLabVersion = "1.0.0";

struct CheckSummary {
  std::string name;
  std::string status;  // "ok" | "finding" | "failed"
  std::string detail;
};

struct RunManifest {
  std::string fingerprint;
  std::string version = kLabVersion;
  std::string started;   // ISO 8601 UTC
  std::string finished;
  std::vector<std::pair<std::string, std::uint64_t>> files;  // name, bytes
  std::vector<CheckSummary> checks;
};

std::string manifest_to_json(const RunManifest& m);

struct RunOutcome {
  RunManifest manifest;
  // true when any check reported "failed" (internal inconsistency, not a
  // physics finding: blow-up and trapping are findings, status "finding").
  bool verification_failed = false;
};

// Executes every experiment listed in the config, writing one CSV (or JSON)
// per experiment plus manifest.json into out_dir.  Data files are
// byte-deterministic functions of (config, seed); only the manifest carries
// wall-clock timestamps.  An empty experiment list still writes the
// manifest.
RunOutcome run_scenario(const ScenarioConfig& config, const std::string& out_dir,
                        int workers = 0);

}  // namespace schrodlab

#endif  // SCHRODLAB_RUNIO_HPP
