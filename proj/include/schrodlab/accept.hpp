#ifndef SCHRODLAB_ACCEPT_HPP
#define SCHRODLAB_ACCEPT_HPP

#include <functional>
#include <string>
#include <vector>

namespace schrodlab {

enum class Tier { Fast, Full };

struct CriterionResult {
  int index = 0;
  std::string name;
  bool pass = false;
  std::string detail;  // measured values, or the error that aborted the run
  double seconds = 0.0;
};

// Receives (file stem, csv text) for each criterion that produces a table.
using CsvSink = std::function<void(const std::string&, const std::string&)>;

// Runs the 14-criterion battery.  Tolerances are pinned inside; Fast shrinks
// probe counts and grids, Full runs the spec-scale versions.  only_index
// restricts the run to a single criterion (0: all).
std::vector<CriterionResult> run_acceptance(Tier tier, const CsvSink& sink = {},
                                            int only_index = 0);

// "criterion 03 [pass] uniform-non-trapping: ... (12.3s)"
std::string format_acceptance_line(const CriterionResult& r);

}  // namespace schrodlab

#endif  // SCHRODLAB_ACCEPT_HPP
