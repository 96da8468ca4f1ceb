#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace qpake {

struct CriterionResult {
  int id = 0;
  std::string name;
  bool pass = false;
  std::string detail;
  double seconds = 0.0;
};

// The acceptance suite: one entry per criterion, each with its pinned
// parameters and tolerances. `progress` (optional) receives one line per
// criterion as it finishes.
std::vector<CriterionResult> run_acceptance_suite(std::ostream* progress);

bool all_passed(const std::vector<CriterionResult>& results);

}  // namespace qpake
