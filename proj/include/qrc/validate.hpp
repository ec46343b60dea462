#pragma once

// Built-in property and oracle checks, grouped by invariant. Used by the
// `qrc validate` subcommand and the acceptance suite.

#include <cstdint>
#include <string>
#include <vector>

namespace qrc {

struct InvariantResult {
  std::string name;
  bool passed = false;
  std::string detail;
};

struct ValidationReport {
  std::vector<InvariantResult> groups;
  bool passed() const;
};

struct ValidateOptions {
  std::uint64_t seed = 0;
  // Random reservoir steps checked for trace, Hermiticity and positivity.
  int density_steps = 10000;
  // Deliberately break one check to show that failures surface:
  // "" (none), "trace", "unitarity".
  std::string inject_fault;
};

// Names of the groups in the order they run.
std::vector<std::string> invariant_groups();

ValidationReport validate(const ValidateOptions& options = {});

}  // namespace qrc
