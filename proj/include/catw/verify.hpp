#pragma once

#include <string>
#include <vector>

// Self-contained invariant suite behind the `check` CLI subcommand: algebraic
// identities of the Hamiltonian builders, conservation laws, solver sanity on
// small instances, and bit-exact determinism. Every item is a metric against
// a fixed bound so regressions show up as numbers, not just flags.

namespace catw {

struct CheckItem {
  std::string name;
  double metric = 0.0;
  double bound = 0.0;
  bool pass = false;
  std::string detail;
};

struct CheckReport {
  std::vector<CheckItem> items;
  bool all_pass = true;
};

/// Runs the suite. fast skips the integration-based items (norm/trace
/// preservation, unitary limit, pair factorization) and trims the sampled
/// Hamiltonian times; the structural checks and determinism always run.
CheckReport run_checks(bool fast = false);

/// One line per item, aligned, pass/fail first.
std::string format_check_report(const CheckReport& report);

}  // namespace catw
