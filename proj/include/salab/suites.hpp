#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "salab/theory.hpp"

namespace salab {

struct CheckResult {
  std::string suite;
  std::string name;
  bool passed = false;
  bool skipped = false;  // precondition not met; not a violation
  std::string detail;
};

struct SuiteOptions {
  std::uint64_t seed = 2;
  int n_runs = 1000;
  long horizon = 10000;
  int threads = 1;
  std::string csv_dir;             // empty: no CSV twin
  double tamper_hurst_offset = 0;  // negative-control hook: fGn generated at H+offset
  std::ostream* table_out = nullptr;  // per-checkpoint u-moment table sink
};

/// Auxiliary-lemma sweeps on the documented parameter grids, k up to 1e5.
/// Deterministic; combos outside a lemma's preconditions are reported as
/// skipped.
std::vector<CheckResult> run_lemma_suite(const SuiteOptions& options);

/// Sampler statistics: replay determinism, zero means, exact fGn
/// autocovariance, the stable alpha=2 Gaussian limit, and the white-noise
/// degenerations (FARIMA c=0, fGn H=1/2).
std::vector<CheckResult> run_noise_suite(const SuiteOptions& options);

/// Monte Carlo checks of the averaged-noise moment bounds (heavy-tailed
/// p-th moment and LRD second moment) plus the zero-noise smoke case.
std::vector<CheckResult> run_u_moment_suite(const SuiteOptions& options);

std::vector<CheckResult> run_all_suites(const SuiteOptions& options);

bool all_passed(const std::vector<CheckResult>& results);

}  // namespace salab
