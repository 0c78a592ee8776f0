#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <string_view>
#include <vector>

namespace salab {

/// Shortest decimal string that round-trips to the same double.
std::string format_double(double v);

/// Strict parse; throws std::invalid_argument on malformed input.
double parse_double(std::string_view s);
long parse_long(std::string_view s);
std::uint64_t parse_u64(std::string_view s);

std::string trim(std::string_view s);
std::vector<std::string> split_ws(std::string_view s);

/// Runs fn(0), ..., fn(n-1) on up to `threads` workers. Each index must
/// write only to its own output slot; callers aggregate afterwards in
/// index order so results never depend on the worker count.
void parallel_for_index(long n, int threads, const std::function<void(long)>& fn);

/// --threads default: SA_LAB_THREADS env var, else hardware concurrency.
int default_thread_count();

/// FNV-1a over a byte string, used for config fingerprints in manifests.
std::uint64_t fnv1a64(std::string_view s);

/// Run-level bootstrap standard error of the per-column mean: rows are
/// resampled with replacement n_resamples times and the SE per column is the
/// standard deviation of the resampled means. Deterministic for a fixed seed.
std::vector<double> bootstrap_se_of_mean(const std::vector<std::vector<double>>& rows,
                                         int n_resamples, std::uint64_t seed);

}  // namespace salab
