#include "salab/util.hpp"

#include "salab/rng.hpp"

#include <algorithm>
#include <cmath>
#include <atomic>
#include <charconv>
#include <cstdlib>
#include <mutex>
#include <stdexcept>
#include <thread>

namespace salab {

std::string format_double(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

double parse_double(std::string_view s) {
  double v = 0;
  auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size())
    throw std::invalid_argument("bad float: '" + std::string(s) + "'");
  return v;
}

long parse_long(std::string_view s) {
  long v = 0;
  auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size())
    throw std::invalid_argument("bad integer: '" + std::string(s) + "'");
  return v;
}

std::uint64_t parse_u64(std::string_view s) {
  std::uint64_t v = 0;
  auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size())
    throw std::invalid_argument("bad unsigned integer: '" + std::string(s) + "'");
  return v;
}

std::string trim(std::string_view s) {
  size_t b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  size_t e = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(b, e - b + 1));
}

std::vector<std::string> split_ws(std::string_view s) {
  std::vector<std::string> out;
  size_t i = 0;
  while (i < s.size()) {
    while (i < s.size() && (s[i] == ' ' || s[i] == '\t')) ++i;
    size_t j = i;
    while (j < s.size() && s[j] != ' ' && s[j] != '\t') ++j;
    if (j > i) out.emplace_back(s.substr(i, j - i));
    i = j;
  }
  return out;
}

void parallel_for_index(long n, int threads, const std::function<void(long)>& fn) {
  if (n <= 0) return;
  if (threads <= 1 || n == 1) {
    for (long i = 0; i < n; ++i) fn(i);
    return;
  }
  int workers = static_cast<int>(std::min<long>(threads, n));
  std::atomic<long> next{0};
  std::vector<std::thread> pool;
  pool.reserve(workers);
  std::atomic<bool> failed{false};
  std::exception_ptr first_error;
  std::mutex err_mutex;
  for (int w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (;;) {
        long i = next.fetch_add(1);
        if (i >= n || failed.load()) return;
        try {
          fn(i);
        } catch (...) {
          std::lock_guard<std::mutex> lock(err_mutex);
          if (!first_error) first_error = std::current_exception();
          failed.store(true);
          return;
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  if (first_error) std::rethrow_exception(first_error);
}

int default_thread_count() {
  if (const char* env = std::getenv("SA_LAB_THREADS")) {
    int v = std::atoi(env);
    if (v >= 1) return v;
  }
  unsigned hc = std::thread::hardware_concurrency();
  return hc == 0 ? 1 : static_cast<int>(hc);
}

std::uint64_t fnv1a64(std::string_view s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::vector<double> bootstrap_se_of_mean(const std::vector<std::vector<double>>& rows,
                                         int n_resamples, std::uint64_t seed) {
  const std::size_t n = rows.size();
  if (n == 0) return {};
  const std::size_t cols = rows[0].size();
  std::vector<double> se(cols, 0.0);
  if (n < 2 || n_resamples < 2) return se;
  Rng rng(seed);
  std::vector<std::vector<double>> means(n_resamples, std::vector<double>(cols, 0.0));
  for (int b = 0; b < n_resamples; ++b) {
    auto& mean_b = means[b];
    for (std::size_t i = 0; i < n; ++i) {
      const std::size_t pick = static_cast<std::size_t>(rng.next_u64() % n);
      const auto& row = rows[pick];
      for (std::size_t c = 0; c < cols; ++c) mean_b[c] += row[c];
    }
    for (std::size_t c = 0; c < cols; ++c) mean_b[c] /= static_cast<double>(n);
  }
  const double nb = static_cast<double>(n_resamples);
  for (std::size_t c = 0; c < cols; ++c) {
    double center = 0.0;
    for (int b = 0; b < n_resamples; ++b) center += means[b][c];
    center /= nb;
    double var = 0.0;
    for (int b = 0; b < n_resamples; ++b) {
      const double dev = means[b][c] - center;
      var += dev * dev;
    }
    se[c] = std::sqrt(var / (nb - 1.0));
  }
  return se;
}

}  // namespace salab
