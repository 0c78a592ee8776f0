#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <memory>
#include <string>
#include <variant>
#include <vector>

#include "salab/fft.hpp"
#include "salab/rng.hpp"

namespace salab {

// Noise families. Coordinates of a d-dimensional noise vector are always
// d independent scalar copies of the same scalar law.

struct MdsGaussian {
  double std_dev = 1.0;
};

/// Pareto shifted to zero mean; raw support [scale, inf), tail index alpha
/// in (1,2) so the variance is infinite but moments of order p < alpha exist.
struct ParetoCentered {
  double alpha = 1.5;
  double scale = 1.0;
};

/// Symmetric alpha-stable, location 0, skew 0. alpha = 2 is N(0, 2 scale^2);
/// alpha = 1 is Cauchy and lies outside the finite-mean theory.
struct SymAlphaStable {
  double alpha = 1.5;
  double scale = 1.0;
};

/// Fractional Gaussian noise (unit variance before scaling). Long-range
/// dependent for hurst > 1/2 with covariance-decay exponent delta = 2 - 2H.
struct Fgn {
  double hurst = 0.7;
  double scale = 1.0;
};

/// Gaussian FARIMA(0,c,0) via the truncated moving-average representation;
/// delta = 1 - 2c.
struct Farima {
  double c = 0.3;
  double scale = 1.0;
  int truncation = 500;
};

using NoiseModel = std::variant<MdsGaussian, ParetoCentered, SymAlphaStable, Fgn, Farima>;

void validate(const NoiseModel& model);  // throws std::invalid_argument
std::string kind_name(const NoiseModel& model);
bool is_long_range(const NoiseModel& model);

/// Largest moment order admitted by the experiment config (alpha for the
/// heavy-tailed kinds, 2 otherwise).
double moment_ceiling(const NoiseModel& model);

/// Default p for reporting heavy-tailed moments: alpha - 0.1 (the p-th moment
/// exists only strictly below alpha); 2 for the square-integrable kinds.
double default_moment_order(const NoiseModel& model);

/// Covariance-decay exponent: 2-2H for fGn, 1-2c for FARIMA. Throws for the
/// independent kinds.
double lrd_delta(const NoiseModel& model);

// -- scalar samplers ----------------------------------------------------------

/// Inverse-CDF Pareto draw minus the mean scale*alpha/(alpha-1).
double sample_pareto_centered(double alpha, double scale, Rng& rng);

/// Chambers-Mallows-Stuck, symmetric case; alpha = 2 short-circuits to the
/// Gaussian branch N(0, 2 scale^2).
double sample_sym_alpha_stable(double alpha, double scale, Rng& rng);

/// Exact autocovariance of unit-variance fGn at integer lag h:
/// 0.5 (|h+1|^{2H} - 2|h|^{2H} + |h-1|^{2H}).
double fgn_autocovariance(double hurst, long h);

/// Precomputed circulant spectrum for exact fGn synthesis of length n.
class FgnSpectrum {
 public:
  FgnSpectrum(double hurst, std::size_t n);
  std::size_t path_length() const { return n_; }
  /// One exact sample path of length n, scaled.
  void sample(double scale, Rng& rng, double* out) const;

 private:
  std::size_t n_;
  Fft fft_;
  std::vector<double> amplitude_;  // sqrt(eigenvalue / m)
};

/// Exact stationary fGn via circulant embedding; autocovariance
/// scale^2 * fgn_autocovariance(hurst, h).
std::vector<double> fgn_generate(double hurst, std::size_t n, double scale, Rng& rng);

/// Moving-average weights of (1-L)^{-c}: psi_0 = 1, psi_j = psi_{j-1}(j-1+c)/j.
std::vector<double> farima_coefficients(double c, int trunc_level);

/// eta_t = sigma * sum_{j<=L} psi_j eps_{t-j} with eps iid N(0,1); a burn-in
/// of trunc_level pre-samples fills the window before eta_0.
std::vector<double> farima_generate(double c, double sigma, int trunc_level, std::size_t n,
                                    Rng& rng);

// -- vector stream ------------------------------------------------------------

inline constexpr std::size_t kDefaultLrdBudgetBytes = std::size_t{4} << 30;

/// Emits exactly `horizon` d-vectors; coordinate c is driven by an engine
/// seeded hash_combine(seed, c), so coordinates are independent and replay
/// is bit-identical regardless of thread scheduling. LRD kinds pre-generate
/// full-horizon per-coordinate paths (no streaming synthesis); the memory
/// budget guards against oversized requests.
class NoiseStream {
 public:
  NoiseStream(const NoiseModel& model, int dim, long horizon, std::uint64_t seed,
              std::size_t memory_budget_bytes = kDefaultLrdBudgetBytes);

  void next(Eigen::VectorXd& out);
  long emitted() const { return emitted_; }
  long horizon() const { return horizon_; }
  int dim() const { return dim_; }
  const NoiseModel& model() const { return model_; }

 private:
  NoiseModel model_;
  int dim_;
  long horizon_;
  long emitted_ = 0;
  std::vector<Rng> coord_rng_;
  std::vector<std::vector<double>> pre_;  // LRD kinds only: [dim][horizon]
};

/// Assumption-style noise magnitude: for square- or p-integrable kinds
/// (mean ||eta||^p over n_samples)^(1/p); for the LRD kinds the envelope
/// sigma^2 = max_{h<=1000} |gamma_hat(h)| (1+h)^delta from one long stream.
double estimate_sigma(const NoiseModel& model, int dim, double p_or_two, long n_samples,
                      std::uint64_t seed);

}  // namespace salab
