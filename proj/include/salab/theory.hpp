#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "salab/noise.hpp"
#include "salab/sa_core.hpp"

namespace salab {

/// zeta = mu/L^2, lambda = sqrt(1 - mu^2/L^2), lambda' = 1 - lambda.
/// G(x) = x - zeta F(x) is a lambda-contraction whose fixed point is the root.
struct ContractionParams {
  double zeta;
  double lambda;
  double lambda_prime;
};

ContractionParams contraction_params(double mu, double lip);

enum class Theorem { Standard, Heavy, Lrd };

/// One theorem's explicit constants: the stepsize threshold (beta must be at
/// least c_stepsize), the offset threshold (k0 at least c_offset), the bound
/// numerator c_bound, and the decay exponent. Validity flags record whether
/// the supplied (beta, k0) satisfy the thresholds.
struct TheoremConstants {
  Theorem theorem;
  double c_stepsize;  // C1 / C4 / C7
  double c_offset;    // C2 / C5 / C8
  double c_bound;     // C3 / C6 / C9
  double rate;        // 1, p-1, delta
  double beta;
  double k0;
  bool beta_valid;
  bool k0_valid;
  bool valid() const { return beta_valid && k0_valid; }
};

/// C1 = 2/mu, C2 = beta L^2/mu + beta mu, C3 = K0 r0^2 + 2 beta sigma^2/mu.
TheoremConstants constants_standard(double mu, double lip, double beta, double sigma,
                                    double k0, double r0);

/// C4 = (2+4(p-1))/(1-lambda) * mu/L^2, C5 = beta L^2/mu,
/// C6 = 2 K0 r0^p + 296 (mu/L^2) sigma^p beta^{p-1} / (1-lambda)^2.
TheoremConstants constants_heavy(double mu, double lip, double beta, double sigma, double p,
                                 double k0, double r0);

/// C7 = (2+4 delta)/(1-lambda) * mu/L^2, C8 = beta L^2/mu,
/// C9 = 2 K0 r0^2 + 156 (mu/L^2) sigma^2 beta / ((1-delta)(1-lambda)^2).
TheoremConstants constants_lrd(double mu, double lip, double beta, double sigma, double delta,
                               double k0, double r0);

struct BoundCurve {
  TheoremConstants constants;
  std::vector<long> checkpoints;
  std::vector<double> values;  // c_bound / (k + k0)^rate
};

/// Unchecked pointwise evaluation (exploratory use).
double bound_value(const TheoremConstants& c, long k);

/// Refuses (std::invalid_argument) to emit a guarantee curve from constants
/// whose validity flags are false.
BoundCurve bound_curve(const TheoremConstants& c, const std::vector<long>& checkpoints);

// -- auxiliary-lemma sweeps ----------------------------------------------------

/// Result of checking one inequality over k = 0..k_checked. max_ratio is the
/// largest lhs/rhs encountered (<= 1 when the lemma holds), at argmax_k.
struct LemmaReport {
  bool preconditions_ok = true;
  std::string precondition_note;
  double max_ratio = 0.0;
  long argmax_k = 0;
  long k_checked = 0;
  bool passed() const { return preconditions_ok && max_ratio <= 1.0 + 1e-12; }
};

/// prod_{i<k} (1 - a phi/(i+k0)) <= k0/(k+k0) for all k <= k_max, with the
/// product accumulated in log space (direct products underflow near k ~ 1e5).
/// Preconditions: a phi > 1 and a phi <= k0.
LemmaReport lemma_aux1_check(double a, double phi, double k0, long k_max);

/// s_k = sum_{i<k} eps_i prod_{j=i+1..k-1}(1 - a phi_j) <= (2/a)(eps_k/phi_k)
/// with eps_k = eps/(k+k0)^e, computed by the recursion
/// s_{k+1} = (1 - a phi_k) s_k + eps_k. Preconditions: e in (1,2],
/// a phi >= 2(e-1), a phi <= k0.
LemmaReport lemma_aux2_check(double a, double eps, double phi, double e, double k0,
                             long k_max);

// -- averaged-noise moment verification -----------------------------------------

/// Per-checkpoint Monte Carlo estimate of a U_k moment against its closed-form
/// bound. Passing requires empirical <= bound + 3 bootstrap standard errors at
/// every checkpoint (the bounds are exact expectations; only sampling noise is
/// forgiven).
struct UMomentReport {
  std::vector<long> checkpoints;
  std::vector<double> empirical;
  std::vector<double> bound;
  std::vector<double> ratio;
  std::vector<double> se;
  double slope = 0.0;  // log-log fit of the empirical moment, k >= horizon/100
  bool pass_bound = false;
  double max_ratio_adjusted = 0.0;  // max (empirical - 3se)/bound
};

/// E||U_k||^p <= 4 zeta sigma^p (beta/(k+K0))^{p-1}; U simulated directly from
/// the noise (it does not involve F), n_runs independent replicas.
UMomentReport verify_u_moment_heavy(const NoiseModel& model, double p,
                                    const StepSchedule& schedule, double mu, double lip,
                                    double sigma, int n_runs, long horizon,
                                    std::uint64_t seed, int threads = 1);

/// E||U_k||^2 <= (6 zeta^2 sigma^2/(1-delta)) k^{1-delta} beta_tilde_k.
UMomentReport verify_u_moment_lrd(const NoiseModel& model, double delta,
                                  const StepSchedule& schedule, double mu, double lip,
                                  double sigma, int n_runs, long horizon,
                                  std::uint64_t seed, int threads = 1);

}  // namespace salab
