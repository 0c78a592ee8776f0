#include "salab/theory.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

#include "salab/util.hpp"

namespace salab {

namespace {

// least-squares slope of log(value) on log(k + offset)
double loglog_slope(const std::vector<long>& ks, const std::vector<double>& values,
                    double k_min, double offset) {
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  long n = 0;
  for (std::size_t i = 0; i < ks.size(); ++i) {
    if (static_cast<double>(ks[i]) < k_min || !(values[i] > 0.0)) continue;
    const double x = std::log(static_cast<double>(ks[i]) + offset);
    const double y = std::log(values[i]);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
    ++n;
  }
  if (n < 8) return std::numeric_limits<double>::quiet_NaN();
  const double dn = static_cast<double>(n);
  return (dn * sxy - sx * sy) / (dn * sxx - sx * sx);
}

}  // namespace

ContractionParams contraction_params(double mu, double lip) {
  if (!(mu > 0.0)) throw std::invalid_argument("mu must be positive");
  if (mu > lip)
    throw std::invalid_argument("mu > lip is impossible for a monotone Lipschitz operator");
  const double ratio = mu / lip;
  const double lambda = std::sqrt(std::max(0.0, 1.0 - ratio * ratio));
  return {mu / (lip * lip), lambda, 1.0 - lambda};
}

TheoremConstants constants_standard(double mu, double lip, double beta, double sigma,
                                    double k0, double r0) {
  contraction_params(mu, lip);  // validates mu, lip
  TheoremConstants c;
  c.theorem = Theorem::Standard;
  c.c_stepsize = 2.0 / mu;
  c.c_offset = beta * lip * lip / mu + beta * mu;
  c.c_bound = k0 * r0 * r0 + 2.0 * beta * sigma * sigma / mu;
  c.rate = 1.0;
  c.beta = beta;
  c.k0 = k0;
  c.beta_valid = beta >= c.c_stepsize;
  c.k0_valid = k0 >= c.c_offset;
  return c;
}

TheoremConstants constants_heavy(double mu, double lip, double beta, double sigma, double p,
                                 double k0, double r0) {
  if (!(p > 1.0 && p < 2.0)) throw std::invalid_argument("heavy-tail order p must lie in (1,2)");
  const ContractionParams cp = contraction_params(mu, lip);
  TheoremConstants c;
  c.theorem = Theorem::Heavy;
  c.c_stepsize = (2.0 + 4.0 * (p - 1.0)) / cp.lambda_prime * cp.zeta;
  c.c_offset = beta * lip * lip / mu;
  c.c_bound = 2.0 * k0 * std::pow(r0, p) +
              296.0 * cp.zeta * std::pow(sigma, p) * std::pow(beta, p - 1.0) /
                  (cp.lambda_prime * cp.lambda_prime);
  c.rate = p - 1.0;
  c.beta = beta;
  c.k0 = k0;
  c.beta_valid = beta >= c.c_stepsize;
  c.k0_valid = k0 >= c.c_offset;
  return c;
}

TheoremConstants constants_lrd(double mu, double lip, double beta, double sigma, double delta,
                               double k0, double r0) {
  if (!(delta > 0.0 && delta < 1.0)) throw std::invalid_argument("delta must lie in (0,1)");
  const ContractionParams cp = contraction_params(mu, lip);
  TheoremConstants c;
  c.theorem = Theorem::Lrd;
  c.c_stepsize = (2.0 + 4.0 * delta) / cp.lambda_prime * cp.zeta;
  c.c_offset = beta * lip * lip / mu;
  c.c_bound = 2.0 * k0 * r0 * r0 +
              156.0 * cp.zeta * sigma * sigma * beta /
                  ((1.0 - delta) * cp.lambda_prime * cp.lambda_prime);
  c.rate = delta;
  c.beta = beta;
  c.k0 = k0;
  c.beta_valid = beta >= c.c_stepsize;
  c.k0_valid = k0 >= c.c_offset;
  return c;
}

double bound_value(const TheoremConstants& c, long k) {
  return c.c_bound / std::pow(static_cast<double>(k) + c.k0, c.rate);
}

BoundCurve bound_curve(const TheoremConstants& c, const std::vector<long>& checkpoints) {
  if (!c.valid())
    throw std::invalid_argument(
        "constants fail the theorem's validity thresholds (beta >= " +
        format_double(c.c_stepsize) + ", k0 >= " + format_double(c.c_offset) +
        "); refusing to emit a guarantee curve");
  BoundCurve curve;
  curve.constants = c;
  curve.checkpoints = checkpoints;
  curve.values.reserve(checkpoints.size());
  for (long k : checkpoints) curve.values.push_back(bound_value(c, k));
  return curve;
}

LemmaReport lemma_aux1_check(double a, double phi, double k0, long k_max) {
  LemmaReport report;
  report.k_checked = k_max;
  if (!(a > 0.0) || !(phi * a > 1.0)) {
    report.preconditions_ok = false;
    report.precondition_note = "needs a > 0 and a*phi > 1";
    return report;
  }
  if (a * phi > k0) {
    report.preconditions_ok = false;
    report.precondition_note = "needs a*phi_k <= 1, i.e. k0 >= a*phi";
    return report;
  }
  double log_prod = 0.0;  // log prod_{i<k}(1 - a phi_i); k = 0 gives the empty product
  for (long k = 0; k <= k_max; ++k) {
    const double rhs = k0 / (static_cast<double>(k) + k0);
    const double ratio = std::exp(log_prod - std::log(rhs));
    if (ratio > report.max_ratio) {
      report.max_ratio = ratio;
      report.argmax_k = k;
    }
    log_prod += std::log1p(-a * phi / (static_cast<double>(k) + k0));
  }
  return report;
}

LemmaReport lemma_aux2_check(double a, double eps, double phi, double e, double k0,
                             long k_max) {
  LemmaReport report;
  report.k_checked = k_max;
  if (!(a > 0.0) || !(eps > 0.0) || !(e > 1.0 && e <= 2.0)) {
    report.preconditions_ok = false;
    report.precondition_note = "needs a > 0, eps > 0, e in (1,2]";
    return report;
  }
  if (phi * a < 2.0 * (e - 1.0)) {
    report.preconditions_ok = false;
    report.precondition_note = "needs a*phi >= 2(e-1)";
    return report;
  }
  if (a * phi > k0) {
    report.preconditions_ok = false;
    report.precondition_note = "needs a*phi_k <= 1, i.e. k0 >= a*phi";
    return report;
  }
  double s = 0.0;
  for (long k = 0; k <= k_max; ++k) {
    const double kk = static_cast<double>(k) + k0;
    const double eps_k = eps / std::pow(kk, e);
    const double phi_k = phi / kk;
    const double rhs = (2.0 / a) * eps_k / phi_k;
    const double ratio = s / rhs;
    if (ratio > report.max_ratio) {
      report.max_ratio = ratio;
      report.argmax_k = k;
    }
    s = (1.0 - a * phi_k) * s + eps_k;
  }
  return report;
}

namespace {

UMomentReport run_u_moment(const NoiseModel& model, const StepSchedule& schedule, double mu,
                           double lip, double moment_order,
                           const std::function<double(long)>& bound_at, int n_runs,
                           long horizon, std::uint64_t seed, int threads) {
  validate(model);
  const ContractionParams cp = contraction_params(mu, lip);
  const double beta_tilde = schedule.beta / cp.zeta;
  if (schedule.k0 < beta_tilde)
    throw std::invalid_argument(
        "u-moment verification requires beta_tilde_k <= 1 (k0 >= beta/zeta)");
  if (n_runs < 1) throw std::invalid_argument("n_runs must be >= 1");

  UMomentReport report;
  report.checkpoints = checkpoint_grid(horizon);
  const std::size_t n_cp = report.checkpoints.size();
  std::vector<std::vector<double>> rows(n_runs);
  parallel_for_index(n_runs, threads, [&](long run) {
    NoiseStream stream(model, 1, horizon, hash_combine(seed, run));
    Eigen::VectorXd eta(1);
    double u = 0.0;
    std::vector<double> row(n_cp);
    std::size_t cp_i = 0;
    for (long k = 0; k <= horizon; ++k) {
      if (cp_i < n_cp && report.checkpoints[cp_i] == k) {
        row[cp_i] = std::pow(std::abs(u), moment_order);
        ++cp_i;
      }
      if (k == horizon) break;
      stream.next(eta);
      const double bt = schedule.at(k) / cp.zeta;
      u = (1.0 - bt) * u + bt * (-cp.zeta) * eta[0];
    }
    rows[run] = std::move(row);
  });

  report.empirical.assign(n_cp, 0.0);
  for (const auto& row : rows)
    for (std::size_t i = 0; i < n_cp; ++i) report.empirical[i] += row[i];
  for (auto& v : report.empirical) v /= static_cast<double>(n_runs);
  report.se = bootstrap_se_of_mean(rows, 200, hash_combine(seed, 0xB007ULL));

  report.bound.resize(n_cp);
  report.ratio.resize(n_cp);
  report.pass_bound = true;
  report.max_ratio_adjusted = 0.0;
  for (std::size_t i = 0; i < n_cp; ++i) {
    report.bound[i] = bound_at(report.checkpoints[i]);
    if (report.bound[i] == 0.0) {
      report.ratio[i] = report.empirical[i] == 0.0
                            ? 0.0
                            : std::numeric_limits<double>::infinity();
    } else {
      report.ratio[i] = report.empirical[i] / report.bound[i];
    }
    const double slack = report.empirical[i] - 3.0 * report.se[i];
    const double adjusted = report.bound[i] > 0.0
                                ? slack / report.bound[i]
                                : (report.empirical[i] == 0.0 ? 0.0 : 1e300);
    report.max_ratio_adjusted = std::max(report.max_ratio_adjusted, adjusted);
    if (report.empirical[i] > report.bound[i] + 3.0 * report.se[i]) report.pass_bound = false;
  }
  report.slope = loglog_slope(report.checkpoints, report.empirical,
                              static_cast<double>(horizon) / 100.0, schedule.k0);
  return report;
}

}  // namespace

UMomentReport verify_u_moment_heavy(const NoiseModel& model, double p,
                                    const StepSchedule& schedule, double mu, double lip,
                                    double sigma, int n_runs, long horizon,
                                    std::uint64_t seed, int threads) {
  if (!(p > 1.0 && p < 2.0)) throw std::invalid_argument("p must lie in (1,2)");
  if (moment_ceiling(model) < p)
    throw std::invalid_argument("noise model lacks a finite p-th moment");
  const ContractionParams cp = contraction_params(mu, lip);
  const auto bound_at = [=](long k) {
    return 4.0 * cp.zeta * std::pow(sigma, p) *
           std::pow(schedule.beta / (static_cast<double>(k) + schedule.k0), p - 1.0);
  };
  return run_u_moment(model, schedule, mu, lip, p, bound_at, n_runs, horizon, seed, threads);
}

UMomentReport verify_u_moment_lrd(const NoiseModel& model, double delta,
                                  const StepSchedule& schedule, double mu, double lip,
                                  double sigma, int n_runs, long horizon,
                                  std::uint64_t seed, int threads) {
  if (!(delta > 0.0 && delta < 1.0)) throw std::invalid_argument("delta must lie in (0,1)");
  if (!is_long_range(model))
    throw std::invalid_argument("LRD verification needs an fGn or FARIMA model");
  const ContractionParams cp = contraction_params(mu, lip);
  const auto bound_at = [=](long k) {
    const double bt = (schedule.beta / cp.zeta) / (static_cast<double>(k) + schedule.k0);
    return 6.0 * cp.zeta * cp.zeta * sigma * sigma / (1.0 - delta) *
           std::pow(static_cast<double>(k), 1.0 - delta) * bt;
  };
  return run_u_moment(model, schedule, mu, lip, 2.0, bound_at, n_runs, horizon, seed, threads);
}

}  // namespace salab
