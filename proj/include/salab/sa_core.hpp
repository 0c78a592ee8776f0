#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <vector>

#include "salab/noise.hpp"
#include "salab/operators.hpp"

namespace salab {

/// beta_k = beta / (k + k0).
struct StepSchedule {
  double beta = 1.0;
  double k0 = 1.0;

  double at(long k) const { return beta / (static_cast<double>(k) + k0); }

  /// beta_k <= min(1/mu, mu/L^2) for all k, i.e. k0 >= beta * max(mu, L^2/mu).
  bool valid_for(double mu, double lip) const {
    return k0 >= beta * std::max(mu, lip * lip / mu);
  }
};

double stepsize(const StepSchedule& schedule, long k);

/// {0} U {floor(1.15^j)} U {horizon}, deduplicated and ascending; geometric
/// spacing keeps log-log rate fits tractable without per-step storage.
std::vector<long> checkpoint_grid(long horizon);

struct SaOptions {
  bool projected = false;
  bool diagnostics = false;
  std::vector<long> checkpoints;  // empty: default grid
};

struct Trajectory {
  std::vector<long> checkpoints;
  std::vector<double> errors;  // ||x_k - x*|| per checkpoint
  // diagnostics (empty unless requested): ||U_k||, ||z_k - x*||, ||Delta_k||,
  // the reconstruction residual ||(z_k + U_k) - x_k||, and ||x_k||
  std::vector<double> u_norm;
  std::vector<double> z_err;
  std::vector<double> delta_norm;
  std::vector<double> recon_err;
  std::vector<double> x_norm;
  Eigen::VectorXd final_iterate;
  bool flagged = false;   // run hit a non-finite iterate and was terminated
  long flagged_at = -1;   // first non-finite iteration index
};

/// One step of the averaged-noise recursion:
/// U_{k+1} = (1 - beta_tilde) U_k + beta_tilde * eta_tilde.
Eigen::VectorXd averaged_noise_step(const Eigen::VectorXd& u, double beta_tilde,
                                    const Eigen::VectorXd& eta_tilde);

/// root + distance * ones/sqrt(d): deterministic start at a fixed distance
/// from the root.
Eigen::VectorXd default_x0(const ProblemInstance& inst, double distance = 1.0);

/// Runs x_{k+1} = x_k - beta_k (F(x_k) + eta_k) for `horizon` steps,
/// projecting after each update when requested, recording ||x_k - x*|| at the
/// checkpoints. With diagnostics on, co-evolves U_k (eta_tilde = -zeta eta,
/// beta_tilde = beta_k/zeta) and the auxiliary iterate z_k via its own
/// recursion z_{k+1} = z_k + beta_tilde (G(x_k) - z_k), recording ||U_k||,
/// ||z_k - x*||, ||Delta_k|| = ||G(x_k) - G(z_k)|| and the x = z + U
/// reconstruction residual. Non-finite iterates terminate the run and set
/// the flag; remaining checkpoints are filled with NaN, never dropped.
Trajectory run_sa(const ProblemInstance& inst, const NoiseModel& model,
                  const StepSchedule& schedule, long horizon, const Eigen::VectorXd& x0,
                  std::uint64_t run_seed, const SaOptions& options = {});

}  // namespace salab
