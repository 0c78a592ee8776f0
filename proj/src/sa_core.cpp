#include "salab/sa_core.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>
#include <stdexcept>

namespace salab {

double stepsize(const StepSchedule& schedule, long k) {
  if (k < 0) throw std::invalid_argument("stepsize index must be >= 0");
  return schedule.at(k);
}

std::vector<long> checkpoint_grid(long horizon) {
  if (horizon < 1) throw std::invalid_argument("horizon must be >= 1");
  std::set<long> grid{0, horizon};
  for (double x = 1.0; x < static_cast<double>(horizon); x *= 1.15) {
    const long k = static_cast<long>(x);
    if (k < horizon) grid.insert(k);
  }
  return {grid.begin(), grid.end()};
}

Eigen::VectorXd averaged_noise_step(const Eigen::VectorXd& u, double beta_tilde,
                                    const Eigen::VectorXd& eta_tilde) {
  return (1.0 - beta_tilde) * u + beta_tilde * eta_tilde;
}

Eigen::VectorXd default_x0(const ProblemInstance& inst, double distance) {
  const int d = inst.dim();
  return inst.root() +
         (distance / std::sqrt(static_cast<double>(d))) * Eigen::VectorXd::Ones(d);
}

Trajectory run_sa(const ProblemInstance& inst, const NoiseModel& model,
                  const StepSchedule& schedule, long horizon, const Eigen::VectorXd& x0,
                  std::uint64_t run_seed, const SaOptions& options) {
  if (horizon < 1) throw std::invalid_argument("horizon must be >= 1");
  if (x0.size() != inst.root().size())
    throw std::invalid_argument("x0 dimension mismatch");
  const int d = inst.dim();
  const bool projected = options.projected && inst.has_projection();
  const bool diag = options.diagnostics;
  if (diag && projected)
    throw std::invalid_argument(
        "diagnostics track the unprojected rewrite; run them without projection");
  if (diag && schedule.k0 * inst.mu() < schedule.beta * inst.lip() * inst.lip())
    throw std::invalid_argument(
        "diagnostics need beta_tilde_k <= 1, i.e. k0 >= beta * L^2 / mu");
  const double zeta = inst.mu() / (inst.lip() * inst.lip());

  Trajectory traj;
  traj.checkpoints = options.checkpoints.empty() ? checkpoint_grid(horizon) : options.checkpoints;
  const std::size_t n_cp = traj.checkpoints.size();
  traj.errors.assign(n_cp, std::numeric_limits<double>::quiet_NaN());
  if (diag) {
    traj.u_norm.assign(n_cp, std::numeric_limits<double>::quiet_NaN());
    traj.z_err.assign(n_cp, std::numeric_limits<double>::quiet_NaN());
    traj.delta_norm.assign(n_cp, std::numeric_limits<double>::quiet_NaN());
    traj.recon_err.assign(n_cp, std::numeric_limits<double>::quiet_NaN());
    traj.x_norm.assign(n_cp, std::numeric_limits<double>::quiet_NaN());
  }

  NoiseStream stream(model, d, horizon, run_seed);
  Eigen::VectorXd x = x0;
  if (projected) inst.project(x);
  Eigen::VectorXd fx(d), eta(d), u, z, gx, gz, fz;
  if (diag) {
    u = Eigen::VectorXd::Zero(d);
    z = x;
    gx.resize(d);
    gz.resize(d);
    fz.resize(d);
  }

  std::size_t cp = 0;
  const auto record = [&](long k) {
    while (cp < n_cp && traj.checkpoints[cp] == k) {
      traj.errors[cp] = (x - inst.root()).norm();
      if (diag) {
        inst.apply(x, fx);
        gx = x - zeta * fx;
        inst.apply(z, fz);
        gz = z - zeta * fz;
        traj.u_norm[cp] = u.norm();
        traj.z_err[cp] = (z - inst.root()).norm();
        traj.delta_norm[cp] = (gx - gz).norm();
        traj.recon_err[cp] = (z + u - x).norm();
        traj.x_norm[cp] = x.norm();
      }
      ++cp;
    }
  };

  for (long k = 0; k < horizon; ++k) {
    record(k);
    stream.next(eta);
    inst.apply(x, fx);
    const double bk = schedule.at(k);
    if (diag) {
      const double bt = bk / zeta;
      gx = x - zeta * fx;
      z += bt * (gx - z);
      u = (1.0 - bt) * u + bt * (-zeta) * eta;
    }
    x -= bk * (fx + eta);
    if (!x.allFinite()) {
      traj.flagged = true;
      traj.flagged_at = k + 1;
      break;
    }
    if (projected) inst.project(x);
  }
  if (!traj.flagged) record(horizon);
  traj.final_iterate = x;
  return traj;
}

}  // namespace salab
