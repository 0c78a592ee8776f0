#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <variant>

namespace salab {

/// F(x) = M x. Strong-monotonicity modulus is the smallest eigenvalue of the
/// symmetric part, Lipschitz constant the largest singular value.
struct LinearProblem {
  Eigen::MatrixXd matrix;
};

/// Gradient of 0.5*||Ax-b||^2 + sum_i huber_delta(x_i). delta = 0 disables
/// the componentwise penalty (pure least squares).
struct HuberLsqProblem {
  Eigen::MatrixXd a;   // m x d
  Eigen::VectorXd b;   // m
  double delta = 1.0;
  // cached normal-equation pieces
  Eigen::MatrixXd ata;
  Eigen::VectorXd atb;
};

/// Throughput game: N links sharing D channels, each link's action is its
/// per-channel power, feasible set per link {x >= 0, sum_d x <= 1}.
struct PowerControlGame {
  int players = 0;
  int channels = 0;
  Eigen::MatrixXd direct_gains;               // N x D, g_{n,n}^{(d)}
  std::vector<Eigen::MatrixXd> cross_gains;   // per channel: N x N, (m,n) = g_{m,n}^{(d)}, diag zero
  double noise_floor = 1.0;
};

using ProblemFamily = std::variant<LinearProblem, HuberLsqProblem, PowerControlGame>;

/// A strongly monotone root-finding instance: the operator F, its constants
/// (mu, lip), the solved root, and the feasible-set projection (identity
/// for unconstrained families). Immutable after construction and safe to
/// share across threads.
class ProblemInstance {
 public:
  ProblemInstance(ProblemFamily family, double mu, double lip, Eigen::VectorXd root);

  int dim() const { return static_cast<int>(root_.size()); }
  double mu() const { return mu_; }
  double lip() const { return lip_; }
  const Eigen::VectorXd& root() const { return root_; }
  const ProblemFamily& family() const { return family_; }

  /// out = F(x). For the game this is -H(x), the strongly monotone operator.
  void apply(const Eigen::VectorXd& x, Eigen::VectorXd& out) const;
  Eigen::VectorXd apply(const Eigen::VectorXd& x) const;

  bool has_projection() const;
  void project(Eigen::VectorXd& x) const;

 private:
  ProblemFamily family_;
  double mu_;
  double lip_;
  Eigen::VectorXd root_;
};

/// gradient of the Huber-regularized least-squares objective at x.
Eigen::VectorXd huber_gradient(const HuberLsqProblem& p, const Eigen::VectorXd& x);

/// Stacked own-action utility gradients H(x); component (n,d) is
/// (1/ln 2) * g_{n,n}^{(d)} / (N0 + I_n^{(d)}(x) + g_{n,n}^{(d)} x^{(n,d)}).
/// Throws std::domain_error if a SINR denominator is nonpositive.
Eigen::VectorXd game_pseudogradient(const PowerControlGame& g, const Eigen::VectorXd& x);

/// Euclidean projection onto {y >= 0, sum_i y_i <= cap}: clip negatives,
/// then sorted-threshold simplex projection if the cap is exceeded.
Eigen::VectorXd project_box_capped_simplex(const Eigen::VectorXd& x, double cap);

struct MuLipEstimate {
  double mu_hat;
  double lip_hat;
};

/// Sampled strong-monotonicity / Lipschitz ratios over n_pairs random pairs,
/// drawn in the feasible set (game) or a ball of the given radius around the
/// root. Throws std::runtime_error if mu_hat <= 0.
MuLipEstimate estimate_mu_lip(const ProblemFamily& family, const Eigen::VectorXd& center,
                              long n_pairs, double radius, std::uint64_t seed);
MuLipEstimate estimate_mu_lip(const ProblemInstance& inst, long n_pairs, double radius,
                              std::uint64_t seed);

/// Noiseless projected fixed-step iteration x <- P(x - zeta F(x)) with
/// zeta = mu/L^2; returns x with ||x - P(x - zeta F(x))|| <= tol. The start
/// defaults to the feasible-set center (game) or the origin.
Eigen::VectorXd solve_root(const ProblemFamily& family, double mu, double lip,
                           double tol = 1e-10, long max_iters = 10'000'000,
                           const Eigen::VectorXd* x_start = nullptr);
Eigen::VectorXd solve_root(const ProblemInstance& inst, double tol = 1e-10,
                           long max_iters = 10'000'000,
                           const Eigen::VectorXd* x_start = nullptr);

// -- instance factories ------------------------------------------------------

ProblemInstance make_linear_instance(const Eigen::MatrixXd& matrix);
ProblemInstance make_identity_instance(int dim);

/// A = G/sqrt(m) with G iid standard normal, b iid standard normal.
ProblemInstance make_huber_instance(int m, int d, double delta, std::uint64_t matrix_seed);

struct GameRanges {
  double direct_min = 0.8;
  double direct_max = 1.2;
  double cross_min = 0.01;
  double cross_max = 0.05;
};

/// Gains drawn uniformly from the given ranges; mu/lip estimated from 1e5
/// sampled pairs (with a small safety margin), then the equilibrium solved.
ProblemInstance make_power_control_instance(int players, int channels, GameRanges ranges,
                                            double noise_floor, std::uint64_t game_seed);

// -- serialization -----------------------------------------------------------

/// Section/key-value text format; matrices row-major, floats in shortest
/// round-trip form, root included.
void save_instance(const ProblemInstance& inst, const std::string& path);
ProblemInstance load_instance(const std::string& path);

}  // namespace salab
