#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "salab/operators.hpp"
#include "salab/rng.hpp"
#include "test_util.hpp"

using namespace salab;

namespace {

double huber_value(double t, double delta) {
  return std::abs(t) <= delta ? 0.5 * t * t : delta * (std::abs(t) - 0.5 * delta);
}

double huber_objective(const HuberLsqProblem& p, const Eigen::VectorXd& x) {
  double v = 0.5 * (p.a * x - p.b).squaredNorm();
  for (Eigen::Index i = 0; i < x.size(); ++i) v += huber_value(x[i], p.delta);
  return v;
}

HuberLsqProblem random_huber(int m, int d, double delta, Rng& rng) {
  HuberLsqProblem p;
  p.a.resize(m, d);
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < d; ++j) p.a(i, j) = rng.normal();
  p.b.resize(m);
  for (int i = 0; i < m; ++i) p.b[i] = rng.normal();
  p.delta = delta;
  p.ata = p.a.transpose() * p.a;
  p.atb = p.a.transpose() * p.b;
  return p;
}

PowerControlGame random_game(int players, int channels, Rng& rng) {
  PowerControlGame g;
  g.players = players;
  g.channels = channels;
  g.noise_floor = 1.0;
  g.direct_gains.resize(players, channels);
  for (int n = 0; n < players; ++n)
    for (int d = 0; d < channels; ++d) g.direct_gains(n, d) = 0.8 + 0.4 * rng.uniform01();
  g.cross_gains.assign(channels, Eigen::MatrixXd::Zero(players, players));
  for (int d = 0; d < channels; ++d)
    for (int m = 0; m < players; ++m)
      for (int n = 0; n < players; ++n)
        if (m != n) g.cross_gains[d](m, n) = 0.01 + 0.04 * rng.uniform01();
  return g;
}

double game_utility(const PowerControlGame& g, int player, const Eigen::VectorXd& x) {
  double u = 0.0;
  for (int d = 0; d < g.channels; ++d) {
    double interference = 0.0;
    for (int m = 0; m < g.players; ++m)
      if (m != player) interference += g.cross_gains[d](m, player) * x[m * g.channels + d];
    const double sinr =
        g.direct_gains(player, d) * x[player * g.channels + d] / (g.noise_floor + interference);
    u += std::log2(1.0 + sinr);
  }
  return u;
}

Eigen::VectorXd random_feasible(const PowerControlGame& g, Rng& rng) {
  Eigen::VectorXd x(g.players * g.channels);
  for (int n = 0; n < g.players; ++n) {
    double total = 0.0;
    for (int d = 0; d < g.channels; ++d) {
      x[n * g.channels + d] = rng.uniform01();
      total += x[n * g.channels + d];
    }
    const double scale = rng.uniform01() / std::max(total, 1e-12);
    for (int d = 0; d < g.channels; ++d) x[n * g.channels + d] *= scale;
  }
  return x;
}

}  // namespace

TEST_CASE("huber gradient closed-form points") {
  HuberLsqProblem p;
  p.a = Eigen::MatrixXd::Identity(2, 2);
  p.b = Eigen::VectorXd::Zero(2);
  p.delta = 1.0;
  p.ata = p.a.transpose() * p.a;
  p.atb = p.a.transpose() * p.b;

  Eigen::VectorXd zero = huber_gradient(p, Eigen::VectorXd::Zero(2));
  CHECK(zero.norm() == doctest::Approx(0.0));

  Eigen::VectorXd x(2);
  x << 0.5, 0.5;
  Eigen::VectorXd g = huber_gradient(p, x);
  CHECK(g[0] == doctest::Approx(1.0));
  CHECK(g[1] == doctest::Approx(1.0));

  CHECK_THROWS_AS(huber_gradient(p, Eigen::VectorXd::Zero(3)), std::invalid_argument);
}

TEST_CASE("huber gradient matches finite differences") {
  Rng rng(7);
  HuberLsqProblem p = random_huber(8, 5, 1.0, rng);
  for (int trial = 0; trial < 100; ++trial) {
    Eigen::VectorXd x(5);
    for (int i = 0; i < 5; ++i) x[i] = 3.0 * rng.normal();
    Eigen::VectorXd fd =
        oracle::fd_gradient([&](const Eigen::VectorXd& y) { return huber_objective(p, y); }, x);
    Eigen::VectorXd g = huber_gradient(p, x);
    CHECK((g - fd).norm() <= 1e-5 * std::max(1.0, g.norm()));
  }
  Eigen::VectorXd x(5);
  x << 0.3, -1.7, 0.9, 2.4, -0.2;
  Eigen::VectorXd fd =
      oracle::fd_gradient([&](const Eigen::VectorXd& y) { return huber_objective(p, y); }, x);
  CHECK((huber_gradient(p, x) - fd).norm() <= 1e-6 * huber_gradient(p, x).norm());
}

TEST_CASE("game pseudogradient single-player derivative") {
  PowerControlGame g;
  g.players = 1;
  g.channels = 1;
  g.noise_floor = 1.0;
  g.direct_gains = Eigen::MatrixXd::Constant(1, 1, 1.0);
  g.cross_gains.assign(1, Eigen::MatrixXd::Zero(1, 1));
  Eigen::VectorXd x = Eigen::VectorXd::Zero(1);
  Eigen::VectorXd h = game_pseudogradient(g, x);
  // d/dx log2(1+x) at 0 = 1/ln 2
  CHECK(h[0] == doctest::Approx(1.4426950408889634).epsilon(1e-12));
}

TEST_CASE("game pseudogradient positive and matches finite differences") {
  Rng rng(11);
  PowerControlGame g = random_game(4, 3, rng);
  for (int trial = 0; trial < 100; ++trial) {
    Eigen::VectorXd x = random_feasible(g, rng);
    Eigen::VectorXd h = game_pseudogradient(g, x);
    CHECK(h.minCoeff() > 0.0);
    for (int n = 0; n < g.players; ++n) {
      Eigen::VectorXd own = oracle::fd_gradient(
          [&](const Eigen::VectorXd& overall) { return game_utility(g, n, overall); }, x);
      for (int d = 0; d < g.channels; ++d) {
        const int idx = n * g.channels + d;
        CHECK(h[idx] == doctest::Approx(own[idx]).epsilon(1e-5));
      }
    }
  }
}

TEST_CASE("projection onto the capped simplex") {
  Eigen::VectorXd a(2);
  a << 0.2, 0.3;
  CHECK((project_box_capped_simplex(a, 1.0) - a).norm() == doctest::Approx(0.0));

  Eigen::VectorXd b(2);
  b << 0.5, 0.8;
  Eigen::VectorXd pb = project_box_capped_simplex(b, 1.0);
  CHECK(pb[0] == doctest::Approx(0.35));
  CHECK(pb[1] == doctest::Approx(0.65));

  Eigen::VectorXd c(2);
  c << -0.2, 0.3;
  Eigen::VectorXd pc = project_box_capped_simplex(c, 1.0);
  CHECK(pc[0] == doctest::Approx(0.0));
  CHECK(pc[1] == doctest::Approx(0.3));
}

TEST_CASE("projection agrees with the exhaustive QP oracle") {
  Rng rng(13);
  for (int trial = 0; trial < 200; ++trial) {
    const int d = 1 + static_cast<int>(rng.next_u64() % 6);
    Eigen::VectorXd x(d);
    for (int i = 0; i < d; ++i) x[i] = 2.0 * rng.normal();
    const double cap = 0.25 + 2.0 * rng.uniform01();
    Eigen::VectorXd got = project_box_capped_simplex(x, cap);
    Eigen::VectorXd want = oracle::qp_project_capped_simplex(x, cap);
    CHECK((got - want).norm() <= 1e-9);
  }
}

TEST_CASE("projection is idempotent and non-expansive") {
  Rng rng(17);
  for (int trial = 0; trial < 200; ++trial) {
    Eigen::VectorXd x(5), y(5);
    for (int i = 0; i < 5; ++i) {
      x[i] = 3.0 * rng.normal();
      y[i] = 3.0 * rng.normal();
    }
    Eigen::VectorXd px = project_box_capped_simplex(x, 1.0);
    Eigen::VectorXd py = project_box_capped_simplex(y, 1.0);
    CHECK((project_box_capped_simplex(px, 1.0) - px).norm() <= 1e-12);
    CHECK((px - py).norm() <= (x - y).norm() + 1e-12);
  }
}

TEST_CASE("solve_root on the identity") {
  ProblemFamily f = LinearProblem{Eigen::MatrixXd::Identity(3, 3)};
  Eigen::VectorXd root = solve_root(f, 1.0, 1.0, 1e-12);
  CHECK(root.norm() <= 1e-12);
}

TEST_CASE("solve_root with the huber term disabled matches least squares") {
  Rng rng(19);
  HuberLsqProblem p = random_huber(12, 5, 0.0, rng);  // delta = 0: pure least squares
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(p.ata);
  const double mu = es.eigenvalues().minCoeff();
  const double lip = es.eigenvalues().maxCoeff();
  REQUIRE(mu > 0.0);
  Eigen::VectorXd got = solve_root(p, mu, lip, 1e-12);
  Eigen::VectorXd want = p.ata.ldlt().solve(p.atb);  // normal equations oracle
  CHECK((got - want).norm() <= 1e-8);
}

TEST_CASE("solve_root of the game is a fixed point and start-invariant") {
  ProblemInstance inst = make_power_control_instance(3, 2, GameRanges{}, 1.0, 99);
  const double tol = 1e-10;
  // re-running from the solved root terminates within one step
  Eigen::VectorXd again = solve_root(inst, tol, 10'000'000, &inst.root());
  CHECK((again - inst.root()).norm() <= tol);

  // a residual of tol pins the output to within tol/(1-lambda) of the fixed
  // point, so outputs from different starts agree to twice that
  const double ratio = inst.mu() / inst.lip();
  const double lambda = std::sqrt(1.0 - ratio * ratio);
  const double agreement = 2.0 * tol / (1.0 - lambda);
  Rng rng(23);
  const auto& game = std::get<PowerControlGame>(inst.family());
  for (int s = 0; s < 10; ++s) {
    Eigen::VectorXd start(inst.dim());
    for (int i = 0; i < inst.dim(); ++i) start[i] = rng.uniform01() / game.channels;
    Eigen::VectorXd root = solve_root(inst, tol, 10'000'000, &start);
    CHECK((root - inst.root()).norm() <= agreement);
  }
}

TEST_CASE("estimate_mu_lip brackets the spectrum of a diagonal operator") {
  Eigen::MatrixXd m(2, 2);
  m << 1.0, 0.0, 0.0, 2.0;
  ProblemFamily f = LinearProblem{m};
  const Eigen::VectorXd center = Eigen::VectorXd::Zero(2);
  MuLipEstimate small = estimate_mu_lip(f, center, 100, 1.0, 5);
  MuLipEstimate large = estimate_mu_lip(f, center, 20000, 1.0, 5);
  CHECK(small.mu_hat >= 1.0 - 1e-12);
  CHECK(small.lip_hat <= 2.0 + 1e-12);
  CHECK(large.mu_hat >= 1.0 - 1e-12);
  CHECK(large.lip_hat <= 2.0 + 1e-12);
  // more pairs tighten the bracket toward the true eigenvalues
  CHECK(large.mu_hat <= small.mu_hat + 1e-12);
  CHECK(large.lip_hat >= small.lip_hat - 1e-12);
  CHECK(large.mu_hat == doctest::Approx(1.0).epsilon(0.02));
  CHECK(large.lip_hat == doctest::Approx(2.0).epsilon(0.02));
}

TEST_CASE("estimate_mu_lip on the identity is exact") {
  ProblemFamily f = LinearProblem{Eigen::MatrixXd::Identity(3, 3)};
  MuLipEstimate est = estimate_mu_lip(f, Eigen::VectorXd::Zero(3), 100, 1.0, 7);
  CHECK(est.mu_hat == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(est.lip_hat == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("estimate_mu_lip rejects a non-monotone operator") {
  ProblemFamily f = LinearProblem{-Eigen::MatrixXd::Identity(2, 2)};
  CHECK_THROWS_AS(estimate_mu_lip(f, Eigen::VectorXd::Zero(2), 100, 1.0, 9),
                  std::runtime_error);
}

TEST_CASE("shipped instances satisfy the declared mu and lip") {
  ProblemInstance huber = make_huber_instance(20, 8, 1.0, 3);
  MuLipEstimate h = estimate_mu_lip(huber, 2000, 1.0, 31);
  CHECK(h.mu_hat >= huber.mu() * (1.0 - 1e-9));
  CHECK(h.lip_hat <= huber.lip() * (1.0 + 1e-9));

  ProblemInstance game = make_power_control_instance(4, 2, GameRanges{}, 1.0, 5);
  MuLipEstimate g = estimate_mu_lip(game, 2000, 1.0, 37);
  CHECK(g.mu_hat >= game.mu() * (1.0 - 1e-9));
  CHECK(g.lip_hat <= game.lip() * (1.0 + 1e-9));
}

TEST_CASE("game root stays inside the feasible set") {
  ProblemInstance game = make_power_control_instance(5, 3, GameRanges{}, 1.0, 12);
  const auto& fam = std::get<PowerControlGame>(game.family());
  for (int n = 0; n < fam.players; ++n) {
    const auto slice = game.root().segment(n * fam.channels, fam.channels);
    CHECK(slice.minCoeff() >= -1e-12);
    CHECK(slice.sum() <= 1.0 + 1e-9);
  }
}

TEST_CASE("instance files round-trip exactly") {
  const char* path = "instance_roundtrip.txt";

  ProblemInstance huber = make_huber_instance(10, 4, 1.5, 21);
  save_instance(huber, path);
  ProblemInstance loaded = load_instance(path);
  CHECK(loaded.mu() == huber.mu());
  CHECK(loaded.lip() == huber.lip());
  CHECK((loaded.root() - huber.root()).norm() == 0.0);
  const auto& hp = std::get<HuberLsqProblem>(huber.family());
  const auto& lp = std::get<HuberLsqProblem>(loaded.family());
  CHECK(lp.a == hp.a);
  CHECK(lp.b == hp.b);
  CHECK(lp.delta == hp.delta);

  ProblemInstance game = make_power_control_instance(3, 2, GameRanges{}, 1.0, 22);
  save_instance(game, path);
  ProblemInstance game2 = load_instance(path);
  CHECK((game2.root() - game.root()).norm() == 0.0);
  const auto& ga = std::get<PowerControlGame>(game.family());
  const auto& gb = std::get<PowerControlGame>(game2.family());
  CHECK(gb.direct_gains == ga.direct_gains);
  for (int d = 0; d < ga.channels; ++d) CHECK(gb.cross_gains[d] == ga.cross_gains[d]);

  // identical operator behavior after the round trip
  Eigen::VectorXd x = Eigen::VectorXd::Constant(game.dim(), 0.1);
  CHECK((game2.apply(x) - game.apply(x)).norm() == 0.0);

  CHECK_THROWS_AS(load_instance("definitely_missing_instance.txt"), std::runtime_error);
}

TEST_CASE("corrupted inputs with nonpositive SINR denominators are rejected") {
  Rng rng(61);
  PowerControlGame g = random_game(3, 2, rng);
  Eigen::VectorXd bad = Eigen::VectorXd::Constant(6, -10.0);
  CHECK_THROWS_AS(game_pseudogradient(g, bad), std::domain_error);
}
