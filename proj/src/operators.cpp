#include "salab/operators.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <sstream>
#include <stdexcept>

#include "salab/rng.hpp"
#include "salab/util.hpp"

namespace salab {

namespace {

constexpr double kInvLn2 = 1.4426950408889634;

int family_dim(const ProblemFamily& family) {
  return std::visit(
      [](const auto& f) -> int {
        using T = std::decay_t<decltype(f)>;
        if constexpr (std::is_same_v<T, LinearProblem>)
          return static_cast<int>(f.matrix.rows());
        else if constexpr (std::is_same_v<T, HuberLsqProblem>)
          return static_cast<int>(f.a.cols());
        else
          return f.players * f.channels;
      },
      family);
}

void huber_gradient_inplace(const HuberLsqProblem& f, const Eigen::VectorXd& x,
                            Eigen::VectorXd& out) {
  out.noalias() = f.ata * x - f.atb;
  if (f.delta > 0.0) {
    for (Eigen::Index i = 0; i < x.size(); ++i) {
      const double t = x[i];
      out[i] += std::abs(t) <= f.delta ? t : std::copysign(f.delta, t);
    }
  }
}

void apply_family(const ProblemFamily& family, const Eigen::VectorXd& x,
                  Eigen::VectorXd& out) {
  std::visit(
      [&](const auto& f) {
        using T = std::decay_t<decltype(f)>;
        if constexpr (std::is_same_v<T, LinearProblem>) {
          out.noalias() = f.matrix * x;
        } else if constexpr (std::is_same_v<T, HuberLsqProblem>) {
          huber_gradient_inplace(f, x, out);
        } else {
          out = -game_pseudogradient(f, x);
        }
      },
      family);
}

bool family_has_projection(const ProblemFamily& family) {
  return std::holds_alternative<PowerControlGame>(family);
}

void project_family(const ProblemFamily& family, Eigen::VectorXd& x) {
  if (const auto* game = std::get_if<PowerControlGame>(&family)) {
    const int d = game->channels;
    for (int n = 0; n < game->players; ++n)
      x.segment(n * d, d) = project_box_capped_simplex(x.segment(n * d, d), 1.0);
  }
}

// Uniform in {y >= 0, sum y <= cap}: Dirichlet(1,..,1) direction scaled by
// U^(1/D) so the interior is covered uniformly.
void sample_capped_simplex(Eigen::Ref<Eigen::VectorXd> out, double cap, Rng& rng) {
  double total = 0.0;
  for (Eigen::Index i = 0; i < out.size(); ++i) {
    out[i] = rng.exponential();
    total += out[i];
  }
  const double radius =
      cap * std::pow(rng.uniform_pos(), 1.0 / static_cast<double>(out.size()));
  out *= radius / total;
}

Eigen::VectorXd sample_point(const ProblemFamily& family, const Eigen::VectorXd& center,
                             double radius, Rng& rng) {
  if (const auto* game = std::get_if<PowerControlGame>(&family)) {
    Eigen::VectorXd x(game->players * game->channels);
    for (int n = 0; n < game->players; ++n)
      sample_capped_simplex(x.segment(n * game->channels, game->channels), 1.0, rng);
    return x;
  }
  // uniform in the ball of the given radius around center
  Eigen::VectorXd u(center.size());
  for (Eigen::Index i = 0; i < u.size(); ++i) u[i] = rng.normal();
  const double norm = u.norm();
  const double r =
      radius * std::pow(rng.uniform_pos(), 1.0 / static_cast<double>(center.size()));
  return center + (r / norm) * u;
}

}  // namespace

ProblemInstance::ProblemInstance(ProblemFamily family, double mu, double lip,
                                 Eigen::VectorXd root)
    : family_(std::move(family)), mu_(mu), lip_(lip), root_(std::move(root)) {
  if (mu_ <= 0.0 || lip_ < mu_)
    throw std::invalid_argument("instance requires 0 < mu <= lip");
  if (root_.size() != family_dim(family_))
    throw std::invalid_argument("root dimension mismatch");
}

void ProblemInstance::apply(const Eigen::VectorXd& x, Eigen::VectorXd& out) const {
  if (x.size() != root_.size())
    throw std::invalid_argument("operator input dimension mismatch");
  apply_family(family_, x, out);
}

Eigen::VectorXd ProblemInstance::apply(const Eigen::VectorXd& x) const {
  Eigen::VectorXd out(x.size());
  apply(x, out);
  return out;
}

bool ProblemInstance::has_projection() const { return family_has_projection(family_); }

void ProblemInstance::project(Eigen::VectorXd& x) const { project_family(family_, x); }

Eigen::VectorXd huber_gradient(const HuberLsqProblem& p, const Eigen::VectorXd& x) {
  if (x.size() != p.a.cols()) throw std::invalid_argument("huber_gradient: dimension mismatch");
  Eigen::VectorXd out(x.size());
  huber_gradient_inplace(p, x, out);
  return out;
}

Eigen::VectorXd game_pseudogradient(const PowerControlGame& g, const Eigen::VectorXd& x) {
  const int np = g.players;
  const int nc = g.channels;
  if (x.size() != static_cast<Eigen::Index>(np) * nc)
    throw std::invalid_argument("game_pseudogradient: dimension mismatch");
  Eigen::VectorXd h(x.size());
  Eigen::VectorXd xd(np), interference(np);
  for (int d = 0; d < nc; ++d) {
    for (int n = 0; n < np; ++n) xd[n] = x[n * nc + d];
    // I_n^{(d)} = sum_{m != n} g_{m,n}^{(d)} x^{(m,d)}; diagonal is zeroed.
    interference.noalias() = g.cross_gains[d].transpose() * xd;
    for (int n = 0; n < np; ++n) {
      const double gain = g.direct_gains(n, d);
      const double den = g.noise_floor + interference[n] + gain * xd[n];
      if (den <= 0.0)
        throw std::domain_error("game_pseudogradient: nonpositive SINR denominator");
      h[n * nc + d] = kInvLn2 * gain / den;
    }
  }
  return h;
}

Eigen::VectorXd project_box_capped_simplex(const Eigen::VectorXd& x, double cap) {
  if (cap <= 0.0) throw std::invalid_argument("projection cap must be positive");
  Eigen::VectorXd y = x.cwiseMax(0.0);
  if (y.sum() <= cap) return y;
  std::vector<double> sorted(y.data(), y.data() + y.size());
  std::sort(sorted.begin(), sorted.end(), std::greater<double>());
  double running = 0.0;
  double theta = 0.0;
  for (std::size_t j = 0; j < sorted.size(); ++j) {
    running += sorted[j];
    const double candidate = (running - cap) / static_cast<double>(j + 1);
    if (sorted[j] - candidate > 0.0)
      theta = candidate;
    else
      break;
  }
  return (y.array() - theta).max(0.0).matrix();
}

MuLipEstimate estimate_mu_lip(const ProblemFamily& family, const Eigen::VectorXd& center,
                              long n_pairs, double radius, std::uint64_t seed) {
  if (n_pairs < 2) throw std::invalid_argument("estimate_mu_lip needs n_pairs >= 2");
  Rng rng(seed);
  const int dim = family_dim(family);
  Eigen::VectorXd f1(dim), f2(dim);
  double mu_hat = std::numeric_limits<double>::infinity();
  double lip_hat = 0.0;
  for (long i = 0; i < n_pairs; ++i) {
    Eigen::VectorXd x1 = sample_point(family, center, radius, rng);
    Eigen::VectorXd x2 = sample_point(family, center, radius, rng);
    const double gap2 = (x1 - x2).squaredNorm();
    if (gap2 == 0.0) continue;
    apply_family(family, x1, f1);
    apply_family(family, x2, f2);
    const double inner = (f1 - f2).dot(x1 - x2);
    mu_hat = std::min(mu_hat, inner / gap2);
    lip_hat = std::max(lip_hat, (f1 - f2).norm() / std::sqrt(gap2));
  }
  if (!(mu_hat > 0.0))
    throw std::runtime_error("estimate_mu_lip: sampled mu_hat = " +
                             format_double(mu_hat) +
                             " <= 0; operator is not strongly monotone on the sampled region");
  return {mu_hat, lip_hat};
}

MuLipEstimate estimate_mu_lip(const ProblemInstance& inst, long n_pairs, double radius,
                              std::uint64_t seed) {
  return estimate_mu_lip(inst.family(), inst.root(), n_pairs, radius, seed);
}

Eigen::VectorXd solve_root(const ProblemInstance& inst, double tol, long max_iters,
                           const Eigen::VectorXd* x_start) {
  return solve_root(inst.family(), inst.mu(), inst.lip(), tol, max_iters, x_start);
}

Eigen::VectorXd solve_root(const ProblemFamily& family, double mu, double lip,
                           double tol, long max_iters, const Eigen::VectorXd* x_start) {
  if (mu <= 0.0 || lip < mu) throw std::invalid_argument("solve_root requires 0 < mu <= lip");
  const int dim = family_dim(family);
  const double zeta = mu / (lip * lip);
  Eigen::VectorXd x;
  if (x_start != nullptr) {
    if (x_start->size() != dim) throw std::invalid_argument("solve_root start dimension mismatch");
    x = *x_start;
    project_family(family, x);
  } else if (const auto* game = std::get_if<PowerControlGame>(&family)) {
    x = Eigen::VectorXd::Constant(dim, 0.5 / game->channels);
  } else {
    x = Eigen::VectorXd::Zero(dim);
  }
  Eigen::VectorXd fx(dim), next(dim);
  for (long it = 0; it < max_iters; ++it) {
    apply_family(family, x, fx);
    next = x - zeta * fx;
    project_family(family, next);
    if ((x - next).norm() <= tol) return next;
    x.swap(next);
  }
  throw std::runtime_error("solve_root did not converge within max_iters");
}

ProblemInstance make_linear_instance(const Eigen::MatrixXd& matrix) {
  if (matrix.rows() != matrix.cols() || matrix.rows() == 0)
    throw std::invalid_argument("linear instance needs a square matrix");
  const Eigen::MatrixXd sym = 0.5 * (matrix + matrix.transpose());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(sym);
  const double mu = es.eigenvalues().minCoeff();
  if (mu <= 0.0)
    throw std::invalid_argument("linear instance is not strongly monotone");
  const double lip = matrix.jacobiSvd().singularValues().maxCoeff();
  return ProblemInstance(LinearProblem{matrix}, mu, lip,
                         Eigen::VectorXd::Zero(matrix.rows()));
}

ProblemInstance make_identity_instance(int dim) {
  return make_linear_instance(Eigen::MatrixXd::Identity(dim, dim));
}

ProblemInstance make_huber_instance(int m, int d, double delta, std::uint64_t matrix_seed) {
  if (m <= d || d <= 0) throw std::invalid_argument("huber instance needs m > d > 0");
  if (delta < 0.0) throw std::invalid_argument("huber threshold must be nonnegative");
  Rng rng(hash_combine(matrix_seed, 0x4875626572ULL));  // "Huber"
  HuberLsqProblem p;
  p.a.resize(m, d);
  const double scale = 1.0 / std::sqrt(static_cast<double>(m));
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < d; ++j) p.a(i, j) = scale * rng.normal();
  p.b.resize(m);
  for (int i = 0; i < m; ++i) p.b[i] = rng.normal();
  p.delta = delta;
  p.ata = p.a.transpose() * p.a;
  p.atb = p.a.transpose() * p.b;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(p.ata);
  const double lambda_min = es.eigenvalues().minCoeff();
  const double lambda_max = es.eigenvalues().maxCoeff();
  if (lambda_min <= 0.0)
    throw std::runtime_error("sampled A'A is not positive definite");
  const double mu = lambda_min;
  const double lip = lambda_max + (delta > 0.0 ? 1.0 : 0.0);
  Eigen::VectorXd root = solve_root(p, mu, lip);
  return ProblemInstance(std::move(p), mu, lip, std::move(root));
}

ProblemInstance make_power_control_instance(int players, int channels, GameRanges ranges,
                                            double noise_floor, std::uint64_t game_seed) {
  if (players <= 0 || channels <= 0)
    throw std::invalid_argument("game needs positive player and channel counts");
  if (noise_floor <= 0.0) throw std::invalid_argument("noise floor must be positive");
  Rng rng(hash_combine(game_seed, 0x67616D65ULL));  // "game"
  PowerControlGame g;
  g.players = players;
  g.channels = channels;
  g.noise_floor = noise_floor;
  g.direct_gains.resize(players, channels);
  for (int n = 0; n < players; ++n)
    for (int d = 0; d < channels; ++d)
      g.direct_gains(n, d) =
          ranges.direct_min + (ranges.direct_max - ranges.direct_min) * rng.uniform01();
  g.cross_gains.assign(channels, Eigen::MatrixXd::Zero(players, players));
  for (int d = 0; d < channels; ++d)
    for (int m = 0; m < players; ++m)
      for (int n = 0; n < players; ++n) {
        if (m == n) continue;
        g.cross_gains[d](m, n) =
            ranges.cross_min + (ranges.cross_max - ranges.cross_min) * rng.uniform01();
      }
  ProblemFamily family = g;
  MuLipEstimate est =
      estimate_mu_lip(family, Eigen::VectorXd::Zero(players * channels), 100'000, 1.0,
                      hash_combine(game_seed, 0x6D754C69ULL));  // "muLi"
  // small margin: sampled extrema understate the true range
  const double mu = 0.95 * est.mu_hat;
  const double lip = 1.05 * est.lip_hat;
  Eigen::VectorXd root = solve_root(family, mu, lip);
  return ProblemInstance(std::move(family), mu, lip, std::move(root));
}

// -- serialization -----------------------------------------------------------

namespace {

void write_values(std::ostream& os, const char* key, const double* data, Eigen::Index n) {
  os << key << " =";
  for (Eigen::Index i = 0; i < n; ++i) os << ' ' << format_double(data[i]);
  os << '\n';
}

void write_matrix_row_major(std::ostream& os, const char* key, const Eigen::MatrixXd& m) {
  os << key << " =";
  for (Eigen::Index i = 0; i < m.rows(); ++i)
    for (Eigen::Index j = 0; j < m.cols(); ++j) os << ' ' << format_double(m(i, j));
  os << '\n';
}

using Section = std::map<std::string, std::string>;
using Document = std::map<std::string, Section>;

Document parse_sections(std::istream& is, const std::string& context) {
  Document doc;
  std::string line, section;
  long line_no = 0;
  while (std::getline(is, line)) {
    ++line_no;
    std::string t = trim(line);
    if (t.empty() || t[0] == '#' || t[0] == ';') continue;
    if (t.front() == '[') {
      if (t.back() != ']')
        throw std::invalid_argument(context + ":" + std::to_string(line_no) +
                                    ": malformed section header");
      section = trim(t.substr(1, t.size() - 2));
      doc[section];
      continue;
    }
    const auto eq = t.find('=');
    if (eq == std::string::npos)
      throw std::invalid_argument(context + ":" + std::to_string(line_no) +
                                  ": expected key = value");
    doc[section][trim(t.substr(0, eq))] = trim(t.substr(eq + 1));
  }
  return doc;
}

const std::string& require_key(const Document& doc, const std::string& section,
                               const std::string& key, const std::string& context) {
  auto sec = doc.find(section);
  if (sec == doc.end())
    throw std::invalid_argument(context + ": missing section [" + section + "]");
  auto it = sec->second.find(key);
  if (it == sec->second.end())
    throw std::invalid_argument(context + ": missing key '" + key + "' in [" + section + "]");
  return it->second;
}

Eigen::MatrixXd read_matrix(const std::string& text, Eigen::Index rows, Eigen::Index cols,
                            const std::string& what) {
  const auto toks = split_ws(text);
  if (static_cast<Eigen::Index>(toks.size()) != rows * cols)
    throw std::invalid_argument(what + ": expected " + std::to_string(rows * cols) +
                                " values, got " + std::to_string(toks.size()));
  Eigen::MatrixXd m(rows, cols);
  std::size_t k = 0;
  for (Eigen::Index i = 0; i < rows; ++i)
    for (Eigen::Index j = 0; j < cols; ++j) m(i, j) = parse_double(toks[k++]);
  return m;
}

}  // namespace

void save_instance(const ProblemInstance& inst, const std::string& path) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot open '" + path + "' for writing");
  os << "[instance]\n";
  os << "dim = " << inst.dim() << '\n';
  os << "mu = " << format_double(inst.mu()) << '\n';
  os << "lip = " << format_double(inst.lip()) << '\n';
  std::visit(
      [&](const auto& f) {
        using T = std::decay_t<decltype(f)>;
        if constexpr (std::is_same_v<T, LinearProblem>) {
          os << "kind = linear\n\n[linear]\n";
          write_matrix_row_major(os, "matrix", f.matrix);
        } else if constexpr (std::is_same_v<T, HuberLsqProblem>) {
          os << "kind = huber_lsq\n\n[huber_lsq]\n";
          os << "m = " << f.a.rows() << '\n';
          os << "d = " << f.a.cols() << '\n';
          os << "delta = " << format_double(f.delta) << '\n';
          write_matrix_row_major(os, "a", f.a);
          write_values(os, "b", f.b.data(), f.b.size());
        } else {
          os << "kind = power_control\n\n[power_control]\n";
          os << "players = " << f.players << '\n';
          os << "channels = " << f.channels << '\n';
          os << "noise_floor = " << format_double(f.noise_floor) << '\n';
          write_matrix_row_major(os, "direct_gains", f.direct_gains);
          for (int d = 0; d < f.channels; ++d)
            write_matrix_row_major(os, ("cross_gains_" + std::to_string(d)).c_str(),
                                   f.cross_gains[d]);
        }
      },
      inst.family());
  os << "\n[root]\n";
  write_values(os, "data", inst.root().data(), inst.root().size());
  if (!os) throw std::runtime_error("write to '" + path + "' failed");
}

ProblemInstance load_instance(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("cannot open instance file '" + path + "'");
  Document doc = parse_sections(is, path);
  const int dim = static_cast<int>(parse_long(require_key(doc, "instance", "dim", path)));
  const double mu = parse_double(require_key(doc, "instance", "mu", path));
  const double lip = parse_double(require_key(doc, "instance", "lip", path));
  const std::string kind = require_key(doc, "instance", "kind", path);
  ProblemFamily family = LinearProblem{};
  if (kind == "linear") {
    family = LinearProblem{read_matrix(require_key(doc, "linear", "matrix", path), dim, dim,
                                       "linear matrix")};
  } else if (kind == "huber_lsq") {
    HuberLsqProblem p;
    const long m = parse_long(require_key(doc, "huber_lsq", "m", path));
    const long d = parse_long(require_key(doc, "huber_lsq", "d", path));
    p.delta = parse_double(require_key(doc, "huber_lsq", "delta", path));
    p.a = read_matrix(require_key(doc, "huber_lsq", "a", path), m, d, "huber A");
    p.b = read_matrix(require_key(doc, "huber_lsq", "b", path), m, 1, "huber b");
    p.ata = p.a.transpose() * p.a;
    p.atb = p.a.transpose() * p.b;
    family = std::move(p);
  } else if (kind == "power_control") {
    PowerControlGame g;
    g.players = static_cast<int>(parse_long(require_key(doc, "power_control", "players", path)));
    g.channels = static_cast<int>(parse_long(require_key(doc, "power_control", "channels", path)));
    g.noise_floor = parse_double(require_key(doc, "power_control", "noise_floor", path));
    g.direct_gains = read_matrix(require_key(doc, "power_control", "direct_gains", path),
                                 g.players, g.channels, "direct gains");
    for (int d = 0; d < g.channels; ++d)
      g.cross_gains.push_back(
          read_matrix(require_key(doc, "power_control", "cross_gains_" + std::to_string(d), path),
                      g.players, g.players, "cross gains"));
    family = std::move(g);
  } else {
    throw std::invalid_argument(path + ": unknown instance kind '" + kind + "'");
  }
  Eigen::VectorXd root = read_matrix(require_key(doc, "root", "data", path), dim, 1, "root");
  return ProblemInstance(std::move(family), mu, lip, std::move(root));
}

}  // namespace salab
