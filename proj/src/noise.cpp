#include "salab/noise.hpp"

#include <cmath>
#include <complex>
#include <stdexcept>

namespace salab {

namespace {

template <class... Ts>
struct Overload : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overload(Ts...) -> Overload<Ts...>;

}  // namespace

void validate(const NoiseModel& model) {
  std::visit(Overload{
                 [](const MdsGaussian& m) {
                   if (m.std_dev < 0.0)
                     throw std::invalid_argument("gaussian std must be >= 0");
                 },
                 [](const ParetoCentered& m) {
                   if (!(m.alpha > 1.0 && m.alpha < 2.0))
                     throw std::invalid_argument("pareto alpha must lie in (1,2)");
                   if (m.scale <= 0.0) throw std::invalid_argument("pareto scale must be > 0");
                 },
                 [](const SymAlphaStable& m) {
                   if (!(m.alpha > 0.0 && m.alpha <= 2.0))
                     throw std::invalid_argument("stable alpha must lie in (0,2]");
                   if (m.scale <= 0.0) throw std::invalid_argument("stable scale must be > 0");
                 },
                 [](const Fgn& m) {
                   if (!(m.hurst > 0.0 && m.hurst < 1.0))
                     throw std::invalid_argument("hurst must lie in (0,1)");
                   if (m.scale <= 0.0) throw std::invalid_argument("fgn scale must be > 0");
                 },
                 [](const Farima& m) {
                   if (!(m.c >= 0.0 && m.c < 0.5))
                     throw std::invalid_argument("farima c must lie in [0, 0.5)");
                   if (m.scale <= 0.0) throw std::invalid_argument("farima scale must be > 0");
                   if (m.truncation < 0)
                     throw std::invalid_argument("farima truncation must be >= 0");
                 },
             },
             model);
}

std::string kind_name(const NoiseModel& model) {
  return std::visit(Overload{[](const MdsGaussian&) { return std::string("mds_gaussian"); },
                             [](const ParetoCentered&) { return std::string("pareto"); },
                             [](const SymAlphaStable&) { return std::string("alpha_stable"); },
                             [](const Fgn&) { return std::string("fgn"); },
                             [](const Farima&) { return std::string("farima"); }},
                    model);
}

bool is_long_range(const NoiseModel& model) {
  return std::holds_alternative<Fgn>(model) || std::holds_alternative<Farima>(model);
}

double moment_ceiling(const NoiseModel& model) {
  return std::visit(Overload{[](const MdsGaussian&) { return 2.0; },
                             [](const ParetoCentered& m) { return m.alpha; },
                             [](const SymAlphaStable& m) { return m.alpha; },
                             [](const Fgn&) { return 2.0; },
                             [](const Farima&) { return 2.0; }},
                    model);
}

double default_moment_order(const NoiseModel& model) {
  return std::visit(Overload{[](const MdsGaussian&) { return 2.0; },
                             [](const ParetoCentered& m) { return m.alpha - 0.1; },
                             [](const SymAlphaStable& m) {
                               return m.alpha == 2.0 ? 2.0 : m.alpha - 0.1;
                             },
                             [](const Fgn&) { return 2.0; },
                             [](const Farima&) { return 2.0; }},
                    model);
}

double lrd_delta(const NoiseModel& model) {
  if (const auto* f = std::get_if<Fgn>(&model)) return 2.0 - 2.0 * f->hurst;
  if (const auto* f = std::get_if<Farima>(&model)) return 1.0 - 2.0 * f->c;
  throw std::invalid_argument("delta is defined only for the LRD kinds");
}

double sample_pareto_centered(double alpha, double scale, Rng& rng) {
  const double raw = scale * std::pow(rng.uniform_pos(), -1.0 / alpha);
  return raw - scale * alpha / (alpha - 1.0);
}

double sample_sym_alpha_stable(double alpha, double scale, Rng& rng) {
  if (alpha == 2.0) return std::sqrt(2.0) * scale * rng.normal();
  const double v = M_PI * (rng.uniform_pos() - 0.5);
  const double w = rng.exponential();
  if (alpha == 1.0) return scale * std::tan(v);
  const double sin_av = std::sin(alpha * v);
  const double cos_v = std::cos(v);
  const double cos_diff = std::cos((1.0 - alpha) * v);
  return scale * sin_av / std::pow(cos_v, 1.0 / alpha) *
         std::pow(cos_diff / w, (1.0 - alpha) / alpha);
}

double fgn_autocovariance(double hurst, long h) {
  if (!(hurst > 0.0 && hurst < 1.0)) throw std::invalid_argument("hurst must lie in (0,1)");
  if (h < 0) throw std::invalid_argument("lag must be >= 0");
  if (h == 0) return 1.0;
  const double two_h = 2.0 * hurst;
  const double hp = static_cast<double>(h);
  return 0.5 * (std::pow(hp + 1.0, two_h) - 2.0 * std::pow(hp, two_h) +
                std::pow(hp - 1.0, two_h));
}

FgnSpectrum::FgnSpectrum(double hurst, std::size_t n)
    : n_(n), fft_(Fft::next_pow2(n < 2 ? 2 : 2 * (n - 1))) {
  if (n < 2) throw std::invalid_argument("fgn needs n >= 2");
  const std::size_t m = fft_.size();
  // first row of the circulant: gamma(0..m/2), then mirrored
  std::vector<std::complex<double>> row(m);
  for (std::size_t j = 0; j <= m / 2; ++j)
    row[j] = fgn_autocovariance(hurst, static_cast<long>(j));
  for (std::size_t j = m / 2 + 1; j < m; ++j) row[j] = row[m - j];
  fft_.forward(row);
  amplitude_.resize(m);
  for (std::size_t j = 0; j < m; ++j) {
    double eig = row[j].real();
    if (eig < -1e-9)
      throw std::runtime_error("circulant embedding produced eigenvalue " +
                               std::to_string(eig) + " < -1e-9");
    if (eig < 0.0) eig = 0.0;
    amplitude_[j] = std::sqrt(eig / static_cast<double>(m));
  }
}

void FgnSpectrum::sample(double scale, Rng& rng, double* out) const {
  const std::size_t m = fft_.size();
  std::vector<std::complex<double>> buf(m);
  for (std::size_t j = 0; j < m; ++j)
    buf[j] = amplitude_[j] * std::complex<double>(rng.normal(), rng.normal());
  fft_.forward(buf);
  for (std::size_t t = 0; t < n_; ++t) out[t] = scale * buf[t].real();
}

std::vector<double> fgn_generate(double hurst, std::size_t n, double scale, Rng& rng) {
  FgnSpectrum spectrum(hurst, n);
  std::vector<double> out(n);
  spectrum.sample(scale, rng, out.data());
  return out;
}

std::vector<double> farima_coefficients(double c, int trunc_level) {
  if (!(c >= 0.0 && c < 0.5)) throw std::invalid_argument("farima c must lie in [0, 0.5)");
  if (trunc_level < 0) throw std::invalid_argument("truncation must be >= 0");
  std::vector<double> psi(static_cast<std::size_t>(trunc_level) + 1);
  psi[0] = 1.0;
  for (int j = 1; j <= trunc_level; ++j)
    psi[j] = psi[j - 1] * (static_cast<double>(j) - 1.0 + c) / static_cast<double>(j);
  return psi;
}

std::vector<double> farima_generate(double c, double sigma, int trunc_level, std::size_t n,
                                    Rng& rng) {
  if (n == 0) throw std::invalid_argument("farima needs n >= 1");
  const std::vector<double> psi = farima_coefficients(c, trunc_level);
  // kernel reversed so each output is a contiguous dot product
  Eigen::VectorXd kernel(psi.size());
  for (std::size_t j = 0; j < psi.size(); ++j) kernel[psi.size() - 1 - j] = psi[j];
  const std::size_t window = psi.size();
  std::vector<double> eps(n + window - 1);
  for (auto& e : eps) e = rng.normal();
  std::vector<double> out(n);
  for (std::size_t t = 0; t < n; ++t) {
    Eigen::Map<const Eigen::VectorXd> seg(eps.data() + t, window);
    out[t] = sigma * kernel.dot(seg);
  }
  return out;
}

NoiseStream::NoiseStream(const NoiseModel& model, int dim, long horizon, std::uint64_t seed,
                         std::size_t memory_budget_bytes)
    : model_(model), dim_(dim), horizon_(horizon) {
  validate(model_);
  if (dim < 1 || horizon < 1) throw std::invalid_argument("noise stream needs d >= 1, horizon >= 1");
  coord_rng_.reserve(dim);
  for (int c = 0; c < dim; ++c) coord_rng_.emplace_back(hash_combine(seed, c));
  if (!is_long_range(model_)) return;
  const std::size_t need = static_cast<std::size_t>(dim) * static_cast<std::size_t>(horizon) *
                           sizeof(double);
  if (need > memory_budget_bytes)
    throw std::runtime_error(
        "LRD pre-generation needs " + std::to_string(need) + " bytes (> budget " +
        std::to_string(memory_budget_bytes) + "); lower the horizon or dimension");
  pre_.resize(dim);
  if (const auto* f = std::get_if<Fgn>(&model_)) {
    const std::size_t n = static_cast<std::size_t>(horizon) < 2
                              ? 2
                              : static_cast<std::size_t>(horizon);
    FgnSpectrum spectrum(f->hurst, n);
    std::vector<double> path(n);
    for (int c = 0; c < dim; ++c) {
      spectrum.sample(f->scale, coord_rng_[c], path.data());
      pre_[c].assign(path.begin(), path.begin() + horizon);
    }
  } else {
    const auto& fa = std::get<Farima>(model_);
    for (int c = 0; c < dim; ++c)
      pre_[c] = farima_generate(fa.c, fa.scale, fa.truncation,
                                static_cast<std::size_t>(horizon), coord_rng_[c]);
  }
}

void NoiseStream::next(Eigen::VectorXd& out) {
  if (emitted_ >= horizon_) throw std::logic_error("noise stream exhausted");
  if (out.size() != dim_) out.resize(dim_);
  if (!pre_.empty()) {
    for (int c = 0; c < dim_; ++c) out[c] = pre_[c][emitted_];
    ++emitted_;
    return;
  }
  std::visit(Overload{
                 [&](const MdsGaussian& m) {
                   for (int c = 0; c < dim_; ++c) out[c] = m.std_dev * coord_rng_[c].normal();
                 },
                 [&](const ParetoCentered& m) {
                   for (int c = 0; c < dim_; ++c)
                     out[c] = sample_pareto_centered(m.alpha, m.scale, coord_rng_[c]);
                 },
                 [&](const SymAlphaStable& m) {
                   for (int c = 0; c < dim_; ++c)
                     out[c] = sample_sym_alpha_stable(m.alpha, m.scale, coord_rng_[c]);
                 },
                 [](const Fgn&) {},
                 [](const Farima&) {},
             },
             model_);
  ++emitted_;
}

double estimate_sigma(const NoiseModel& model, int dim, double p_or_two, long n_samples,
                      std::uint64_t seed) {
  validate(model);
  if (n_samples < 2) throw std::invalid_argument("estimate_sigma needs n_samples >= 2");
  if (is_long_range(model)) {
    if (p_or_two != 2.0)
      throw std::invalid_argument("LRD sigma is defined for the second moment only");
    const double delta = lrd_delta(model);
    NoiseStream stream(model, dim, n_samples, seed);
    Eigen::MatrixXd samples(dim, n_samples);
    Eigen::VectorXd v(dim);
    for (long t = 0; t < n_samples; ++t) {
      stream.next(v);
      samples.col(t) = v;
    }
    const long max_lag = std::min<long>(1000, n_samples - 1);
    double best = 0.0;
    for (long h = 0; h <= max_lag; ++h) {
      double acc = 0.0;
      for (long t = 0; t + h < n_samples; ++t) acc += samples.col(t).dot(samples.col(t + h));
      const double gamma_hat = acc / static_cast<double>(n_samples - h);
      best = std::max(best, std::abs(gamma_hat) * std::pow(1.0 + h, delta));
    }
    return std::sqrt(best);
  }
  const double ceiling = moment_ceiling(model);
  const bool heavy = std::holds_alternative<ParetoCentered>(model) ||
                     (std::holds_alternative<SymAlphaStable>(model) &&
                      std::get<SymAlphaStable>(model).alpha < 2.0);
  if (heavy ? p_or_two >= ceiling : p_or_two > ceiling)
    throw std::invalid_argument("requested moment order exceeds the model's ceiling");
  NoiseStream stream(model, dim, n_samples, seed);
  Eigen::VectorXd v(dim);
  double acc = 0.0;
  for (long t = 0; t < n_samples; ++t) {
    stream.next(v);
    acc += std::pow(v.norm(), p_or_two);
  }
  return std::pow(acc / static_cast<double>(n_samples), 1.0 / p_or_two);
}

}  // namespace salab
