#include "salab/fft.hpp"

#include <cmath>
#include <stdexcept>

namespace salab {

Fft::Fft(std::size_t n) : n_(n) {
  if (n == 0 || (n & (n - 1)) != 0)
    throw std::invalid_argument("fft size must be a power of two");
  rev_.resize(n);
  rev_[0] = 0;
  for (std::size_t i = 1; i < n; ++i)
    rev_[i] = (rev_[i >> 1] >> 1) | ((i & 1) ? n >> 1 : 0);
  w_.resize(n / 2);
  const double step = -2.0 * M_PI / static_cast<double>(n);
  for (std::size_t j = 0; j < n / 2; ++j)
    w_[j] = std::polar(1.0, step * static_cast<double>(j));
}

std::size_t Fft::next_pow2(std::size_t n) {
  std::size_t p = 1;
  while (p < n) p <<= 1;
  return p;
}

void Fft::transform(std::vector<std::complex<double>>& a, bool inv) const {
  if (a.size() != n_) throw std::invalid_argument("fft buffer size mismatch");
  for (std::size_t i = 0; i < n_; ++i)
    if (i < rev_[i]) std::swap(a[i], a[rev_[i]]);
  for (std::size_t len = 2; len <= n_; len <<= 1) {
    const std::size_t stride = n_ / len;
    for (std::size_t base = 0; base < n_; base += len) {
      for (std::size_t j = 0; j < len / 2; ++j) {
        std::complex<double> w = w_[j * stride];
        if (inv) w = std::conj(w);
        const std::complex<double> u = a[base + j];
        const std::complex<double> v = a[base + j + len / 2] * w;
        a[base + j] = u + v;
        a[base + j + len / 2] = u - v;
      }
    }
  }
  if (inv) {
    const double s = 1.0 / static_cast<double>(n_);
    for (auto& x : a) x *= s;
  }
}

void Fft::forward(std::vector<std::complex<double>>& a) const { transform(a, false); }
void Fft::inverse(std::vector<std::complex<double>>& a) const { transform(a, true); }

}  // namespace salab
