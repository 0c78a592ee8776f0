#pragma once

#include <complex>
#include <cstddef>
#include <vector>

namespace salab {

/// Iterative radix-2 complex FFT, power-of-two sizes only. The plan
/// precomputes the bit-reversal permutation and the twiddle table, so
/// repeated transforms of the same size are cheap.
class Fft {
 public:
  explicit Fft(std::size_t n);  // throws std::invalid_argument unless n = 2^k

  void forward(std::vector<std::complex<double>>& a) const;
  /// Inverse transform, scaled by 1/n (forward followed by inverse is identity).
  void inverse(std::vector<std::complex<double>>& a) const;

  std::size_t size() const { return n_; }

  static std::size_t next_pow2(std::size_t n);

 private:
  void transform(std::vector<std::complex<double>>& a, bool inv) const;

  std::size_t n_;
  std::vector<std::size_t> rev_;
  std::vector<std::complex<double>> w_;  // e^{-2*pi*i*j/n}, j < n/2
};

}  // namespace salab
