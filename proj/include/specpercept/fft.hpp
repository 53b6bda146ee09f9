#pragma once

#include <complex>
#include <numbers>
#include <vector>

namespace specpercept {

namespace detail {

inline bool is_pow2(size_t n) { return n != 0 && (n & (n - 1)) == 0; }

// In-place iterative radix-2 Cooley-Tukey. sign = -1 forward, +1 inverse
// (inverse leaves the 1/N scaling to the caller).
inline void fft_radix2(std::vector<std::complex<double>>& a, int sign) {
  const size_t n = a.size();
  for (size_t i = 1, j = 0; i < n; ++i) {
    size_t bit = n >> 1;
    for (; j & bit; bit >>= 1) j ^= bit;
    j ^= bit;
    if (i < j) std::swap(a[i], a[j]);
  }
  for (size_t len = 2; len <= n; len <<= 1) {
    const double ang = sign * 2.0 * std::numbers::pi / static_cast<double>(len);
    const std::complex<double> wlen(std::cos(ang), std::sin(ang));
    for (size_t i = 0; i < n; i += len) {
      std::complex<double> w(1.0, 0.0);
      for (size_t k = 0; k < len / 2; ++k) {
        std::complex<double> u = a[i + k];
        std::complex<double> v = a[i + k + len / 2] * w;
        a[i + k] = u + v;
        a[i + k + len / 2] = u - v;
        w *= wlen;
      }
    }
  }
}

// O(n^2) fallback so arbitrary transform sizes stay correct; only power-of-two
// sizes occur on the hot paths.
inline std::vector<std::complex<double>> dft_naive(const std::vector<std::complex<double>>& x,
                                                   int sign) {
  const size_t n = x.size();
  std::vector<std::complex<double>> y(n);
  for (size_t k = 0; k < n; ++k) {
    std::complex<double> acc(0.0, 0.0);
    for (size_t t = 0; t < n; ++t) {
      const double ang =
          sign * 2.0 * std::numbers::pi * static_cast<double>(k * t % n) / static_cast<double>(n);
      acc += x[t] * std::complex<double>(std::cos(ang), std::sin(ang));
    }
    y[k] = acc;
  }
  return y;
}

}  // namespace detail

// Forward DFT, no scaling.
inline void fft_forward(std::vector<std::complex<double>>& a) {
  if (detail::is_pow2(a.size())) {
    detail::fft_radix2(a, -1);
  } else {
    a = detail::dft_naive(a, -1);
  }
}

// Inverse DFT including the 1/N factor.
inline void fft_inverse(std::vector<std::complex<double>>& a) {
  if (detail::is_pow2(a.size())) {
    detail::fft_radix2(a, +1);
  } else {
    a = detail::dft_naive(a, +1);
  }
  const double inv = 1.0 / static_cast<double>(a.size());
  for (auto& v : a) v *= inv;
}

}  // namespace specpercept
