#pragma once

#include <complex>
#include <cstdint>
#include <vector>

#include "specpercept/common.hpp"
#include "specpercept/fft.hpp"
#include "specpercept/grid.hpp"
#include "specpercept/wav.hpp"

namespace specpercept {

namespace detail {

// Periodic Hann window.
inline std::vector<double> hann_periodic(int n) {
  std::vector<double> w(n);
  for (int i = 0; i < n; ++i) {
    w[i] = 0.5 * (1.0 - std::cos(2.0 * std::numbers::pi * i / n));
  }
  return w;
}

// Whole-sample reflection (librosa-style 'reflect'): ... 2 1 | 0 1 2 ... | 1 0
inline int64_t reflect_index(int64_t i, int64_t n) {
  if (n == 1) return 0;
  const int64_t period = 2 * (n - 1);
  i %= period;
  if (i < 0) i += period;
  return i < n ? i : period - i;
}

enum class PadMode { Reflect, Zero };

// One column per frame, n_fft/2+1 complex bins per column. Frame t covers
// padded samples [t*hop, t*hop + n_fft) where the pad is n_fft/2 on each side.
inline std::vector<std::vector<std::complex<double>>> stft_complex(
    const std::vector<double>& x, int n_fft, int hop, PadMode mode) {
  if (x.empty()) throw ParamError("stft: empty signal");
  if (n_fft <= 0 || hop <= 0 || hop > n_fft) throw ParamError("stft: need 0 < hop <= n_fft");

  const int64_t len = static_cast<int64_t>(x.size());
  const int64_t frames = 1 + len / hop;
  const int64_t half = n_fft / 2;
  const std::vector<double> win = hann_periodic(n_fft);

  std::vector<std::vector<std::complex<double>>> out(frames);
  std::vector<std::complex<double>> buf(n_fft);
  for (int64_t t = 0; t < frames; ++t) {
    for (int j = 0; j < n_fft; ++j) {
      const int64_t idx = t * hop + j - half;
      double s = 0.0;
      if (idx >= 0 && idx < len) {
        s = x[idx];
      } else if (mode == PadMode::Reflect) {
        s = x[reflect_index(idx, len)];
      }
      buf[j] = win[j] * s;
    }
    fft_forward(buf);
    out[t].assign(buf.begin(), buf.begin() + (n_fft / 2 + 1));
  }
  return out;
}

// Least-squares inverse of the zero-padded STFT: windowed overlap-add divided
// by the summed squared window, then the center pad is trimmed off.
inline std::vector<double> istft(const std::vector<std::vector<std::complex<double>>>& spec,
                                 int n_fft, int hop, int64_t out_len) {
  const int64_t frames = static_cast<int64_t>(spec.size());
  const int64_t half = n_fft / 2;
  const int64_t buf_len = static_cast<int64_t>(frames - 1) * hop + n_fft;
  const std::vector<double> win = hann_periodic(n_fft);

  std::vector<double> acc(buf_len, 0.0);
  std::vector<double> wss(buf_len, 0.0);
  std::vector<std::complex<double>> full(n_fft);
  for (int64_t t = 0; t < frames; ++t) {
    const auto& half_spec = spec[t];
    for (int b = 0; b <= n_fft / 2; ++b) full[b] = half_spec[b];
    for (int b = n_fft / 2 + 1; b < n_fft; ++b) full[b] = std::conj(half_spec[n_fft - b]);
    fft_inverse(full);
    for (int j = 0; j < n_fft; ++j) {
      acc[t * hop + j] += win[j] * full[j].real();
      wss[t * hop + j] += win[j] * win[j];
    }
  }

  std::vector<double> out(out_len, 0.0);
  for (int64_t i = 0; i < out_len; ++i) {
    const int64_t p = i + half;
    if (p < buf_len && wss[p] > 1e-11) out[i] = acc[p] / wss[p];
  }
  return out;
}

}  // namespace detail

// Magnitude STFT: Hann (periodic) window of length n_fft, reflect center
// padding, frames = 1 + floor(len/hop). Rows are frequency bins 0..n_fft/2.
inline Grid stft_magnitude(const AudioClip& clip, int n_fft, int hop) {
  const auto spec = detail::stft_complex(clip.samples, n_fft, hop, detail::PadMode::Reflect);
  const int bins = n_fft / 2 + 1;
  const int frames = static_cast<int>(spec.size());
  Grid mag(bins, frames);
  for (int t = 0; t < frames; ++t) {
    for (int b = 0; b < bins; ++b) mag(b, t) = std::abs(spec[t][b]);
  }
  return mag;
}

// Griffin-Lim phase reconstruction from a linear magnitude grid
// (bins x frames, bins = n_fft/2+1). Phase starts at zero (`seed` is reserved
// for an optional random init); each iteration re-analyzes the current signal
// and keeps its phase under the target magnitude. The internal transform pair
// uses zero padding, which makes the OLA inverse an exact least-squares
// inverse and the consistency residual non-increasing. Output length is
// (frames-1)*hop.
inline AudioClip griffin_lim(const Grid& mag, int n_fft, int hop, int iters,
                             [[maybe_unused]] uint64_t seed, int sample_rate) {
  if (iters < 0) throw ParamError("griffin_lim: iters must be >= 0");
  if (mag.rows != n_fft / 2 + 1) {
    throw DimensionError("griffin_lim: magnitude grid has " + std::to_string(mag.rows) +
                         " rows, expected n_fft/2+1 = " + std::to_string(n_fft / 2 + 1));
  }
  const int bins = mag.rows;
  const int frames = mag.cols;
  const int64_t out_len = static_cast<int64_t>(frames - 1) * hop;

  std::vector<std::vector<std::complex<double>>> spec(frames,
                                                      std::vector<std::complex<double>>(bins));
  for (int t = 0; t < frames; ++t) {
    for (int b = 0; b < bins; ++b) spec[t][b] = std::complex<double>(mag(b, t), 0.0);
  }

  std::vector<double> x = detail::istft(spec, n_fft, hop, out_len);
  for (int it = 0; it < iters && out_len > 0; ++it) {
    auto analyzed = detail::stft_complex(x, n_fft, hop, detail::PadMode::Zero);
    for (int t = 0; t < frames; ++t) {
      for (int b = 0; b < bins; ++b) {
        const std::complex<double> s = analyzed[t][b];
        const double a = std::abs(s);
        spec[t][b] = a > 0.0 ? mag(b, t) * (s / a) : std::complex<double>(mag(b, t), 0.0);
      }
    }
    x = detail::istft(spec, n_fft, hop, out_len);
  }

  AudioClip clip;
  clip.samples = std::move(x);
  clip.sample_rate = sample_rate;
  return clip;
}

}  // namespace specpercept
