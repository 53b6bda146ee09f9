#pragma once

#include <cmath>
#include <numbers>
#include <vector>

#include "specpercept/common.hpp"
#include "specpercept/wav.hpp"

namespace specpercept {

namespace detail {

// Zeroth-order modified Bessel function of the first kind, power series.
// Converges quickly for the argument range a Kaiser window uses.
inline double bessel_i0(double x) {
  const double half = x / 2.0;
  double term = 1.0;
  double sum = 1.0;
  for (int k = 1; k < 64; ++k) {
    term *= (half / k) * (half / k);
    sum += term;
    if (term < 1e-18 * sum) break;
  }
  return sum;
}

inline double sinc(double x) {
  if (std::fabs(x) < 1e-12) return 1.0;
  const double px = std::numbers::pi * x;
  return std::sin(px) / px;
}

// Low-pass prototype h(t) = 2 fc sinc(2 fc t) kaiser(t / half_width), sampled
// on a fine table for linear interpolation. t is in input-sample units.
struct SincTable {
  static constexpr int kHalfTaps = 32;     // 64 taps total per output sample
  static constexpr int kPerTap = 128;      // table oversampling
  std::vector<double> h;                   // h[i] = kernel at t = i / kPerTap
  double cutoff;                           // cycles per input sample, <= 0.5

  explicit SincTable(double fc) : cutoff(fc) {
    const double beta = 8.0;
    const double i0b = bessel_i0(beta);
    const int n = kHalfTaps * kPerTap + 1;
    h.resize(n + 1, 0.0);  // one extra entry so interpolation never reads past the end
    for (int i = 0; i < n; ++i) {
      const double t = static_cast<double>(i) / kPerTap;
      const double frac = t / kHalfTaps;  // in [0,1]
      const double window = bessel_i0(beta * std::sqrt(std::max(0.0, 1.0 - frac * frac))) / i0b;
      h[i] = 2.0 * fc * sinc(2.0 * fc * t) * window;
    }
  }

  double eval(double t) const {
    t = std::fabs(t);
    if (t >= kHalfTaps) return 0.0;
    const double x = t * kPerTap;
    const int i = static_cast<int>(x);
    const double f = x - i;
    return h[i] + f * (h[i + 1] - h[i]);
  }
};

}  // namespace detail

// Windowed-sinc resampling (Kaiser beta = 8, 64 taps per output sample).
// Anti-alias low-pass at min(rates)/2. Output length is
// round(len * target / input).
inline AudioClip resample(const AudioClip& clip, int target_rate) {
  if (clip.sample_rate <= 0 || target_rate <= 0) {
    throw ParamError("resample: rates must be positive");
  }
  if (target_rate == clip.sample_rate || clip.samples.empty()) {
    AudioClip out = clip;
    out.sample_rate = target_rate;
    return out;
  }

  const int64_t in_rate = clip.sample_rate;
  const int64_t out_rate = target_rate;
  const int64_t in_len = static_cast<int64_t>(clip.samples.size());
  const int64_t out_len = (in_len * out_rate + in_rate / 2) / in_rate;

  // Cutoff normalized to the input rate; downsampling narrows it to the
  // target Nyquist and the kernel gain compensates the decimation.
  const double ratio = static_cast<double>(out_rate) / static_cast<double>(in_rate);
  const double fc = 0.5 * std::min(1.0, ratio);
  detail::SincTable table(fc);

  AudioClip out;
  out.sample_rate = target_rate;
  out.samples.resize(out_len, 0.0);

  for (int64_t n = 0; n < out_len; ++n) {
    // Exact rational input position n * in_rate / out_rate.
    const int64_t num = n * in_rate;
    const int64_t base = num / out_rate;
    const double frac = static_cast<double>(num % out_rate) / static_cast<double>(out_rate);
    const double center = static_cast<double>(base) + frac;

    const int64_t k_lo = base - detail::SincTable::kHalfTaps + 1;
    const int64_t k_hi = base + detail::SincTable::kHalfTaps;
    double acc = 0.0;
    double wsum = 0.0;
    for (int64_t k = k_lo; k <= k_hi; ++k) {
      const double w = table.eval(static_cast<double>(k) - center);
      wsum += w;
      if (k >= 0 && k < in_len) acc += w * clip.samples[k];
    }
    // Normalizing by the tap sum removes passband ripple from table
    // quantization and keeps DC gain exactly 1.
    out.samples[n] = wsum != 0.0 ? acc / wsum : 0.0;
  }
  return out;
}

}  // namespace specpercept
