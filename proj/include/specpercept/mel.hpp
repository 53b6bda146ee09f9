#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <vector>

#include "specpercept/common.hpp"
#include "specpercept/grid.hpp"
#include "specpercept/stft.hpp"
#include "specpercept/wav.hpp"

namespace specpercept {

// Parameters of the wave -> [0,1] mel-spectrogram transform.
struct MelParams {
  int sample_rate = 16000;
  int n_fft = 1024;
  int hop = 260;
  int n_mels = 256;
  double eps = 0.001;
  int target_frames = 256;

  void validate() const {
    if (sample_rate <= 0 || n_fft <= 0 || hop <= 0 || n_mels <= 0 || target_frames <= 0) {
      throw ParamError("MelParams: all sizes must be positive");
    }
    if (hop > n_fft) throw ParamError("MelParams: hop must not exceed n_fft");
    if (n_mels > n_fft / 2 + 1) {
      throw ParamError("MelParams: n_mels exceeds the number of FFT bins (n_fft/2+1)");
    }
    if (eps <= 0.0) throw ParamError("MelParams: eps must be positive");
  }
};

// A [0,1] grid plus the log-domain extrema needed to undo the scaling.
// Row r is mel band r, band 0 at the bottom of the frequency axis.
struct Spectrogram {
  Grid values;
  MelParams params;
  double log_lo = 0.0;
  double log_hi = 0.0;
};

inline double hz_to_mel(double f) { return 2595.0 * std::log10(1.0 + f / 700.0); }
inline double mel_to_hz(double m) { return 700.0 * (std::pow(10.0, m / 2595.0) - 1.0); }

// Triangular filterbank with centers equally spaced on the HTK mel scale
// between 0 Hz and sample_rate/2, evaluated at the FFT bin frequencies, no
// area normalization. At high band counts the narrowest triangles can fall
// between bins and leave a row empty; that matches the reference toolkit and
// is allowed.
inline Grid mel_filterbank(int n_mels, int n_fft, int sample_rate) {
  if (n_mels < 1) throw ParamError("mel_filterbank: n_mels must be >= 1");
  if (n_fft < 2 || sample_rate <= 0) throw ParamError("mel_filterbank: bad n_fft/sample_rate");
  const int bins = n_fft / 2 + 1;
  if (n_mels > bins) {
    throw ParamError("mel_filterbank: n_mels " + std::to_string(n_mels) +
                     " exceeds FFT resolution (" + std::to_string(bins) + " bins)");
  }

  std::vector<double> f_pts(n_mels + 2);
  const double mel_hi = hz_to_mel(sample_rate / 2.0);
  for (int i = 0; i < n_mels + 2; ++i) {
    f_pts[i] = mel_to_hz(mel_hi * i / (n_mels + 1));
  }

  Grid fb(n_mels, bins);
  for (int l = 0; l < n_mels; ++l) {
    const double f_lo = f_pts[l], f_c = f_pts[l + 1], f_hi = f_pts[l + 2];
    for (int k = 0; k < bins; ++k) {
      const double f = static_cast<double>(k) * sample_rate / n_fft;
      const double up = (f - f_lo) / (f_c - f_lo);
      const double down = (f_hi - f) / (f_hi - f_c);
      fb(l, k) = std::max(0.0, std::min(up, down));
    }
  }
  return fb;
}

namespace detail {

// Contiguous nonzero column range per filter row; keeps the projection sparse.
struct FilterSupport {
  int lo = 0, hi = 0;  // [lo, hi)
};

inline std::vector<FilterSupport> filter_supports(const Grid& fb) {
  std::vector<FilterSupport> s(fb.rows);
  for (int r = 0; r < fb.rows; ++r) {
    int lo = fb.cols, hi = 0;
    for (int c = 0; c < fb.cols; ++c) {
      if (fb(r, c) != 0.0) {
        lo = std::min(lo, c);
        hi = std::max(hi, c + 1);
      }
    }
    s[r] = {std::min(lo, hi), hi};
  }
  return s;
}

}  // namespace detail

// STFT magnitude -> mel projection -> ln(x+eps) -> min/max record -> [0,1]
// scaling -> time axis center-cropped or right-padded (with 0) to
// target_frames columns.
inline Spectrogram mel_spectrogram(const AudioClip& clip, const MelParams& params) {
  params.validate();
  if (clip.sample_rate != params.sample_rate) {
    throw ParamError("mel_spectrogram: clip rate " + std::to_string(clip.sample_rate) +
                     " does not match params rate " + std::to_string(params.sample_rate));
  }

  const Grid mag = stft_magnitude(clip, params.n_fft, params.hop);
  const Grid fb = mel_filterbank(params.n_mels, params.n_fft, params.sample_rate);
  const auto supports = detail::filter_supports(fb);

  const int frames = mag.cols;
  Grid mel(params.n_mels, frames);
  for (int r = 0; r < params.n_mels; ++r) {
    const auto [lo, hi] = supports[r];
    for (int t = 0; t < frames; ++t) {
      double acc = 0.0;
      for (int k = lo; k < hi; ++k) acc += fb(r, k) * mag(k, t);
      mel(r, t) = acc;
    }
  }

  for (double& v : mel.data) v = std::log(v + params.eps);
  const double lo = grid_min(mel);
  const double hi = grid_max(mel);

  Grid scaled(params.n_mels, frames);
  if (hi - lo < 1e-12) {
    // Degenerate constant grid: everything maps to 0, extrema still recorded.
  } else {
    const double inv = 1.0 / (hi - lo);
    for (size_t i = 0; i < mel.data.size(); ++i) scaled.data[i] = (mel.data[i] - lo) * inv;
  }

  Grid out(params.n_mels, params.target_frames);
  const int offset = frames > params.target_frames ? (frames - params.target_frames) / 2 : 0;
  const int copy_cols = std::min(frames, params.target_frames);
  for (int r = 0; r < params.n_mels; ++r) {
    for (int c = 0; c < copy_cols; ++c) out(r, c) = scaled(r, c + offset);
  }

  Spectrogram spec;
  spec.values = std::move(out);
  spec.params = params;
  spec.log_lo = lo;
  spec.log_hi = hi;
  return spec;
}

// Undoes the [0,1] scaling and the log: v -> exp(v*(hi-lo)+lo) - eps, clamped
// at 0. This is the exactly invertible half of the inverse path.
inline Grid unscale_mel(const Spectrogram& spec) {
  Grid mel(spec.values.rows, spec.values.cols);
  const double span = spec.log_hi - spec.log_lo;
  for (size_t i = 0; i < mel.data.size(); ++i) {
    const double logv = spec.values.data[i] * span + spec.log_lo;
    mel.data[i] = std::max(0.0, std::exp(logv) - spec.params.eps);
  }
  return mel;
}

// Maps a Spectrogram back to linear-frequency magnitudes via the
// Moore-Penrose pseudo-inverse of the mel filterbank. Negative outputs are
// clamped to 0; the mel projection itself is lossy.
inline Grid invert_mel(const Spectrogram& spec) {
  const Grid mel = unscale_mel(spec);
  const Grid fb = mel_filterbank(spec.params.n_mels, spec.params.n_fft, spec.params.sample_rate);

  Eigen::MatrixXd m(fb.rows, fb.cols);
  for (int r = 0; r < fb.rows; ++r)
    for (int c = 0; c < fb.cols; ++c) m(r, c) = fb(r, c);
  Eigen::MatrixXd pinv = m.completeOrthogonalDecomposition().pseudoInverse();

  Eigen::MatrixXd melm(mel.rows, mel.cols);
  for (int r = 0; r < mel.rows; ++r)
    for (int c = 0; c < mel.cols; ++c) melm(r, c) = mel(r, c);
  Eigen::MatrixXd lin = pinv * melm;

  Grid out(static_cast<int>(lin.rows()), static_cast<int>(lin.cols()));
  for (int r = 0; r < out.rows; ++r)
    for (int c = 0; c < out.cols; ++c) out(r, c) = std::max(0.0, lin(r, c));
  return out;
}

}  // namespace specpercept
