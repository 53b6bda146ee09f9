#pragma once

#include <cmath>
#include <vector>

#include "specpercept/common.hpp"
#include "specpercept/conv.hpp"
#include "specpercept/grid.hpp"

namespace specpercept {

// MS-SSIM parameters. The canonical per-scale weights are published rounded
// to four digits and sum to 1.0001; the defaults here divide that out so the
// sum is exactly 1.
struct MsSsimParams {
  int scales = 5;
  std::vector<double> scale_weights;
  int window_size = 11;
  double window_sigma = 1.5;
  double c1 = 0.01 * 0.01;  // (K1 * dynamic range)^2, range 1
  double c2 = 0.03 * 0.03;

  MsSsimParams() : scale_weights(canonical_weights(5)) {}

  static std::vector<double> canonical_weights(int n) {
    static const double raw[5] = {0.0448, 0.2856, 0.3001, 0.2363, 0.1333};
    double sum = 0.0;
    for (int i = 0; i < n; ++i) sum += raw[i];
    std::vector<double> w(n);
    for (int i = 0; i < n; ++i) w[i] = raw[i] / sum;
    return w;
  }

  // Largest scale count (up to 5) whose coarsest image still fits the window,
  // with the canonical weights renormalized. Lets the metric run on small
  // grids where the full five-scale form is undefined.
  static MsSsimParams for_size(int rows, int cols) {
    MsSsimParams p;
    const int m = std::min(rows, cols);
    int k = 0;
    while (k < 5 && (m >> k) >= p.window_size) ++k;
    if (k == 0) {
      throw ParamError("MsSsimParams::for_size: grid " + std::to_string(rows) + "x" +
                       std::to_string(cols) + " smaller than the " +
                       std::to_string(p.window_size) + "-tap window");
    }
    p.scales = k;
    p.scale_weights = canonical_weights(k);
    return p;
  }

  void validate() const {
    if (scales < 1) throw ParamError("MsSsimParams: scales must be >= 1");
    if (static_cast<int>(scale_weights.size()) != scales) {
      throw ParamError("MsSsimParams: need one weight per scale");
    }
    double sum = 0.0;
    for (double w : scale_weights) {
      if (w <= 0.0) throw ParamError("MsSsimParams: weights must be positive");
      sum += w;
    }
    if (std::fabs(sum - 1.0) > 1e-9) throw ParamError("MsSsimParams: weights must sum to 1");
    if (window_size < 1 || window_size % 2 == 0) {
      throw ParamError("MsSsimParams: window_size must be odd and positive");
    }
    if (window_sigma <= 0.0 || c1 <= 0.0 || c2 <= 0.0) {
      throw ParamError("MsSsimParams: sigma/c1/c2 must be positive");
    }
  }
};

namespace detail {

// sign(x) * |x|^w; the contrast-structure mean can go negative for
// anticorrelated patches, so plain pow is not safe.
inline double signed_pow(double x, double w) {
  if (x == 0.0) return 0.0;
  const double m = std::pow(std::fabs(x), w);
  return x < 0.0 ? -m : m;
}

// d/dx signed_pow = w * |x|^(w-1) (even in x).
inline double signed_pow_deriv(double x, double w) {
  if (x == 0.0) return 0.0;
  return w * std::pow(std::fabs(x), w - 1.0);
}

// Valid-mode Gaussian moment maps of one image pair.
struct SsimMoments {
  Grid mu_a, mu_b, s_aa, s_bb, s_ab;
};

inline SsimMoments ssim_moments(const Grid& a, const Grid& b, const std::vector<double>& g) {
  SsimMoments m;
  m.mu_a = conv::valid_corr_sep(a, g);
  m.mu_b = conv::valid_corr_sep(b, g);
  Grid aa(a.rows, a.cols), bb(a.rows, a.cols), ab(a.rows, a.cols);
  for (size_t i = 0; i < a.data.size(); ++i) {
    aa.data[i] = a.data[i] * a.data[i];
    bb.data[i] = b.data[i] * b.data[i];
    ab.data[i] = a.data[i] * b.data[i];
  }
  m.s_aa = conv::valid_corr_sep(aa, g);
  m.s_bb = conv::valid_corr_sep(bb, g);
  m.s_ab = conv::valid_corr_sep(ab, g);
  return m;
}

// Everything grad_ms_ssim needs to replay the computation backwards.
struct MsSsimScaleTrace {
  Grid a, b;
  SsimMoments m;
  Grid cs_map;
  double cs_mean = 0.0;
};

struct MsSsimTrace {
  std::vector<MsSsimScaleTrace> scales;
  Grid l_map;
  double l_mean = 0.0;
  double value = 0.0;
};

inline double ms_ssim_forward(const Grid& a, const Grid& b, const MsSsimParams& params,
                              MsSsimTrace* trace) {
  params.validate();
  require_same_shape(a, b, "ms_ssim");
  const int coarse = std::min(a.rows, a.cols) >> (params.scales - 1);
  if (coarse < params.window_size) {
    throw ParamError("ms_ssim: " + std::to_string(params.scales) + " scales leave a " +
                     std::to_string(coarse) + "-wide coarsest image, below the window size");
  }

  const std::vector<double> g = conv::gaussian_kernel(params.window_size, params.window_sigma);
  Grid cur_a = a, cur_b = b;
  double value = 1.0;
  Grid l_map;
  double l_mean = 0.0;

  for (int k = 0; k < params.scales; ++k) {
    SsimMoments m = ssim_moments(cur_a, cur_b, g);
    Grid cs(m.mu_a.rows, m.mu_a.cols);
    for (size_t i = 0; i < cs.data.size(); ++i) {
      const double va = m.s_aa.data[i] - m.mu_a.data[i] * m.mu_a.data[i];
      const double vb = m.s_bb.data[i] - m.mu_b.data[i] * m.mu_b.data[i];
      const double cab = m.s_ab.data[i] - m.mu_a.data[i] * m.mu_b.data[i];
      cs.data[i] = (2.0 * cab + params.c2) / (va + vb + params.c2);
    }
    const double cs_mean = grid_mean(cs);
    value *= signed_pow(cs_mean, params.scale_weights[k]);

    if (k == params.scales - 1) {
      l_map = Grid(m.mu_a.rows, m.mu_a.cols);
      for (size_t i = 0; i < l_map.data.size(); ++i) {
        const double ma = m.mu_a.data[i], mb = m.mu_b.data[i];
        l_map.data[i] = (2.0 * ma * mb + params.c1) / (ma * ma + mb * mb + params.c1);
      }
      l_mean = grid_mean(l_map);
      value *= signed_pow(l_mean, params.scale_weights[k]);
    }

    if (trace) {
      MsSsimScaleTrace st;
      st.a = cur_a;
      st.b = cur_b;
      st.m = std::move(m);
      st.cs_map = std::move(cs);
      st.cs_mean = cs_mean;
      trace->scales.push_back(std::move(st));
    }

    if (k + 1 < params.scales) {
      cur_a = conv::mean_pool2(cur_a);
      cur_b = conv::mean_pool2(cur_b);
    }
  }

  if (trace) {
    trace->l_map = l_map;
    trace->l_mean = l_mean;
    trace->value = value;
  }
  return value;
}

}  // namespace detail

// Single-scale SSIM: mean over valid window positions of luminance times
// contrast-structure, Gaussian-weighted moments, stabilizers c1/c2.
inline double ssim(const Grid& a, const Grid& b, const MsSsimParams& params) {
  params.validate();
  require_same_shape(a, b, "ssim");
  if (a.rows < params.window_size || a.cols < params.window_size) {
    throw ParamError("ssim: grid smaller than the window");
  }
  const std::vector<double> g = conv::gaussian_kernel(params.window_size, params.window_sigma);
  const detail::SsimMoments m = detail::ssim_moments(a, b, g);
  double acc = 0.0;
  for (size_t i = 0; i < m.mu_a.data.size(); ++i) {
    const double ma = m.mu_a.data[i], mb = m.mu_b.data[i];
    const double va = m.s_aa.data[i] - ma * ma;
    const double vb = m.s_bb.data[i] - mb * mb;
    const double cab = m.s_ab.data[i] - ma * mb;
    const double l = (2.0 * ma * mb + params.c1) / (ma * ma + mb * mb + params.c1);
    const double cs = (2.0 * cab + params.c2) / (va + vb + params.c2);
    acc += l * cs;
  }
  return acc / static_cast<double>(m.mu_a.data.size());
}

inline double ssim(const Grid& a, const Grid& b) { return ssim(a, b, MsSsimParams{}); }

// Multi-scale SSIM: contrast-structure at every scale (weights as exponents),
// luminance only at the coarsest; scales are linked by 2x2 mean pooling.
inline double ms_ssim(const Grid& a, const Grid& b, const MsSsimParams& params) {
  return detail::ms_ssim_forward(a, b, params, nullptr);
}

inline double ms_ssim(const Grid& a, const Grid& b) { return ms_ssim(a, b, MsSsimParams{}); }

}  // namespace specpercept
