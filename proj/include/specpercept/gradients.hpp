#pragma once

#include <algorithm>
#include <cmath>
#include <utility>
#include <vector>

#include "specpercept/common.hpp"
#include "specpercept/conv.hpp"
#include "specpercept/grid.hpp"
#include "specpercept/metrics.hpp"
#include "specpercept/nlpd.hpp"
#include "specpercept/pyramid.hpp"
#include "specpercept/ssim.hpp"

namespace specpercept {

struct ValueGrad {
  double value = 0.0;
  Grid grad;
};

// All gradients are with respect to the first argument; the second is fixed.

inline ValueGrad mse_value_grad(const Grid& a, const Grid& b) {
  require_same_shape(a, b, "grad_mse");
  ValueGrad out;
  out.grad = Grid(a.rows, a.cols);
  const double n = static_cast<double>(a.data.size());
  double acc = 0.0;
  for (size_t i = 0; i < a.data.size(); ++i) {
    const double e = a.data[i] - b.data[i];
    acc += e * e;
    out.grad.data[i] = 2.0 * e / n;
  }
  out.value = acc / n;
  return out;
}

inline Grid grad_mse(const Grid& a, const Grid& b) { return mse_value_grad(a, b).grad; }

inline ValueGrad ms_ssim_value_grad(const Grid& a, const Grid& b, const MsSsimParams& params) {
  detail::MsSsimTrace tr;
  ValueGrad out;
  out.value = detail::ms_ssim_forward(a, b, params, &tr);

  const int M = params.scales;
  // Factors of the product: one contrast-structure term per scale, plus the
  // luminance term at the coarsest. other[j] = product of all factors but j.
  std::vector<double> terms(M + 1);
  for (int k = 0; k < M; ++k) {
    terms[k] = detail::signed_pow(tr.scales[k].cs_mean, params.scale_weights[k]);
  }
  terms[M] = detail::signed_pow(tr.l_mean, params.scale_weights[M - 1]);
  std::vector<double> prefix(M + 2, 1.0), suffix(M + 2, 1.0);
  for (int j = 0; j <= M; ++j) prefix[j + 1] = prefix[j] * terms[j];
  for (int j = M; j >= 0; --j) suffix[j] = suffix[j + 1] * terms[j];
  const auto other = [&](int j) { return prefix[j] * suffix[j + 1]; };

  const std::vector<double> g = conv::gaussian_kernel(params.window_size, params.window_sigma);

  Grid pooled_bar;  // gradient flowing into scale k's image from coarser scales
  for (int k = M - 1; k >= 0; --k) {
    const detail::MsSsimScaleTrace& st = tr.scales[k];
    const Grid& mu_a = st.m.mu_a;
    const Grid& mu_b = st.m.mu_b;
    const double cs_bar = other(k) * detail::signed_pow_deriv(st.cs_mean, params.scale_weights[k]);
    const double npos = static_cast<double>(st.cs_map.data.size());

    Grid mu_a_bar(mu_a.rows, mu_a.cols);
    Grid s_aa_bar(mu_a.rows, mu_a.cols);
    Grid s_ab_bar(mu_a.rows, mu_a.cols);
    for (size_t i = 0; i < st.cs_map.data.size(); ++i) {
      const double ma = mu_a.data[i], mb = mu_b.data[i];
      const double va = st.m.s_aa.data[i] - ma * ma;
      const double vb = st.m.s_bb.data[i] - mb * mb;
      const double den = va + vb + params.c2;
      const double map_bar = cs_bar / npos;
      const double cab_bar = 2.0 * map_bar / den;
      const double va_bar = -map_bar * st.cs_map.data[i] / den;
      s_ab_bar.data[i] = cab_bar;
      s_aa_bar.data[i] = va_bar;
      mu_a_bar.data[i] = -mb * cab_bar - 2.0 * ma * va_bar;
    }
    if (k == M - 1) {
      const double l_bar = other(M) * detail::signed_pow_deriv(tr.l_mean, params.scale_weights[k]);
      for (size_t i = 0; i < tr.l_map.data.size(); ++i) {
        const double ma = mu_a.data[i], mb = mu_b.data[i];
        const double den = ma * ma + mb * mb + params.c1;
        mu_a_bar.data[i] += (l_bar / npos) * (2.0 * mb - 2.0 * ma * tr.l_map.data[i]) / den;
      }
    }

    Grid a_bar = conv::valid_corr_sep_adjoint(mu_a_bar, g, st.a.rows, st.a.cols);
    const Grid aa_bar = conv::valid_corr_sep_adjoint(s_aa_bar, g, st.a.rows, st.a.cols);
    const Grid ab_bar = conv::valid_corr_sep_adjoint(s_ab_bar, g, st.a.rows, st.a.cols);
    for (size_t i = 0; i < a_bar.data.size(); ++i) {
      a_bar.data[i] += 2.0 * st.a.data[i] * aa_bar.data[i] + st.b.data[i] * ab_bar.data[i];
    }

    if (k < M - 1) {
      const Grid up = conv::mean_pool2_adjoint(pooled_bar, st.a.rows, st.a.cols);
      for (size_t i = 0; i < a_bar.data.size(); ++i) a_bar.data[i] += up.data[i];
    }
    pooled_bar = std::move(a_bar);
  }

  out.grad = std::move(pooled_bar);
  return out;
}

inline ValueGrad ms_ssim_value_grad(const Grid& a, const Grid& b) {
  return ms_ssim_value_grad(a, b, MsSsimParams{});
}

inline Grid grad_ms_ssim(const Grid& a, const Grid& b, const MsSsimParams& params) {
  return ms_ssim_value_grad(a, b, params).grad;
}

inline Grid grad_ms_ssim(const Grid& a, const Grid& b) {
  return ms_ssim_value_grad(a, b, MsSsimParams{}).grad;
}

inline ValueGrad nlpd_value_grad(const Grid& a, const Grid& b, const NlpdParams& params) {
  require_same_shape(a, b, "grad_nlpd");
  params.validate();
  const int L = params.levels;
  const double p = params.exponent;

  const LaplacianPyramid pa = build_pyramid(a, L);
  const LaplacianPyramid yb = divisive_normalize(build_pyramid(b, L), params);

  // Forward for a, keeping z, the divisor D = sigma + F*|z|, and y = z/D.
  std::vector<Grid> z(L + 1), div(L + 1), ya(L + 1);
  for (int s = 0; s <= L; ++s) {
    z[s] = (s < L) ? pa.bands[s] : pa.lowpass;
    Grid absz(z[s].rows, z[s].cols);
    for (size_t i = 0; i < absz.data.size(); ++i) absz.data[i] = std::fabs(z[s].data[i]);
    const Grid local = conv::sym_conv_2d(absz, params.norm_filters[s]);
    div[s] = Grid(z[s].rows, z[s].cols);
    ya[s] = Grid(z[s].rows, z[s].cols);
    for (size_t i = 0; i < z[s].data.size(); ++i) {
      div[s].data[i] = params.sigmas[s] + local.data[i];
      ya[s].data[i] = z[s].data[i] / div[s].data[i];
    }
  }

  ValueGrad out;
  std::vector<Grid> z_bar(L + 1);
  for (int s = 0; s <= L; ++s) {
    const Grid& yb_s = (s < L) ? yb.bands[s] : yb.lowpass;
    const double stage = detail::stage_norm(ya[s], yb_s, p);
    out.value += stage;

    const double n = static_cast<double>(ya[s].data.size());
    const double stage_bar = 1.0 / static_cast<double>(L + 1);
    Grid y_bar(ya[s].rows, ya[s].cols);
    if (stage > 0.0) {
      for (size_t i = 0; i < y_bar.data.size(); ++i) {
        const double e = ya[s].data[i] - yb_s.data[i];
        if (p == 2.0) {
          y_bar.data[i] = stage_bar * e / (n * stage);
        } else {
          const double mag = std::pow(std::fabs(e), p - 1.0);
          const double sgn = (e > 0.0) ? 1.0 : (e < 0.0 ? -1.0 : 0.0);
          y_bar.data[i] = stage_bar * std::pow(stage, 1.0 - p) * mag * sgn / n;
        }
      }
    }

    // y = z/D: direct path plus the |z| inside D.
    Grid d_bar(ya[s].rows, ya[s].cols);
    z_bar[s] = Grid(ya[s].rows, ya[s].cols);
    for (size_t i = 0; i < y_bar.data.size(); ++i) {
      z_bar[s].data[i] = y_bar.data[i] / div[s].data[i];
      d_bar.data[i] = -y_bar.data[i] * ya[s].data[i] / div[s].data[i];
    }
    const Grid absz_bar = conv::sym_conv_2d_adjoint(d_bar, params.norm_filters[s]);
    for (size_t i = 0; i < z_bar[s].data.size(); ++i) {
      const double zi = z[s].data[i];
      const double sgn = (zi > 0.0) ? 1.0 : (zi < 0.0 ? -1.0 : 0.0);
      z_bar[s].data[i] += absz_bar.data[i] * sgn;
    }
  }
  out.value /= static_cast<double>(L + 1);

  // Pyramid transpose: band_k = g_k - expand(g_{k+1}), g_{k+1} = reduce(g_k).
  Grid g_bar = std::move(z_bar[L]);
  for (int k = L - 1; k >= 0; --k) {
    const Grid& band_bar = z_bar[k];
    const Grid exp_bar = pyr::expand_adjoint(band_bar);
    for (size_t i = 0; i < g_bar.data.size(); ++i) g_bar.data[i] -= exp_bar.data[i];
    Grid next = pyr::reduce_adjoint(g_bar, pa.bands[k].rows, pa.bands[k].cols);
    for (size_t i = 0; i < next.data.size(); ++i) next.data[i] += band_bar.data[i];
    g_bar = std::move(next);
  }
  out.grad = std::move(g_bar);
  return out;
}

inline ValueGrad nlpd_value_grad(const Grid& a, const Grid& b) {
  return nlpd_value_grad(a, b, NlpdParams{});
}

inline Grid grad_nlpd(const Grid& a, const Grid& b, const NlpdParams& params) {
  return nlpd_value_grad(a, b, params).grad;
}

inline Grid grad_nlpd(const Grid& a, const Grid& b) {
  return nlpd_value_grad(a, b, NlpdParams{}).grad;
}

// Central differences on any scalar function of a grid.
template <typename F>
Grid finite_diff_grad(F&& f, const Grid& x, double step = 1e-5) {
  if (step <= 0.0) throw ParamError("finite_diff_grad: step must be positive");
  Grid g(x.rows, x.cols);
  Grid probe = x;
  for (size_t i = 0; i < probe.data.size(); ++i) {
    const double orig = probe.data[i];
    probe.data[i] = orig + step;
    const double fp = f(probe);
    probe.data[i] = orig - step;
    const double fm = f(probe);
    probe.data[i] = orig;
    g.data[i] = (fp - fm) / (2.0 * step);
  }
  return g;
}

enum class MetricKind { Mse, MsSsim, Nlpd };

// Kind-dispatched metric and gradient. MS-SSIM adapts its scale count to the
// grid so the same entry points work on small images.
inline double metric_value(MetricKind kind, const Grid& a, const Grid& b) {
  switch (kind) {
    case MetricKind::Mse:
      return mse(a, b);
    case MetricKind::MsSsim:
      return ms_ssim(a, b, MsSsimParams::for_size(a.rows, a.cols));
    case MetricKind::Nlpd:
      return nlpd(a, b);
  }
  throw ParamError("metric_value: unknown metric");
}

inline Grid metric_grad(MetricKind kind, const Grid& a, const Grid& b) {
  switch (kind) {
    case MetricKind::Mse:
      return grad_mse(a, b);
    case MetricKind::MsSsim:
      return grad_ms_ssim(a, b, MsSsimParams::for_size(a.rows, a.cols));
    case MetricKind::Nlpd:
      return grad_nlpd(a, b);
  }
  throw ParamError("metric_grad: unknown metric");
}

struct GradCheckStats {
  double max_rel = 0.0;
  double p99_rel = 0.0;
};

// Per-entry |analytic - numeric| scaled by the larger of the two gradients'
// max magnitudes; an absolute per-entry ratio would be dominated by
// finite-difference round-off wherever the true gradient crosses zero.
inline GradCheckStats grad_check(MetricKind kind, const Grid& a, const Grid& b,
                                 double step = 1e-5) {
  const Grid ga = metric_grad(kind, a, b);
  const Grid gf =
      finite_diff_grad([&](const Grid& x) { return metric_value(kind, x, b); }, a, step);
  const double denom = std::max(grid_max_abs(ga), grid_max_abs(gf));
  GradCheckStats stats;
  if (denom == 0.0) return stats;
  std::vector<double> rel(ga.data.size());
  for (size_t i = 0; i < rel.size(); ++i) {
    rel[i] = std::fabs(ga.data[i] - gf.data[i]) / denom;
  }
  std::sort(rel.begin(), rel.end());
  stats.max_rel = rel.back();
  size_t idx = static_cast<size_t>(0.99 * static_cast<double>(rel.size()));
  if (idx >= rel.size()) idx = rel.size() - 1;
  stats.p99_rel = rel[idx];
  return stats;
}

}  // namespace specpercept
