#pragma once

#include <cmath>
#include <vector>

#include "specpercept/common.hpp"
#include "specpercept/conv.hpp"
#include "specpercept/grid.hpp"
#include "specpercept/pyramid.hpp"

namespace specpercept {

// Divisive-normalization parameters: one sigma and one local filter per
// pyramid stage (levels band-pass stages plus the low-pass). The defaults
// are a fixed sensible choice, not a fit to natural-signal statistics; every
// metric axiom holds for any valid values.
struct NlpdParams {
  int levels = 5;
  std::vector<double> sigmas;
  std::vector<Grid> norm_filters;
  double exponent = 2.0;

  NlpdParams() { reset_defaults(); }

  // sigma = 0.17 per stage; filter = 5x5 outer product of the Burt-Adelson
  // kernel with the center weight zeroed, renormalized to sum 1.
  void reset_defaults() {
    sigmas.assign(levels + 1, 0.17);
    const auto& k = pyr::kernel5();
    Grid f(5, 5);
    double sum = 0.0;
    for (int i = 0; i < 5; ++i)
      for (int j = 0; j < 5; ++j) {
        f(i, j) = k[i] * k[j];
        sum += f(i, j);
      }
    sum -= f(2, 2);
    f(2, 2) = 0.0;
    for (double& v : f.data) v /= sum;
    norm_filters.assign(levels + 1, f);
  }

  void validate() const {
    if (levels < 1) throw ParamError("NlpdParams: levels must be >= 1");
    if (exponent <= 0.0) throw ParamError("NlpdParams: exponent must be positive");
    if (static_cast<int>(sigmas.size()) != levels + 1 ||
        static_cast<int>(norm_filters.size()) != levels + 1) {
      throw ParamError("NlpdParams: need exactly levels+1 sigmas and filters");
    }
    for (double s : sigmas)
      if (s <= 0.0) throw ParamError("NlpdParams: sigmas must be positive");
    for (const Grid& f : norm_filters) {
      if (f.rows % 2 == 0 || f.cols % 2 == 0) {
        throw ParamError("NlpdParams: filter dims must be odd");
      }
      for (double v : f.data)
        if (v < 0.0) throw ParamError("NlpdParams: filter entries must be >= 0");
    }
  }
};

// y = z / (sigma_k + F_k * |z|) at every stage, symmetric boundary extension.
inline LaplacianPyramid divisive_normalize(const LaplacianPyramid& p, const NlpdParams& params) {
  params.validate();
  if (static_cast<int>(p.bands.size()) != params.levels) {
    throw ParamError("divisive_normalize: pyramid has " + std::to_string(p.bands.size()) +
                     " bands, params expect " + std::to_string(params.levels));
  }
  auto normalize_stage = [](const Grid& z, double sigma, const Grid& filter) {
    Grid absz(z.rows, z.cols);
    for (size_t i = 0; i < z.data.size(); ++i) absz.data[i] = std::fabs(z.data[i]);
    const Grid local = conv::sym_conv_2d(absz, filter);
    Grid y(z.rows, z.cols);
    for (size_t i = 0; i < z.data.size(); ++i) {
      y.data[i] = z.data[i] / (sigma + local.data[i]);
    }
    return y;
  };

  LaplacianPyramid out;
  for (int k = 0; k < params.levels; ++k) {
    out.bands.push_back(normalize_stage(p.bands[k], params.sigmas[k], params.norm_filters[k]));
  }
  out.lowpass =
      normalize_stage(p.lowpass, params.sigmas[params.levels], params.norm_filters[params.levels]);
  return out;
}

namespace detail {

// Per-stage p-norm average: (mean |e|^p)^(1/p); p = 2 gives RMSE.
inline double stage_norm(const Grid& ya, const Grid& yb, double p) {
  double acc = 0.0;
  if (p == 2.0) {
    for (size_t i = 0; i < ya.data.size(); ++i) {
      const double e = ya.data[i] - yb.data[i];
      acc += e * e;
    }
    return std::sqrt(acc / static_cast<double>(ya.data.size()));
  }
  for (size_t i = 0; i < ya.data.size(); ++i) {
    acc += std::pow(std::fabs(ya.data[i] - yb.data[i]), p);
  }
  return std::pow(acc / static_cast<double>(ya.data.size()), 1.0 / p);
}

}  // namespace detail

// Normalized Laplacian Pyramid Distance: both inputs go through the same
// pyramid + divisive normalization; the result is the mean over the levels+1
// stages of the per-stage RMS difference.
inline double nlpd(const Grid& a, const Grid& b, const NlpdParams& params) {
  require_same_shape(a, b, "nlpd");
  const LaplacianPyramid ya = divisive_normalize(build_pyramid(a, params.levels), params);
  const LaplacianPyramid yb = divisive_normalize(build_pyramid(b, params.levels), params);
  double acc = 0.0;
  for (int k = 0; k < params.levels; ++k) {
    acc += detail::stage_norm(ya.bands[k], yb.bands[k], params.exponent);
  }
  acc += detail::stage_norm(ya.lowpass, yb.lowpass, params.exponent);
  return acc / static_cast<double>(params.levels + 1);
}

inline double nlpd(const Grid& a, const Grid& b) { return nlpd(a, b, NlpdParams{}); }

}  // namespace specpercept
