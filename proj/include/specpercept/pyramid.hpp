#pragma once

#include <vector>

#include "specpercept/common.hpp"
#include "specpercept/conv.hpp"
#include "specpercept/grid.hpp"

namespace specpercept {

// Band-pass levels (finest first) plus the low-pass residual. Level k has
// dimensions ceil(h/2^k) x ceil(w/2^k); collapse reconstructs the input
// exactly because each band stores the residual of its own expand.
struct LaplacianPyramid {
  std::vector<Grid> bands;
  Grid lowpass;

  int stages() const { return static_cast<int>(bands.size()) + 1; }
};

namespace pyr {

// Burt-Adelson 5-tap kernel (a = 0.4).
inline const std::vector<double>& kernel5() {
  static const std::vector<double> k = {0.05, 0.25, 0.4, 0.25, 0.05};
  return k;
}

inline const std::vector<double>& kernel5x2() {
  static const std::vector<double> k = {0.1, 0.5, 0.8, 0.5, 0.1};
  return k;
}

// Blur then keep even indices; output ceil(n/2) per axis.
inline Grid reduce(const Grid& g) {
  const Grid blurred = conv::sym_conv_sep(g, kernel5());
  Grid out((g.rows + 1) / 2, (g.cols + 1) / 2);
  for (int r = 0; r < out.rows; ++r)
    for (int c = 0; c < out.cols; ++c) out(r, c) = blurred(2 * r, 2 * c);
  return out;
}

// Polyphase upsample to (rows, cols) with the doubled kernel. Out-of-range
// source indices mirror in the coarse domain, where the samples live; both
// tap-parity sums equal 1, so constants survive exactly, borders included.
inline Grid expand(const Grid& small, int rows, int cols) {
  const auto& k = kernel5x2();
  Grid mid(rows, small.cols);
  for (int x = 0; x < rows; ++x) {
    for (int j = x & 1; j < 5; j += 2) {
      const int t = conv::mirror((x - j + 2) / 2, small.rows);
      for (int c = 0; c < small.cols; ++c) mid(x, c) += k[j] * small(t, c);
    }
  }
  Grid out(rows, cols);
  for (int x = 0; x < cols; ++x) {
    for (int j = x & 1; j < 5; j += 2) {
      const int t = conv::mirror((x - j + 2) / 2, small.cols);
      for (int r = 0; r < rows; ++r) out(r, x) += k[j] * mid(r, t);
    }
  }
  return out;
}

inline Grid reduce_adjoint(const Grid& ybar, int rows, int cols) {
  Grid stuffed(rows, cols);
  for (int r = 0; r < ybar.rows; ++r)
    for (int c = 0; c < ybar.cols; ++c) stuffed(2 * r, 2 * c) = ybar(r, c);
  return conv::sym_conv_sep_adjoint(stuffed, kernel5());
}

// Exact transpose of expand: the same (output, tap, source) triples, scattered
// instead of gathered.
inline Grid expand_adjoint(const Grid& ybar) {
  const auto& k = kernel5x2();
  const int rows = (ybar.rows + 1) / 2;
  const int cols = (ybar.cols + 1) / 2;
  Grid mid(ybar.rows, cols);
  for (int x = 0; x < ybar.cols; ++x) {
    for (int j = x & 1; j < 5; j += 2) {
      const int t = conv::mirror((x - j + 2) / 2, cols);
      for (int r = 0; r < ybar.rows; ++r) mid(r, t) += k[j] * ybar(r, x);
    }
  }
  Grid out(rows, cols);
  for (int x = 0; x < ybar.rows; ++x) {
    for (int j = x & 1; j < 5; j += 2) {
      const int t = conv::mirror((x - j + 2) / 2, rows);
      for (int c = 0; c < cols; ++c) out(t, c) += k[j] * mid(x, c);
    }
  }
  return out;
}

inline void check_levels(const Grid& x, int levels) {
  if (levels < 1) throw ParamError("build_pyramid: levels must be >= 1");
  const int m = std::min(x.rows, x.cols);
  if ((m >> levels) < 1) {
    throw ParamError("build_pyramid: " + std::to_string(levels) + " levels too many for " +
                     std::to_string(x.rows) + "x" + std::to_string(x.cols) + " input");
  }
}

}  // namespace pyr

inline LaplacianPyramid build_pyramid(const Grid& x, int levels) {
  pyr::check_levels(x, levels);
  LaplacianPyramid p;
  Grid g = x;
  for (int k = 0; k < levels; ++k) {
    Grid next = pyr::reduce(g);
    Grid up = pyr::expand(next, g.rows, g.cols);
    Grid band(g.rows, g.cols);
    for (size_t i = 0; i < band.data.size(); ++i) band.data[i] = g.data[i] - up.data[i];
    p.bands.push_back(std::move(band));
    g = std::move(next);
  }
  p.lowpass = std::move(g);
  return p;
}

inline Grid collapse_pyramid(const LaplacianPyramid& p) {
  Grid g = p.lowpass;
  for (int k = static_cast<int>(p.bands.size()) - 1; k >= 0; --k) {
    const Grid& band = p.bands[k];
    if ((band.rows + 1) / 2 != g.rows || (band.cols + 1) / 2 != g.cols) {
      throw DimensionError("collapse_pyramid: inconsistent level dimensions");
    }
    Grid up = pyr::expand(g, band.rows, band.cols);
    Grid next(band.rows, band.cols);
    for (size_t i = 0; i < next.data.size(); ++i) next.data[i] = band.data[i] + up.data[i];
    g = std::move(next);
  }
  return g;
}

}  // namespace specpercept
