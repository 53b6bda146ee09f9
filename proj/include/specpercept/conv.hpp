#pragma once

#include <cmath>
#include <vector>

#include "specpercept/common.hpp"
#include "specpercept/grid.hpp"

namespace specpercept {
namespace conv {

// Half-sample symmetric index: ... 1 0 | 0 1 ... n-1 | n-1 n-2 ...
// Handles kernels wider than the grid by repeated folding.
inline int mirror(int i, int n) {
  if (n == 1) return 0;
  const int period = 2 * n;
  i %= period;
  if (i < 0) i += period;
  return i < n ? i : period - 1 - i;
}

// 1-D correlation along the width with symmetric extension; kernel length odd.
inline Grid sym_conv_h(const Grid& x, const std::vector<double>& k) {
  const int half = static_cast<int>(k.size()) / 2;
  Grid y(x.rows, x.cols);
  for (int r = 0; r < x.rows; ++r) {
    for (int c = 0; c < x.cols; ++c) {
      double acc = 0.0;
      for (int j = 0; j < static_cast<int>(k.size()); ++j) {
        acc += k[j] * x(r, mirror(c + j - half, x.cols));
      }
      y(r, c) = acc;
    }
  }
  return y;
}

inline Grid sym_conv_v(const Grid& x, const std::vector<double>& k) {
  const int half = static_cast<int>(k.size()) / 2;
  Grid y(x.rows, x.cols);
  for (int c = 0; c < x.cols; ++c) {
    for (int r = 0; r < x.rows; ++r) {
      double acc = 0.0;
      for (int j = 0; j < static_cast<int>(k.size()); ++j) {
        acc += k[j] * x(mirror(r + j - half, x.rows), c);
      }
      y(r, c) = acc;
    }
  }
  return y;
}

inline Grid sym_conv_sep(const Grid& x, const std::vector<double>& k) {
  return sym_conv_h(sym_conv_v(x, k), k);
}

// Exact transposes of the above: scatter each output's contribution back to
// the mirrored source cell. Needed because symmetric extension folds boundary
// weights inward, so the adjoint is not a plain flipped-kernel convolution.
inline Grid sym_conv_h_adjoint(const Grid& ybar, const std::vector<double>& k) {
  const int half = static_cast<int>(k.size()) / 2;
  Grid x(ybar.rows, ybar.cols);
  for (int r = 0; r < ybar.rows; ++r) {
    for (int c = 0; c < ybar.cols; ++c) {
      const double g = ybar(r, c);
      for (int j = 0; j < static_cast<int>(k.size()); ++j) {
        x(r, mirror(c + j - half, ybar.cols)) += k[j] * g;
      }
    }
  }
  return x;
}

inline Grid sym_conv_v_adjoint(const Grid& ybar, const std::vector<double>& k) {
  const int half = static_cast<int>(k.size()) / 2;
  Grid x(ybar.rows, ybar.cols);
  for (int c = 0; c < ybar.cols; ++c) {
    for (int r = 0; r < ybar.rows; ++r) {
      const double g = ybar(r, c);
      for (int j = 0; j < static_cast<int>(k.size()); ++j) {
        x(mirror(r + j - half, ybar.rows), c) += k[j] * g;
      }
    }
  }
  return x;
}

inline Grid sym_conv_sep_adjoint(const Grid& ybar, const std::vector<double>& k) {
  return sym_conv_v_adjoint(sym_conv_h_adjoint(ybar, k), k);
}

// Dense 2-D kernel, symmetric extension. Kernel dims odd.
inline Grid sym_conv_2d(const Grid& x, const Grid& kernel) {
  const int hr = kernel.rows / 2, hc = kernel.cols / 2;
  Grid y(x.rows, x.cols);
  for (int r = 0; r < x.rows; ++r) {
    for (int c = 0; c < x.cols; ++c) {
      double acc = 0.0;
      for (int i = 0; i < kernel.rows; ++i) {
        const int rr = mirror(r + i - hr, x.rows);
        for (int j = 0; j < kernel.cols; ++j) {
          acc += kernel(i, j) * x(rr, mirror(c + j - hc, x.cols));
        }
      }
      y(r, c) = acc;
    }
  }
  return y;
}

inline Grid sym_conv_2d_adjoint(const Grid& ybar, const Grid& kernel) {
  const int hr = kernel.rows / 2, hc = kernel.cols / 2;
  Grid x(ybar.rows, ybar.cols);
  for (int r = 0; r < ybar.rows; ++r) {
    for (int c = 0; c < ybar.cols; ++c) {
      const double g = ybar(r, c);
      for (int i = 0; i < kernel.rows; ++i) {
        const int rr = mirror(r + i - hr, ybar.rows);
        for (int j = 0; j < kernel.cols; ++j) {
          x(rr, mirror(c + j - hc, ybar.cols)) += kernel(i, j) * g;
        }
      }
    }
  }
  return x;
}

// Valid-mode separable correlation (no padding); output shrinks by klen-1 per
// axis. Used for the Gaussian moment maps in SSIM.
inline Grid valid_corr_h(const Grid& x, const std::vector<double>& k) {
  const int klen = static_cast<int>(k.size());
  Grid y(x.rows, x.cols - klen + 1);
  for (int r = 0; r < y.rows; ++r) {
    for (int c = 0; c < y.cols; ++c) {
      double acc = 0.0;
      for (int j = 0; j < klen; ++j) acc += k[j] * x(r, c + j);
      y(r, c) = acc;
    }
  }
  return y;
}

inline Grid valid_corr_v(const Grid& x, const std::vector<double>& k) {
  const int klen = static_cast<int>(k.size());
  Grid y(x.rows - klen + 1, x.cols);
  for (int c = 0; c < y.cols; ++c) {
    for (int r = 0; r < y.rows; ++r) {
      double acc = 0.0;
      for (int j = 0; j < klen; ++j) acc += k[j] * x(r + j, c);
      y(r, c) = acc;
    }
  }
  return y;
}

inline Grid valid_corr_sep(const Grid& x, const std::vector<double>& k) {
  return valid_corr_h(valid_corr_v(x, k), k);
}

// Adjoint of valid-mode correlation: zero-padded scatter back to full size.
inline Grid valid_corr_sep_adjoint(const Grid& ybar, const std::vector<double>& k, int rows,
                                   int cols) {
  const int klen = static_cast<int>(k.size());
  Grid mid(rows, ybar.cols);
  for (int c = 0; c < ybar.cols; ++c) {
    for (int r = 0; r < ybar.rows; ++r) {
      const double g = ybar(r, c);
      for (int j = 0; j < klen; ++j) mid(r + j, c) += k[j] * g;
    }
  }
  Grid x(rows, cols);
  for (int r = 0; r < rows; ++r) {
    for (int c = 0; c < ybar.cols; ++c) {
      const double g = mid(r, c);
      for (int j = 0; j < klen; ++j) x(r, c + j) += k[j] * g;
    }
  }
  return x;
}

// Non-overlapping 2x2 mean pooling; trailing odd row/column dropped.
inline Grid mean_pool2(const Grid& x) {
  Grid y(x.rows / 2, x.cols / 2);
  for (int r = 0; r < y.rows; ++r) {
    for (int c = 0; c < y.cols; ++c) {
      y(r, c) =
          0.25 * (x(2 * r, 2 * c) + x(2 * r, 2 * c + 1) + x(2 * r + 1, 2 * c) +
                  x(2 * r + 1, 2 * c + 1));
    }
  }
  return y;
}

// Adjoint of mean_pool2 into a rows x cols grid; cells the pool never read
// (odd remainders) get zero gradient.
inline Grid mean_pool2_adjoint(const Grid& ybar, int rows, int cols) {
  Grid x(rows, cols);
  for (int r = 0; r < ybar.rows; ++r) {
    for (int c = 0; c < ybar.cols; ++c) {
      const double g = 0.25 * ybar(r, c);
      x(2 * r, 2 * c) += g;
      x(2 * r, 2 * c + 1) += g;
      x(2 * r + 1, 2 * c) += g;
      x(2 * r + 1, 2 * c + 1) += g;
    }
  }
  return x;
}

// Normalized 1-D Gaussian, length odd.
inline std::vector<double> gaussian_kernel(int length, double sigma) {
  std::vector<double> k(length);
  const double mid = (length - 1) / 2.0;
  double sum = 0.0;
  for (int i = 0; i < length; ++i) {
    const double d = (i - mid) / sigma;
    k[i] = std::exp(-0.5 * d * d);
    sum += k[i];
  }
  for (double& v : k) v /= sum;
  return k;
}

}  // namespace conv
}  // namespace specpercept
