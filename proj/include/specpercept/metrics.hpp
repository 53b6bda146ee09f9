#pragma once

#include "specpercept/grid.hpp"
#include "specpercept/nlpd.hpp"
#include "specpercept/ssim.hpp"

namespace specpercept {

inline double mse(const Grid& a, const Grid& b) {
  require_same_shape(a, b, "mse");
  double acc = 0.0;
  for (size_t i = 0; i < a.data.size(); ++i) {
    const double e = a.data[i] - b.data[i];
    acc += e * e;
  }
  return acc / static_cast<double>(a.data.size());
}

struct MetricReport {
  double mse = 0.0;
  double nlpd = 0.0;
  double ms_ssim = 0.0;
};

// The triple reported by the comparison tool and by fit summaries. MS-SSIM
// scale count adapts to the grid so small images still get a value.
inline MetricReport compare_grids(const Grid& a, const Grid& b) {
  MetricReport r;
  r.mse = specpercept::mse(a, b);
  r.nlpd = specpercept::nlpd(a, b);
  r.ms_ssim = specpercept::ms_ssim(a, b, MsSsimParams::for_size(a.rows, a.cols));
  return r;
}

}  // namespace specpercept
