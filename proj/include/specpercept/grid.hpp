#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "specpercept/common.hpp"

namespace specpercept {

// Dense row-major 2-D array of doubles. Row 0 is the lowest mel band when the
// grid holds a spectrogram; plain matrix otherwise.
struct Grid {
  int rows = 0;
  int cols = 0;
  std::vector<double> data;

  Grid() = default;
  Grid(int r, int c, double fill = 0.0)
      : rows(r), cols(c), data(static_cast<size_t>(r) * static_cast<size_t>(c), fill) {}

  double& operator()(int r, int c) { return data[static_cast<size_t>(r) * cols + c]; }
  double operator()(int r, int c) const { return data[static_cast<size_t>(r) * cols + c]; }

  size_t size() const { return data.size(); }
  bool same_shape(const Grid& o) const { return rows == o.rows && cols == o.cols; }
};

inline void require_same_shape(const Grid& a, const Grid& b, const char* where) {
  if (!a.same_shape(b)) {
    throw DimensionError(std::string(where) + ": shape mismatch " + std::to_string(a.rows) +
                         "x" + std::to_string(a.cols) + " vs " + std::to_string(b.rows) + "x" +
                         std::to_string(b.cols));
  }
}

inline double grid_min(const Grid& g) {
  double m = g.data.empty() ? 0.0 : g.data[0];
  for (double v : g.data) m = std::min(m, v);
  return m;
}

inline double grid_max(const Grid& g) {
  double m = g.data.empty() ? 0.0 : g.data[0];
  for (double v : g.data) m = std::max(m, v);
  return m;
}

inline double grid_max_abs(const Grid& g) {
  double m = 0.0;
  for (double v : g.data) m = std::max(m, std::fabs(v));
  return m;
}

inline double grid_mean(const Grid& g) {
  double s = 0.0;
  for (double v : g.data) s += v;
  return g.data.empty() ? 0.0 : s / static_cast<double>(g.data.size());
}

inline bool grid_all_finite(const Grid& g) {
  for (double v : g.data)
    if (!std::isfinite(v)) return false;
  return true;
}

// Canonical double in [0,1) from the top 53 bits of a 64-bit draw. Pinned
// here instead of uniform_real_distribution so streams are identical across
// standard libraries.
inline double uniform01(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

inline Grid random_grid(int rows, int cols, std::mt19937_64& rng, double lo = 0.0,
                        double hi = 1.0) {
  Grid g(rows, cols);
  for (double& v : g.data) v = lo + (hi - lo) * uniform01(rng);
  return g;
}

inline Grid random_grid(int rows, int cols, uint64_t seed, double lo = 0.0, double hi = 1.0) {
  std::mt19937_64 rng(seed);
  return random_grid(rows, cols, rng, lo, hi);
}

}  // namespace specpercept
