#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "specpercept/common.hpp"
#include "specpercept/grid.hpp"

namespace specpercept {

struct QuantizerSpec {
  std::vector<double> centers = {-1.0, 1.0};
  double s = 10.0;  // sharpness

  void validate() const {
    if (centers.size() < 2) throw ParamError("QuantizerSpec: need at least two centers");
    for (size_t j = 1; j < centers.size(); ++j) {
      if (!(centers[j] > centers[j - 1])) {
        throw ParamError("QuantizerSpec: centers must be strictly increasing");
      }
    }
    if (!(s > 0.0)) throw ParamError("QuantizerSpec: sharpness must be positive");
  }
};

// Soft assignment: softmax over -s*(z - c_j)^2 weighting the centers. The max
// exponent is subtracted first; the naive form underflows to 0/0 once
// s*(z - c)^2 exceeds ~745 (for the two-center default that is |z| ~ 7.6).
inline double soft_quantize(double z, const QuantizerSpec& spec) {
  spec.validate();
  double emax = -HUGE_VAL;
  for (double c : spec.centers) {
    const double d = z - c;
    emax = std::max(emax, -spec.s * d * d);
  }
  double wsum = 0.0, acc = 0.0;
  for (double c : spec.centers) {
    const double d = z - c;
    const double w = std::exp(-spec.s * d * d - emax);
    wsum += w;
    acc += w * c;
  }
  return acc / wsum;
}

inline Grid soft_quantize(const Grid& z, const QuantizerSpec& spec) {
  spec.validate();
  Grid out(z.rows, z.cols);
  for (size_t i = 0; i < z.data.size(); ++i) out.data[i] = soft_quantize(z.data[i], spec);
  return out;
}

// Nearest center; exact midpoints round to the lower center.
inline double hard_quantize(double z, const QuantizerSpec& spec) {
  spec.validate();
  double best = spec.centers[0];
  double best_d = std::fabs(z - best);
  for (size_t j = 1; j < spec.centers.size(); ++j) {
    const double d = std::fabs(z - spec.centers[j]);
    if (d < best_d) {
      best_d = d;
      best = spec.centers[j];
    }
  }
  return best;
}

inline Grid hard_quantize(const Grid& z, const QuantizerSpec& spec) {
  spec.validate();
  Grid out(z.rows, z.cols);
  for (size_t i = 0; i < z.data.size(); ++i) out.data[i] = hard_quantize(z.data[i], spec);
  return out;
}

// Latent-shape accounting for the entropy cap.
struct EntropyInputs {
  int width = 256;
  int height = 256;
  int layers = 4;    // downsampling stages, spatial shrink 2^layers per side
  int channels = 128;
  int num_centers = 2;

  void validate() const {
    if (width < 1 || height < 1) throw ParamError("EntropyInputs: width/height must be positive");
    if (layers < 0 || layers > 30) throw ParamError("EntropyInputs: layers must be in [0, 30]");
    if (channels < 1) throw ParamError("EntropyInputs: channels must be positive");
    if (num_centers < 2) throw ParamError("EntropyInputs: need at least two centers");
    const int f = 1 << layers;
    if (width % f != 0 || height % f != 0) {
      throw ParamError("EntropyInputs: width and height must be divisible by 2^layers (" +
                       std::to_string(f) + ")");
    }
  }
};

// (W*H)/(2^n * 2^n) * m * log2(L) bits: every latent element at full entropy.
inline double entropy_bound(const EntropyInputs& inp) {
  inp.validate();
  const long long spatial =
      static_cast<long long>(inp.width >> inp.layers) * (inp.height >> inp.layers);
  return static_cast<double>(spatial) * inp.channels * std::log2(static_cast<double>(inp.num_centers));
}

inline double bits_per_pixel(double bound_bits, int width, int height) {
  if (width < 1 || height < 1) throw ParamError("bits_per_pixel: width/height must be positive");
  return bound_bits / (static_cast<double>(width) * height);
}

inline double compression_ratio(double bpp, double source_bpp = 24.0) {
  if (bpp <= 0.0) throw ParamError("compression_ratio: bpp must be positive");
  return source_bpp / bpp;
}

// Plug-in Shannon entropy of the empirical center distribution, times the
// element count. Values must sit exactly on centers (hard_quantize output
// does); anything else is an error, not a nearest-center guess.
inline double empirical_entropy(const Grid& latent, const QuantizerSpec& spec) {
  spec.validate();
  std::vector<long long> counts(spec.centers.size(), 0);
  for (double v : latent.data) {
    bool found = false;
    for (size_t j = 0; j < spec.centers.size(); ++j) {
      if (v == spec.centers[j]) {
        ++counts[j];
        found = true;
        break;
      }
    }
    if (!found) {
      throw ParamError("empirical_entropy: value " + std::to_string(v) +
                       " is not one of the centers");
    }
  }
  const double n = static_cast<double>(latent.data.size());
  if (n == 0.0) return 0.0;
  double h = 0.0;
  for (long long c : counts) {
    if (c > 0) {
      const double p = static_cast<double>(c) / n;
      h -= p * std::log2(p);
    }
  }
  return h * n;
}

}  // namespace specpercept
