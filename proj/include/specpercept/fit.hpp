#pragma once

#include <algorithm>
#include <cmath>
#include <random>
#include <string>
#include <vector>

#include "specpercept/common.hpp"
#include "specpercept/gradients.hpp"
#include "specpercept/grid.hpp"
#include "specpercept/metrics.hpp"

namespace specpercept {

enum class FitLoss { Mse, Nlpd, NegMsSsim };

struct FitConfig {
  FitLoss loss = FitLoss::Mse;
  int max_steps = 2000;
  double initial_step = 0.1;
  uint64_t seed = 0;
  double tolerance = 1e-6;

  void validate() const {
    if (max_steps < 1) throw ParamError("FitConfig: max_steps must be >= 1");
    if (!(initial_step > 0.0)) throw ParamError("FitConfig: initial_step must be positive");
    if (tolerance < 0.0) throw ParamError("FitConfig: tolerance must be >= 0");
  }
};

struct FitResult {
  Grid final;
  std::vector<double> loss_trajectory;  // accepted-step losses, starting value first
  int steps_taken = 0;
  bool converged = false;
};

namespace detail {

inline ValueGrad fit_loss_eval(FitLoss loss, const Grid& x, const Grid& target) {
  switch (loss) {
    case FitLoss::Mse:
      return mse_value_grad(x, target);
    case FitLoss::Nlpd:
      return nlpd_value_grad(x, target);
    case FitLoss::NegMsSsim: {
      ValueGrad vg = ms_ssim_value_grad(x, target, MsSsimParams::for_size(x.rows, x.cols));
      vg.value = -vg.value;
      for (double& g : vg.grad.data) g = -g;
      return vg;
    }
  }
  throw ParamError("fit: unknown loss");
}

inline double fit_loss_value(FitLoss loss, const Grid& x, const Grid& target) {
  switch (loss) {
    case FitLoss::Mse:
      return mse(x, target);
    case FitLoss::Nlpd:
      return nlpd(x, target);
    case FitLoss::NegMsSsim:
      return -ms_ssim(x, target, MsSsimParams::for_size(x.rows, x.cols));
  }
  throw ParamError("fit: unknown loss");
}

}  // namespace detail

// Projected gradient descent on [0,1] grids with a backtracking step size:
// eta halves whenever the trial point increases the loss, grows 1.2x after an
// accepted step, never drops below 1e-8. Stops on the step budget or after 10
// consecutive accepted steps improving by less than cfg.tolerance. start
// overrides the seeded Uniform[0,1] initializer when given.
inline FitResult fit_spectrogram(const Grid& target, const FitConfig& cfg,
                                 const Grid* start = nullptr) {
  cfg.validate();
  if (target.rows < 1 || target.cols < 1) throw ParamError("fit_spectrogram: empty target");
  for (double v : target.data) {
    if (!(v >= 0.0 && v <= 1.0)) {
      throw ParamError("fit_spectrogram: target values must lie in [0,1]");
    }
  }

  FitResult res;
  if (start) {
    require_same_shape(*start, target, "fit_spectrogram");
    for (double v : start->data) {
      if (!(v >= 0.0 && v <= 1.0)) {
        throw ParamError("fit_spectrogram: start values must lie in [0,1]");
      }
    }
    res.final = *start;
  } else {
    res.final = random_grid(target.rows, target.cols, cfg.seed);
  }

  Grid& x = res.final;
  ValueGrad cur = detail::fit_loss_eval(cfg.loss, x, target);
  if (!std::isfinite(cur.value) || !grid_all_finite(cur.grad)) {
    throw Error("fit_spectrogram: non-finite loss or gradient at step 0");
  }
  res.loss_trajectory.push_back(cur.value);

  constexpr double kEtaFloor = 1e-8;
  constexpr double kZeroGrad = 1e-12;
  constexpr int kQuietSteps = 10;

  if (grid_max_abs(cur.grad) <= kZeroGrad) {
    res.converged = true;
    return res;
  }

  double eta = cfg.initial_step;
  int quiet = 0;
  Grid cand(x.rows, x.cols);
  while (res.steps_taken < cfg.max_steps) {
    // Backtrack with the current gradient until the loss stops increasing.
    bool accepted = false;
    double cand_value = 0.0;
    while (true) {
      for (size_t i = 0; i < x.data.size(); ++i) {
        cand.data[i] = std::clamp(x.data[i] - eta * cur.grad.data[i], 0.0, 1.0);
      }
      cand_value = detail::fit_loss_value(cfg.loss, cand, target);
      if (!std::isfinite(cand_value)) {
        throw Error("fit_spectrogram: non-finite loss at step " +
                    std::to_string(res.steps_taken + 1));
      }
      if (cand_value <= cur.value) {
        accepted = true;
        break;
      }
      if (eta <= kEtaFloor) break;
      eta = std::max(eta * 0.5, kEtaFloor);
    }
    if (!accepted) {
      // No descent even at the minimum step: nothing left to gain.
      res.converged = true;
      break;
    }

    const double improvement = cur.value - cand_value;
    x.data.swap(cand.data);
    ++res.steps_taken;
    res.loss_trajectory.push_back(cand_value);
    eta *= 1.2;

    cur = detail::fit_loss_eval(cfg.loss, x, target);
    cur.value = cand_value;  // identical input; keep the recorded value
    if (!grid_all_finite(cur.grad)) {
      throw Error("fit_spectrogram: non-finite gradient at step " +
                  std::to_string(res.steps_taken));
    }

    quiet = (improvement < cfg.tolerance) ? quiet + 1 : 0;
    if (quiet >= kQuietSteps) {
      res.converged = true;
      break;
    }
    if (grid_max_abs(cur.grad) <= kZeroGrad) {
      res.converged = true;
      break;
    }
  }
  return res;
}

// All three metrics between the fitted grid and its target; same values the
// pair-comparison tool reports.
inline MetricReport fit_report(const FitResult& result, const Grid& target) {
  return compare_grids(result.final, target);
}

}  // namespace specpercept
