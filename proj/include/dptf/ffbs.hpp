#pragma once
// Scalar linear-Gaussian state smoothing for one component column:
//   state_t = mu + phi * state_{t-1} + N(0, var_state),  stationary start
//   obs_t   = state_t + N(0, var_obs)
// Provides deterministic filter/smoother moments and the joint posterior
// trajectory draw (forward filter, backward sample).

#include <span>
#include <vector>

#include "dptf/rng.hpp"
#include "dptf/stick.hpp"

namespace dptf {

struct KalmanMoments {
  // one entry per time
  std::vector<double> pred_mean, pred_var;      // state_t | obs_{1..t-1}
  std::vector<double> filt_mean, filt_var;      // state_t | obs_{1..t}
  std::vector<double> smooth_mean, smooth_var;  // state_t | obs_{1..T}
};

KalmanMoments kalman_moments(std::span<const double> obs, const StateHyper& hyper);

// Joint draw of the state trajectory given all observations.
std::vector<double> ffbs_draw(std::span<const double> obs, const StateHyper& hyper, Rng& rng);

}  // namespace dptf
