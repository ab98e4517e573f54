#pragma once
// Dynamic stick-breaking machinery: AR(1) state columns observed with
// noise, the ladder construction nu_h = g(W_h) * prod_{l<h} (1 - g(W_l)),
// slice-driven truncation, and forward simulation for forecasting.

#include <functional>
#include <span>
#include <stdexcept>
#include <vector>

#include "dptf/link.hpp"
#include "dptf/rng.hpp"

namespace dptf {

struct StateHyper {
  double mu = 0.0;
  double phi = 0.0;        // autocorrelation, strictly inside (-1, 1)
  double var_obs = 1.0;    // noise variance of W around the state
  double var_state = 1.0;  // innovation variance of the state recursion

  void validate() const {
    if (!(std::fabs(phi) < 1.0)) throw std::domain_error("state hyper: |phi| must be < 1");
    if (!(var_obs > 0.0) || !(var_state > 0.0)) {
      throw std::domain_error("state hyper: variances must be positive");
    }
  }

  double stationary_mean() const { return mu / (1.0 - phi); }
  double stationary_var() const { return var_state / (1.0 - phi * phi); }
  // marginal variance of W
  double signal_var() const { return stationary_var() + var_obs; }
};

struct WeightLadder {
  std::vector<double> nu;
  double remainder = 1.0;
};

WeightLadder weights_from_states(std::span<const double> signal, const Link& link);

// Latent states and their noisy observations, one column per mixture
// component, stored column-major so columns can be appended in place.
class StateTrajectory {
 public:
  StateTrajectory(int horizon, int columns)
      : horizon_(horizon), columns_(columns),
        state_(static_cast<std::size_t>(horizon) * columns, 0.0),
        signal_(static_cast<std::size_t>(horizon) * columns, 0.0) {
    if (horizon < 1 || columns < 0) throw std::invalid_argument("trajectory: bad shape");
  }

  int horizon() const { return horizon_; }
  int columns() const { return columns_; }

  double state(int t, int h) const { return state_[idx(t, h)]; }
  double signal(int t, int h) const { return signal_[idx(t, h)]; }
  double& state(int t, int h) { return state_[idx(t, h)]; }
  double& signal(int t, int h) { return signal_[idx(t, h)]; }

  std::span<const double> state_column(int h) const {
    return {state_.data() + static_cast<std::size_t>(h) * horizon_,
            static_cast<std::size_t>(horizon_)};
  }
  std::span<const double> signal_column(int h) const {
    return {signal_.data() + static_cast<std::size_t>(h) * horizon_,
            static_cast<std::size_t>(horizon_)};
  }
  std::span<double> mutable_state_column(int h) {
    return {state_.data() + static_cast<std::size_t>(h) * horizon_,
            static_cast<std::size_t>(horizon_)};
  }
  std::span<double> mutable_signal_column(int h) {
    return {signal_.data() + static_cast<std::size_t>(h) * horizon_,
            static_cast<std::size_t>(horizon_)};
  }

  // row of W at time t across the first `count` columns
  std::vector<double> signal_row(int t, int count) const {
    std::vector<double> row(count);
    for (int h = 0; h < count; ++h) row[h] = signal(t, h);
    return row;
  }

  void append_column(std::span<const double> state_col, std::span<const double> signal_col) {
    if (static_cast<int>(state_col.size()) != horizon_ ||
        static_cast<int>(signal_col.size()) != horizon_) {
      throw std::invalid_argument("trajectory: column length mismatch");
    }
    state_.insert(state_.end(), state_col.begin(), state_col.end());
    signal_.insert(signal_.end(), signal_col.begin(), signal_col.end());
    ++columns_;
  }

 private:
  std::size_t idx(int t, int h) const {
    return static_cast<std::size_t>(h) * horizon_ + t;
  }

  int horizon_ = 0;
  int columns_ = 0;
  std::vector<double> state_;
  std::vector<double> signal_;
};

// Fresh column under the stationary law, propagated through the recursion.
void sample_prior_column(const StateHyper& hyper, Rng& rng,
                         std::span<double> state_out, std::span<double> signal_out);

StateTrajectory sample_prior_trajectory(const StateHyper& hyper, int horizon, int columns,
                                        Rng& rng);

// Smallest prefix length covering every time's ladder past 1 - slice_min,
// or -1 if the given ladders are too short.
int minimal_cover(std::span<const WeightLadder> ladders, double slice_min);

// Extends the trajectory until the cover exists; new columns draw their
// generator from make_column_rng(absolute column index). Returns the cover.
int truncation_level(StateTrajectory& traj, const StateHyper& hyper, const Link& link,
                     double slice_min, const std::function<Rng(int)>& make_column_rng);

// Forward simulation of the columns' states past the fitted horizon; one
// ladder per (draw, step) over the provided columns only.
std::vector<std::vector<WeightLadder>> forecast_states(std::span<const double> last_states,
                                                       const StateHyper& hyper,
                                                       const Link& link, int horizon,
                                                       int num_draws, Rng& rng);

}  // namespace dptf
