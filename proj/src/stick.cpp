#include "dptf/stick.hpp"

#include <cmath>

#include "dptf/distributions.hpp"

namespace dptf {

WeightLadder weights_from_states(std::span<const double> signal, const Link& link) {
  WeightLadder ladder;
  ladder.nu.resize(signal.size());
  double stick = 1.0;
  for (std::size_t h = 0; h < signal.size(); ++h) {
    if (!std::isfinite(signal[h])) throw std::domain_error("weights_from_states: non-finite state");
    const double g = link(signal[h]);
    ladder.nu[h] = g * stick;
    stick *= (1.0 - g);
  }
  ladder.remainder = stick;
  return ladder;
}

void sample_prior_column(const StateHyper& hyper, Rng& rng, std::span<double> state_out,
                         std::span<double> signal_out) {
  hyper.validate();
  const int horizon = static_cast<int>(state_out.size());
  const double sd_state = std::sqrt(hyper.var_state);
  const double sd_obs = std::sqrt(hyper.var_obs);
  state_out[0] = sample_normal(rng, hyper.stationary_mean(), std::sqrt(hyper.stationary_var()));
  for (int t = 1; t < horizon; ++t) {
    state_out[t] = hyper.mu + hyper.phi * state_out[t - 1] + sd_state * sample_normal(rng);
  }
  for (int t = 0; t < horizon; ++t) {
    signal_out[t] = state_out[t] + sd_obs * sample_normal(rng);
  }
}

StateTrajectory sample_prior_trajectory(const StateHyper& hyper, int horizon, int columns,
                                        Rng& rng) {
  if (horizon < 1 || columns < 1) {
    throw std::invalid_argument("sample_prior_trajectory: horizon and columns must be >= 1");
  }
  StateTrajectory traj(horizon, columns);
  for (int h = 0; h < columns; ++h) {
    sample_prior_column(hyper, rng, traj.mutable_state_column(h), traj.mutable_signal_column(h));
  }
  return traj;
}

int minimal_cover(std::span<const WeightLadder> ladders, double slice_min) {
  if (!(slice_min > 0.0 && slice_min <= 1.0)) {
    throw std::domain_error("minimal_cover: slice minimum must lie in (0, 1]");
  }
  int cover = 0;
  for (const auto& ladder : ladders) {
    double cumulative = 0.0;
    int needed = -1;
    for (std::size_t h = 0; h < ladder.nu.size(); ++h) {
      cumulative += ladder.nu[h];
      if (cumulative > 1.0 - slice_min) {
        needed = static_cast<int>(h) + 1;
        break;
      }
    }
    if (needed < 0) return -1;
    if (needed > cover) cover = needed;
  }
  return cover;
}

int truncation_level(StateTrajectory& traj, const StateHyper& hyper, const Link& link,
                     double slice_min, const std::function<Rng(int)>& make_column_rng) {
  if (!(slice_min > 0.0)) throw std::domain_error("truncation_level: slice minimum must be > 0");
  const int horizon = traj.horizon();
  std::vector<double> state_col(horizon), signal_col(horizon);
  for (;;) {
    std::vector<WeightLadder> ladders;
    ladders.reserve(horizon);
    for (int t = 0; t < horizon; ++t) {
      ladders.push_back(weights_from_states(traj.signal_row(t, traj.columns()), link));
    }
    const int cover = minimal_cover(ladders, slice_min);
    if (cover >= 0) return cover;
    Rng rng = make_column_rng(traj.columns());
    sample_prior_column(hyper, rng, state_col, signal_col);
    traj.append_column(state_col, signal_col);
  }
}

std::vector<std::vector<WeightLadder>> forecast_states(std::span<const double> last_states,
                                                       const StateHyper& hyper,
                                                       const Link& link, int horizon,
                                                       int num_draws, Rng& rng) {
  hyper.validate();
  if (horizon < 1 || num_draws < 1) {
    throw std::invalid_argument("forecast_states: horizon and draws must be >= 1");
  }
  const int cols = static_cast<int>(last_states.size());
  const double sd_state = std::sqrt(hyper.var_state);
  const double sd_obs = std::sqrt(hyper.var_obs);
  std::vector<std::vector<WeightLadder>> out(num_draws);
  std::vector<double> state(last_states.begin(), last_states.end());
  std::vector<double> signal(cols);
  for (int d = 0; d < num_draws; ++d) {
    state.assign(last_states.begin(), last_states.end());
    out[d].reserve(horizon);
    for (int step = 0; step < horizon; ++step) {
      for (int h = 0; h < cols; ++h) {
        state[h] = hyper.mu + hyper.phi * state[h] + sd_state * sample_normal(rng);
        signal[h] = state[h] + sd_obs * sample_normal(rng);
      }
      out[d].push_back(weights_from_states(signal, link));
    }
  }
  return out;
}

}  // namespace dptf
