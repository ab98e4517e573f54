#include "dptf/ffbs.hpp"

#include <cmath>
#include <stdexcept>

#include "dptf/distributions.hpp"

namespace dptf {

KalmanMoments kalman_moments(std::span<const double> obs, const StateHyper& hyper) {
  hyper.validate();
  const int T = static_cast<int>(obs.size());
  if (T < 1) throw std::invalid_argument("kalman_moments: empty observation column");

  KalmanMoments m;
  m.pred_mean.resize(T);
  m.pred_var.resize(T);
  m.filt_mean.resize(T);
  m.filt_var.resize(T);
  m.smooth_mean.resize(T);
  m.smooth_var.resize(T);

  double a = hyper.stationary_mean();
  double p = hyper.stationary_var();
  for (int t = 0; t < T; ++t) {
    m.pred_mean[t] = a;
    m.pred_var[t] = p;
    const double gain = p / (p + hyper.var_obs);
    m.filt_mean[t] = a + gain * (obs[t] - a);
    m.filt_var[t] = p * hyper.var_obs / (p + hyper.var_obs);
    a = hyper.mu + hyper.phi * m.filt_mean[t];
    p = hyper.phi * hyper.phi * m.filt_var[t] + hyper.var_state;
  }

  m.smooth_mean[T - 1] = m.filt_mean[T - 1];
  m.smooth_var[T - 1] = m.filt_var[T - 1];
  for (int t = T - 2; t >= 0; --t) {
    const double gain = hyper.phi * m.filt_var[t] / m.pred_var[t + 1];
    m.smooth_mean[t] = m.filt_mean[t] + gain * (m.smooth_mean[t + 1] - m.pred_mean[t + 1]);
    m.smooth_var[t] = m.filt_var[t] + gain * gain * (m.smooth_var[t + 1] - m.pred_var[t + 1]);
  }
  return m;
}

std::vector<double> ffbs_draw(std::span<const double> obs, const StateHyper& hyper, Rng& rng) {
  const KalmanMoments m = kalman_moments(obs, hyper);
  const int T = static_cast<int>(obs.size());
  std::vector<double> draw(T);
  draw[T - 1] = sample_normal(rng, m.filt_mean[T - 1], std::sqrt(m.filt_var[T - 1]));
  for (int t = T - 2; t >= 0; --t) {
    const double gain = hyper.phi * m.filt_var[t] / m.pred_var[t + 1];
    const double mean = m.filt_mean[t] + gain * (draw[t + 1] - m.pred_mean[t + 1]);
    const double var = m.filt_var[t] - gain * hyper.phi * m.filt_var[t];
    draw[t] = sample_normal(rng, mean, std::sqrt(std::max(var, 0.0)));
  }
  return draw;
}

}  // namespace dptf
