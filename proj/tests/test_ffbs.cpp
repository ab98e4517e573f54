#include <doctest.h>

#include <cmath>

#include "dptf/distributions.hpp"
#include "dptf/ffbs.hpp"
#include "dense_oracle.hpp"
#include "test_util.hpp"

using namespace dptf;



TEST_CASE("filter and smoother match dense joint-Gaussian conditioning") {
  const StateHyper hyper{0.3, 0.6, 0.4, 0.25};
  const std::vector<double> obs{0.9, -0.2, 0.4, 1.5, -0.7};
  const testutil::DenseSmootherOracle oracle{hyper};
  const auto m = kalman_moments(obs, hyper);

  for (int t = 0; t < 5; ++t) {
    const auto [filt_mean, filt_var] = oracle.condition(obs, t, t + 1);
    CHECK(m.filt_mean[t] == doctest::Approx(filt_mean).epsilon(1e-8));
    CHECK(m.filt_var[t] == doctest::Approx(filt_var).epsilon(1e-8));
    const auto [smooth_mean, smooth_var] = oracle.condition(obs, t, 5);
    CHECK(m.smooth_mean[t] == doctest::Approx(smooth_mean).epsilon(1e-8));
    CHECK(m.smooth_var[t] == doctest::Approx(smooth_var).epsilon(1e-8));
    if (t > 0) {
      const auto [pred_mean, pred_var] = oracle.condition(obs, t, t);
      CHECK(m.pred_mean[t] == doctest::Approx(pred_mean).epsilon(1e-8));
      CHECK(m.pred_var[t] == doctest::Approx(pred_var).epsilon(1e-8));
    }
  }
}

TEST_CASE("single observation reduces to the conjugate normal update") {
  const StateHyper hyper{0.2, 0.5, 0.3, 0.16};
  const double w = 1.1;
  const auto m = kalman_moments(std::vector<double>{w}, hyper);
  const double m0 = hyper.stationary_mean();
  const double v0 = hyper.stationary_var();
  CHECK(m.filt_mean[0] == doctest::Approx((v0 * w + hyper.var_obs * m0) / (v0 + hyper.var_obs)));
  CHECK(m.filt_var[0] == doctest::Approx(v0 * hyper.var_obs / (v0 + hyper.var_obs)));
}

TEST_CASE("uninformative observations leave the prior") {
  StateHyper hyper{0.1, 0.7, 1e9, 0.25};
  const std::vector<double> obs{5.0, -3.0, 4.0};
  const auto m = kalman_moments(obs, hyper);
  for (int t = 0; t < 3; ++t) {
    CHECK(m.smooth_mean[t] == doctest::Approx(hyper.stationary_mean()).epsilon(1e-6));
    CHECK(m.smooth_var[t] == doctest::Approx(hyper.stationary_var()).epsilon(1e-6));
  }
}

TEST_CASE("trajectory draws reproduce the smoothing law") {
  const StateHyper hyper{0.3, 0.6, 0.4, 0.25};
  const std::vector<double> obs{0.9, -0.2, 1.4};
  const auto m = kalman_moments(obs, hyper);
  constexpr int kDraws = 60000;
  Rng rng(401);
  std::vector<std::vector<double>> draws(3, std::vector<double>(kDraws));
  for (int d = 0; d < kDraws; ++d) {
    const auto x = ffbs_draw(obs, hyper, rng);
    for (int t = 0; t < 3; ++t) draws[t][d] = x[t];
  }
  for (int t = 0; t < 3; ++t) {
    CHECK(std::fabs(testutil::mean(draws[t]) - m.smooth_mean[t]) <
          3.0 * testutil::std_error(draws[t]));
    CHECK(testutil::variance(draws[t]) == doctest::Approx(m.smooth_var[t]).epsilon(0.05));
  }
  // lag-one joint structure against the dense oracle
  const testutil::DenseSmootherOracle oracle{hyper};
  testutil::DenseMatrix cov(3);
  for (int a = 0; a < 3; ++a) {
    for (int b = 0; b < 3; ++b) cov.at(a, b) = oracle.prior_cov(a, b) + (a == b ? hyper.var_obs : 0.0);
  }
  std::vector<double> cross0(3), cross1(3);
  for (int a = 0; a < 3; ++a) {
    cross0[a] = oracle.prior_cov(0, a);
    cross1[a] = oracle.prior_cov(1, a);
  }
  const auto w1 = testutil::solve_spd(cov, cross1);
  double target = oracle.prior_cov(0, 1);
  for (int a = 0; a < 3; ++a) target -= cross0[a] * w1[a];
  const double m0 = testutil::mean(draws[0]), m1 = testutil::mean(draws[1]);
  std::vector<double> prod(kDraws);
  for (int d = 0; d < kDraws; ++d) prod[d] = (draws[0][d] - m0) * (draws[1][d] - m1);
  CHECK(std::fabs(testutil::mean(prod) - target) < 3.0 * testutil::std_error(prod));
}
