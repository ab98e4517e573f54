#pragma once
// Joint-Gaussian conditioning oracle for the scalar state smoother: builds
// the stationary AR(1) covariance explicitly and conditions by dense solves.

#include <cmath>
#include <span>
#include <utility>

#include "dptf/stick.hpp"
#include "test_util.hpp"

namespace testutil {

struct DenseSmootherOracle {
  dptf::StateHyper hyper;

  double prior_cov(int t, int s) const {
    return hyper.stationary_var() * std::pow(hyper.phi, std::abs(t - s));
  }

  // conditional mean and variance of state_t given the first `upto` obs
  std::pair<double, double> condition(std::span<const double> obs, int t, int upto) const {
    const double m = hyper.stationary_mean();
    DenseMatrix cov(upto);
    for (int a = 0; a < upto; ++a) {
      for (int b = 0; b < upto; ++b) {
        cov.at(a, b) = prior_cov(a, b) + (a == b ? hyper.var_obs : 0.0);
      }
    }
    std::vector<double> centered(upto), cross(upto);
    for (int a = 0; a < upto; ++a) {
      centered[a] = obs[a] - m;
      cross[a] = prior_cov(t, a);
    }
    const auto solved = solve_spd(cov, centered);
    const auto weights = solve_spd(cov, cross);
    double mean = m, var = prior_cov(t, t);
    for (int a = 0; a < upto; ++a) {
      mean += cross[a] * solved[a];
      var -= cross[a] * weights[a];
    }
    return {mean, var};
  }
};

}  // namespace testutil
