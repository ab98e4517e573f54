#pragma once
// Gauss-Hermite rules (physicists' weight exp(-x^2)) plus helpers for
// normal expectations. 64 nodes resolve every integrand used here to
// well below 1e-10.

#include <cmath>
#include <cstddef>
#include <vector>

namespace dptf {

struct GaussHermite {
  std::vector<double> nodes;
  std::vector<double> weights;

  static GaussHermite compute(int order);
  static const GaussHermite& order64();
};

// E f(X) with X ~ N(mean, var).
template <class F>
double gh_expect(const GaussHermite& gh, double mean, double var, F&& f) {
  const double scale = std::sqrt(2.0 * var);
  double acc = 0.0;
  for (std::size_t i = 0; i < gh.nodes.size(); ++i) {
    acc += gh.weights[i] * f(mean + scale * gh.nodes[i]);
  }
  return acc / std::sqrt(M_PI);
}

// E f(X) g(Y) with (X, Y) bivariate normal, common mean/variance and
// correlation rho, evaluated on the tensor grid.
template <class F, class G>
double gh_expect_pair(const GaussHermite& gh, double mean, double var, double rho,
                      F&& f, G&& g) {
  const double scale = std::sqrt(2.0 * var);
  const double cross = std::sqrt(1.0 - rho * rho);
  double acc = 0.0;
  for (std::size_t i = 0; i < gh.nodes.size(); ++i) {
    const double xi = gh.nodes[i];
    const double fx = f(mean + scale * xi);
    double inner = 0.0;
    for (std::size_t j = 0; j < gh.nodes.size(); ++j) {
      const double yj = rho * xi + cross * gh.nodes[j];
      inner += gh.weights[j] * g(mean + scale * yj);
    }
    acc += gh.weights[i] * fx * inner;
  }
  return acc / M_PI;
}

}  // namespace dptf
