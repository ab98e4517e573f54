#include "dptf/quadrature.hpp"

#include <cmath>
#include <stdexcept>

namespace dptf {

// Newton iteration on the orthonormal Hermite recurrence; roots found from
// the outermost inward, symmetric pairs filled together.
GaussHermite GaussHermite::compute(int order) {
  if (order < 2) throw std::invalid_argument("GaussHermite: order must be >= 2");
  GaussHermite gh;
  gh.nodes.assign(order, 0.0);
  gh.weights.assign(order, 0.0);

  const int half = (order + 1) / 2;
  const double pim4 = 0.7511255444649424828587030;  // pi^(-1/4)
  double z = 0.0, z_prev1 = 0.0, z_prev2 = 0.0;

  for (int i = 0; i < half; ++i) {
    if (i == 0) {
      z = std::sqrt(2.0 * order + 1.0) - 1.85575 * std::pow(2.0 * order + 1.0, -1.0 / 6.0);
    } else if (i == 1) {
      z -= 1.14 * std::pow(order, 0.426) / z;
    } else if (i == 2) {
      z = 1.86 * z - 0.86 * z_prev2;
    } else if (i == 3) {
      z = 1.91 * z - 0.91 * z_prev2;
    } else {
      z = 2.0 * z - z_prev2;
    }

    double pp = 0.0;
    for (int iter = 0; iter < 100; ++iter) {
      double p1 = pim4;
      double p2 = 0.0;
      for (int j = 0; j < order; ++j) {
        const double p3 = p2;
        p2 = p1;
        p1 = z * std::sqrt(2.0 / (j + 1.0)) * p2 - std::sqrt(j / (j + 1.0)) * p3;
      }
      pp = std::sqrt(2.0 * order) * p2;
      const double step = p1 / pp;
      z -= step;
      if (std::fabs(step) <= 1e-15 * (1.0 + std::fabs(z))) break;
    }

    gh.nodes[i] = -z;
    gh.nodes[order - 1 - i] = z;
    gh.weights[i] = 2.0 / (pp * pp);
    gh.weights[order - 1 - i] = gh.weights[i];
    z_prev2 = z_prev1;
    z_prev1 = z;
  }
  if (order % 2 == 1) gh.nodes[order / 2] = 0.0;
  return gh;
}

const GaussHermite& GaussHermite::order64() {
  static const GaussHermite gh = compute(64);
  return gh;
}

}  // namespace dptf
