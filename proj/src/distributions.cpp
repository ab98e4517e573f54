#include "dptf/distributions.hpp"

#include <cmath>
#include <stdexcept>

#include "dptf/normal.hpp"

namespace dptf {

double sample_normal(Rng& rng) { return norm_quantile(rng.uniform()); }

double sample_normal(Rng& rng, double mean, double sd) {
  return mean + sd * sample_normal(rng);
}

namespace {

// Marsaglia-Tsang squeeze for shape >= 1.
double gamma_large_shape(Rng& rng, double shape) {
  const double d = shape - 1.0 / 3.0;
  const double c = 1.0 / std::sqrt(9.0 * d);
  for (;;) {
    double x, v;
    do {
      x = sample_normal(rng);
      v = 1.0 + c * x;
    } while (v <= 0.0);
    v = v * v * v;
    const double u = rng.uniform();
    if (u < 1.0 - 0.0331 * x * x * x * x) return d * v;
    if (std::log(u) < 0.5 * x * x + d * (1.0 - v + std::log(v))) return d * v;
  }
}

}  // namespace

double sample_gamma(Rng& rng, double shape) {
  if (!(shape > 0.0)) throw std::domain_error("sample_gamma: shape must be positive");
  if (shape >= 1.0) return gamma_large_shape(rng, shape);
  // boost to shape+1, then scale back
  const double g = gamma_large_shape(rng, shape + 1.0);
  return g * std::pow(rng.uniform(), 1.0 / shape);
}

double sample_gamma(Rng& rng, double shape, double scale) {
  if (!(scale > 0.0)) throw std::domain_error("sample_gamma: scale must be positive");
  return scale * sample_gamma(rng, shape);
}

double sample_beta(Rng& rng, double a, double b) {
  if (!(a > 0.0) || !(b > 0.0)) throw std::domain_error("sample_beta: parameters must be positive");
  const double x = sample_gamma(rng, a);
  const double y = sample_gamma(rng, b);
  return x / (x + y);
}

double sample_inverse_gamma(Rng& rng, double shape, double scale) {
  if (!(shape > 0.0) || !(scale > 0.0)) {
    throw std::domain_error("sample_inverse_gamma: parameters must be positive");
  }
  return scale / sample_gamma(rng, shape);
}

void sample_dirichlet(Rng& rng, std::span<const double> concentration,
                      std::span<double> out) {
  if (concentration.size() != out.size()) {
    throw std::invalid_argument("sample_dirichlet: size mismatch");
  }
  double total = 0.0;
  for (std::size_t i = 0; i < concentration.size(); ++i) {
    if (!(concentration[i] > 0.0)) {
      throw std::domain_error("sample_dirichlet: concentrations must be positive");
    }
    out[i] = sample_gamma(rng, concentration[i]);
    total += out[i];
  }
  while (total <= 0.0) {
    // possible only when every gamma underflowed; retry
    total = 0.0;
    for (std::size_t i = 0; i < concentration.size(); ++i) {
      out[i] = sample_gamma(rng, concentration[i]);
      total += out[i];
    }
  }
  for (auto& v : out) v /= total;
}

std::vector<double> sample_dirichlet(Rng& rng, std::span<const double> concentration) {
  std::vector<double> out(concentration.size());
  sample_dirichlet(rng, concentration, out);
  return out;
}

namespace {

// Standard normal conditioned on X >= cut.
double lower_truncated_std_normal(Rng& rng, double cut) {
  if (cut <= 0.45) {
    for (;;) {
      const double x = sample_normal(rng);
      if (x >= cut) return x;
    }
  }
  // exponential proposal, optimal rate
  const double rate = 0.5 * (cut + std::sqrt(cut * cut + 4.0));
  for (;;) {
    const double x = cut - std::log(rng.uniform()) / rate;
    const double diff = x - rate;
    if (std::log(rng.uniform()) <= -0.5 * diff * diff) return x;
  }
}

}  // namespace

double sample_truncated_normal(Rng& rng, double mean, double variance, HalfLine side) {
  if (!(variance > 0.0)) {
    throw std::domain_error("sample_truncated_normal: variance must be positive");
  }
  const double sd = std::sqrt(variance);
  if (side == HalfLine::positive) {
    return mean + sd * lower_truncated_std_normal(rng, -mean / sd);
  }
  return mean - sd * lower_truncated_std_normal(rng, mean / sd);
}

double sample_truncated_normal_interval(Rng& rng, double mean, double variance,
                                        double lo, double hi) {
  if (!(variance > 0.0) || !(lo < hi)) {
    throw std::domain_error("sample_truncated_normal_interval: bad parameters");
  }
  const double sd = std::sqrt(variance);
  const double a = (lo - mean) / sd;
  const double b = (hi - mean) / sd;
  const double cdf_a = norm_cdf(a);
  const double cdf_b = norm_cdf(b);
  const double mass = cdf_b - cdf_a;
  if (mass > 1e-12) {
    const double u = cdf_a + mass * rng.uniform();
    const double x = norm_quantile(std::min(std::max(u, 1e-300), 1.0 - 1e-16));
    return mean + sd * std::min(std::max(x, a), b);
  }
  // interval deep in one tail: rejection from the one-sided sampler at the
  // nearer bound
  if (a > 0.0) {
    for (;;) {
      const double x = lower_truncated_std_normal(rng, a);
      if (x <= b) return mean + sd * x;
    }
  }
  for (;;) {
    const double x = -lower_truncated_std_normal(rng, -b);
    if (x >= a) return mean + sd * x;
  }
}

int sample_categorical(Rng& rng, std::span<const double> weights) {
  double total = 0.0;
  for (double w : weights) {
    if (w < 0.0 || !std::isfinite(w)) {
      throw std::domain_error("sample_categorical: weights must be finite and nonnegative");
    }
    total += w;
  }
  if (!(total > 0.0)) throw std::domain_error("sample_categorical: weights sum to zero");
  double target = total * rng.uniform();
  for (std::size_t i = 0; i + 1 < weights.size(); ++i) {
    target -= weights[i];
    if (target < 0.0) return static_cast<int>(i);
  }
  return static_cast<int>(weights.size()) - 1;
}

double sample_uniform(Rng& rng, double lo, double hi) {
  return lo + (hi - lo) * rng.uniform();
}

}  // namespace dptf
