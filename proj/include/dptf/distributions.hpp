#pragma once
// Variate generators for every distribution the samplers consume. All of
// them draw through Rng only, so a fixed (seed, stream) reproduces the
// same chain on every run. Normals use the quantile transform; gammas use
// Marsaglia-Tsang; truncated normals switch to an exponential rejection
// scheme far in the tail.

#include <span>
#include <vector>

#include "dptf/rng.hpp"

namespace dptf {

enum class HalfLine { negative, positive };

double sample_normal(Rng& rng);
double sample_normal(Rng& rng, double mean, double sd);

// shape > 0, unit scale
double sample_gamma(Rng& rng, double shape);
double sample_gamma(Rng& rng, double shape, double scale);

double sample_beta(Rng& rng, double a, double b);

// parametrized so the mean is scale/(shape-1) for shape > 1
double sample_inverse_gamma(Rng& rng, double shape, double scale);

std::vector<double> sample_dirichlet(Rng& rng, std::span<const double> concentration);
void sample_dirichlet(Rng& rng, std::span<const double> concentration,
                      std::span<double> out);

// Normal restricted to one side of zero; robust when the mean sits many
// standard deviations inside the excluded half-line.
double sample_truncated_normal(Rng& rng, double mean, double variance, HalfLine side);

// Normal restricted to (lo, hi).
double sample_truncated_normal_interval(Rng& rng, double mean, double variance,
                                        double lo, double hi);

// index with probability proportional to weights[i]; weights need not sum to 1
int sample_categorical(Rng& rng, std::span<const double> weights);

double sample_uniform(Rng& rng, double lo, double hi);

}  // namespace dptf
