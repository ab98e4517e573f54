#pragma once
// Monotone link g mapping the real line onto (0,1). Probit is the default
// and the only link with a specialized latent-variable sampler path; logit
// exercises the generic Metropolis-Hastings path.

#include <cmath>
#include <stdexcept>
#include <string>

#include "dptf/normal.hpp"

namespace dptf {

class Link {
 public:
  enum class Kind { probit, logit };

  explicit Link(Kind kind = Kind::probit) : kind_(kind) {}

  static Link parse(const std::string& name) {
    if (name == "probit") return Link(Kind::probit);
    if (name == "logit") return Link(Kind::logit);
    throw std::invalid_argument("unknown link: " + name);
  }

  Kind kind() const { return kind_; }
  const char* name() const { return kind_ == Kind::probit ? "probit" : "logit"; }

  double operator()(double x) const {
    if (kind_ == Kind::probit) return norm_cdf(x);
    return x >= 0.0 ? 1.0 / (1.0 + std::exp(-x)) : std::exp(x) / (1.0 + std::exp(x));
  }

  // Complement 1 - g(x), accurate when g(x) is close to 1.
  double complement(double x) const {
    if (kind_ == Kind::probit) return norm_sf(x);
    return (*this)(-x);
  }

  double inverse(double p) const {
    if (!(p > 0.0 && p < 1.0)) {
      throw std::domain_error("link inverse: argument must lie in (0,1)");
    }
    if (kind_ == Kind::probit) return norm_quantile(p);
    return std::log(p) - std::log1p(-p);
  }

  // x with 1 - g(x) = q; the accurate route when g(x) is close to 1, and
  // exact for these symmetric links
  double inverse_complement(double q) const { return -inverse(q); }

  double derivative(double x) const {
    if (kind_ == Kind::probit) return norm_pdf(x);
    const double g = (*this)(x);
    return g * (1.0 - g);
  }

  double log_derivative(double x) const {
    if (kind_ == Kind::probit) return norm_logpdf(x);
    return log_value(x) + log_complement(x);
  }

  double log_value(double x) const {
    if (kind_ == Kind::probit) {
      const double c = norm_cdf(x);
      if (c > 0.0) return std::log(c);
      // leading asymptotic of log Phi(x) for x far below the underflow point
      return -0.5 * x * x - std::log(-x) - 0.9189385332046727;
    }
    return x >= 0.0 ? -std::log1p(std::exp(-x)) : x - std::log1p(std::exp(x));
  }

  double log_complement(double x) const { return log_value(-x); }

 private:
  Kind kind_;
};

}  // namespace dptf
