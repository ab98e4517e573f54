#pragma once
// Shared statistical machinery for the test suites: moment summaries,
// goodness-of-fit tests, and a small dense Gaussian toolbox used as an
// independent oracle for the state-smoothing recursions.

#include <algorithm>
#include <cmath>
#include <numeric>
#include <span>
#include <stdexcept>
#include <vector>

namespace testutil {

inline double mean(std::span<const double> x) {
  double s = 0.0;
  for (double v : x) s += v;
  return s / static_cast<double>(x.size());
}

inline double variance(std::span<const double> x) {
  const double m = mean(x);
  double s = 0.0;
  for (double v : x) s += (v - m) * (v - m);
  return s / (static_cast<double>(x.size()) - 1.0);
}

inline double std_error(std::span<const double> x) {
  return std::sqrt(variance(x) / static_cast<double>(x.size()));
}

// spectral-free long-run standard error via batch means
inline double batch_means_se(std::span<const double> x, int batches = 50) {
  const std::size_t n = x.size();
  const std::size_t len = n / batches;
  if (len < 2) throw std::invalid_argument("batch_means_se: series too short");
  std::vector<double> bm;
  bm.reserve(batches);
  for (int b = 0; b < batches; ++b) {
    double s = 0.0;
    for (std::size_t i = b * len; i < (b + 1) * len; ++i) s += x[i];
    bm.push_back(s / static_cast<double>(len));
  }
  return std::sqrt(variance(bm) / batches);
}

// ---- incomplete gamma (series + continued fraction) for chi-square tails

inline double gamma_p_series(double a, double x) {
  double sum = 1.0 / a, term = sum, ap = a;
  for (int n = 0; n < 500; ++n) {
    ap += 1.0;
    term *= x / ap;
    sum += term;
    if (std::fabs(term) < std::fabs(sum) * 1e-15) break;
  }
  return sum * std::exp(-x + a * std::log(x) - std::lgamma(a));
}

inline double gamma_q_contfrac(double a, double x) {
  double b = x + 1.0 - a, c = 1e300, d = 1.0 / b, h = d;
  for (int i = 1; i <= 500; ++i) {
    const double an = -i * (i - a);
    b += 2.0;
    d = an * d + b;
    if (std::fabs(d) < 1e-300) d = 1e-300;
    c = b + an / c;
    if (std::fabs(c) < 1e-300) c = 1e-300;
    d = 1.0 / d;
    const double delta = d * c;
    h *= delta;
    if (std::fabs(delta - 1.0) < 1e-15) break;
  }
  return std::exp(-x + a * std::log(x) - std::lgamma(a)) * h;
}

inline double gamma_q(double a, double x) {
  if (x < 0.0 || a <= 0.0) throw std::domain_error("gamma_q: bad arguments");
  if (x == 0.0) return 1.0;
  return (x < a + 1.0) ? 1.0 - gamma_p_series(a, x) : gamma_q_contfrac(a, x);
}

inline double chi2_pvalue(double stat, int dof) { return gamma_q(dof / 2.0, stat / 2.0); }

// chi-square goodness of fit against expected probabilities; bins with
// tiny expectation are pooled into their neighbor
inline double chi2_gof_pvalue(std::span<const double> counts, std::span<const double> probs,
                              double min_expected = 5.0) {
  if (counts.size() != probs.size()) throw std::invalid_argument("chi2_gof: size mismatch");
  double total = 0.0;
  for (double c : counts) total += c;
  std::vector<double> obs, exp;
  double pool_obs = 0.0, pool_exp = 0.0;
  for (std::size_t i = 0; i < counts.size(); ++i) {
    pool_obs += counts[i];
    pool_exp += probs[i] * total;
    if (pool_exp >= min_expected) {
      obs.push_back(pool_obs);
      exp.push_back(pool_exp);
      pool_obs = pool_exp = 0.0;
    }
  }
  if (pool_exp > 0.0) {
    if (exp.empty()) throw std::invalid_argument("chi2_gof: expectations too small");
    obs.back() += pool_obs;
    exp.back() += pool_exp;
  }
  if (obs.size() < 2) throw std::invalid_argument("chi2_gof: need at least two pooled bins");
  double stat = 0.0;
  for (std::size_t i = 0; i < obs.size(); ++i) {
    stat += (obs[i] - exp[i]) * (obs[i] - exp[i]) / exp[i];
  }
  return chi2_pvalue(stat, static_cast<int>(obs.size()) - 1);
}

// ---- Kolmogorov-Smirnov

inline double kolmogorov_q(double lambda) {
  if (lambda < 1e-10) return 1.0;
  double sum = 0.0;
  for (int k = 1; k <= 100; ++k) {
    const double term = 2.0 * ((k % 2 == 1) ? 1.0 : -1.0) * std::exp(-2.0 * k * k * lambda * lambda);
    sum += term;
    if (std::fabs(term) < 1e-12) break;
  }
  return std::max(0.0, std::min(1.0, sum));
}

template <class Cdf>
double ks_test_pvalue(std::vector<double> sample, Cdf&& cdf) {
  std::sort(sample.begin(), sample.end());
  const double n = static_cast<double>(sample.size());
  double d = 0.0;
  for (std::size_t i = 0; i < sample.size(); ++i) {
    const double f = cdf(sample[i]);
    d = std::max(d, std::fabs(f - static_cast<double>(i) / n));
    d = std::max(d, std::fabs(static_cast<double>(i + 1) / n - f));
  }
  const double sn = std::sqrt(n);
  return kolmogorov_q((sn + 0.12 + 0.11 / sn) * d);
}

inline double ks_two_sample_pvalue(std::vector<double> a, std::vector<double> b) {
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  const double na = static_cast<double>(a.size());
  const double nb = static_cast<double>(b.size());
  double d = 0.0;
  std::size_t ia = 0, ib = 0;
  while (ia < a.size() && ib < b.size()) {
    const double x = std::min(a[ia], b[ib]);
    while (ia < a.size() && a[ia] <= x) ++ia;
    while (ib < b.size() && b[ib] <= x) ++ib;
    d = std::max(d, std::fabs(static_cast<double>(ia) / na - static_cast<double>(ib) / nb));
  }
  const double ne = std::sqrt(na * nb / (na + nb));
  return kolmogorov_q((ne + 0.12 + 0.11 / ne) * d);
}

// ---- small dense Gaussian algebra (oracle for the scalar smoother)

struct DenseMatrix {
  int n = 0;
  std::vector<double> a;  // row-major n x n

  explicit DenseMatrix(int size) : n(size), a(static_cast<std::size_t>(size) * size, 0.0) {}
  double& at(int r, int c) { return a[static_cast<std::size_t>(r) * n + c]; }
  double at(int r, int c) const { return a[static_cast<std::size_t>(r) * n + c]; }
};

// Cholesky solve A x = b for symmetric positive definite A
inline std::vector<double> solve_spd(DenseMatrix a, std::vector<double> b) {
  const int n = a.n;
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j <= i; ++j) {
      double s = a.at(i, j);
      for (int k = 0; k < j; ++k) s -= a.at(i, k) * a.at(j, k);
      if (i == j) {
        if (s <= 0.0) throw std::runtime_error("solve_spd: not positive definite");
        a.at(i, i) = std::sqrt(s);
      } else {
        a.at(i, j) = s / a.at(j, j);
      }
    }
  }
  for (int i = 0; i < n; ++i) {
    double s = b[i];
    for (int k = 0; k < i; ++k) s -= a.at(i, k) * b[k];
    b[i] = s / a.at(i, i);
  }
  for (int i = n - 1; i >= 0; --i) {
    double s = b[i];
    for (int k = i + 1; k < n; ++k) s -= a.at(k, i) * b[k];
    b[i] = s / a.at(i, i);
  }
  return b;
}

}  // namespace testutil
