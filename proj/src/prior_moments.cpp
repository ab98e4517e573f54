#include "dptf/prior_moments.hpp"

#include <cmath>
#include <stdexcept>

#include "dptf/distributions.hpp"
#include "dptf/quadrature.hpp"

namespace dptf {

DirichletHyper DirichletHyper::symmetric(const CategoricalSchema& schema, double a) {
  if (!(a > 0.0)) throw std::domain_error("DirichletHyper: concentration must be positive");
  DirichletHyper hyper;
  hyper.concentration.reserve(schema.num_vars());
  for (int j = 0; j < schema.num_vars(); ++j) {
    hyper.concentration.emplace_back(schema.levels(j), a);
  }
  return hyper;
}

void DirichletHyper::validate(const CategoricalSchema& schema) const {
  if (static_cast<int>(concentration.size()) != schema.num_vars()) {
    throw std::invalid_argument("DirichletHyper: variable count mismatch");
  }
  for (int j = 0; j < schema.num_vars(); ++j) {
    if (static_cast<int>(concentration[j].size()) != schema.levels(j)) {
      throw std::invalid_argument("DirichletHyper: level count mismatch");
    }
    for (double a : concentration[j]) {
      if (!(a > 0.0)) throw std::domain_error("DirichletHyper: concentration must be positive");
    }
  }
}

double DirichletHyper::total(int j) const {
  double s = 0.0;
  for (double a : concentration.at(j)) s += a;
  return s;
}

namespace {

// Monte Carlo path for links without a specialized quadrature treatment;
// fixed internal stream keeps results reproducible.
LinkMoments mc_link_moments(const Link& link, const StateHyper& hyper, int lag) {
  constexpr int kDraws = 1'000'000;
  Rng rng = Rng::keyed(0x11ced00dull, {static_cast<std::uint64_t>(lag)});
  const double mean = hyper.stationary_mean();
  const double var_alpha = hyper.stationary_var();
  const double sd_alpha = std::sqrt(var_alpha);
  const double sd_obs = std::sqrt(hyper.var_obs);
  const double phik = std::pow(hyper.phi, lag);
  const double sd_innov = std::sqrt(std::max(0.0, var_alpha * (1.0 - phik * phik)));
  double sum_g = 0.0, sum_g2 = 0.0, sum_lag = 0.0;
  for (int i = 0; i < kDraws; ++i) {
    const double alpha_t = mean + sd_alpha * sample_normal(rng);
    const double w_t = alpha_t + sd_obs * sample_normal(rng);
    const double alpha_lag = mean + phik * (alpha_t - mean) + sd_innov * sample_normal(rng);
    const double w_lag = alpha_lag + sd_obs * sample_normal(rng);
    const double g = link(w_t);
    sum_g += g;
    sum_g2 += g * g;
    sum_lag += g * link(w_lag);
  }
  LinkMoments m;
  m.mean = sum_g / kDraws;
  m.second_moment = sum_g2 / kDraws;
  m.lag_moment = lag == 0 ? m.second_moment : sum_lag / kDraws;
  m.lag = lag;
  return m;
}

}  // namespace

LinkMoments link_moments(const Link& link, const StateHyper& hyper, int lag) {
  hyper.validate();
  if (lag < 0) throw std::domain_error("link_moments: lag must be >= 0");
  if (link.kind() != Link::Kind::probit) return mc_link_moments(link, hyper, lag);

  const auto& gh = GaussHermite::order64();
  const double mean = hyper.stationary_mean();
  const double var = hyper.signal_var();

  LinkMoments m;
  m.lag = lag;
  m.mean = gh_expect(gh, mean, var, [&](double w) { return link(w); });
  m.second_moment = gh_expect(gh, mean, var, [&](double w) {
    const double g = link(w);
    return g * g;
  });
  if (lag == 0) {
    m.lag_moment = m.second_moment;
  } else {
    // W_t and W_{t+k} share mean and variance; only the state part carries
    // over, so the correlation is phi^k * var_state_part / var.
    const double corr = std::pow(hyper.phi, lag) * hyper.stationary_var() / var;
    m.lag_moment = gh_expect_pair(gh, mean, var, corr,
                                  [&](double w) { return link(w); },
                                  [&](double w) { return link(w); });
  }
  return m;
}

PriorMomentReport prior_moments(const CategoricalSchema& schema, const DirichletHyper& hyper,
                                const Link& link, const StateHyper& state_hyper,
                                std::span<const int> cell, std::span<const int> other_cell,
                                int lag) {
  hyper.validate(schema);
  if (!schema.valid_cell(cell) || !schema.valid_cell(other_cell)) {
    throw std::domain_error("prior_moments: cell out of range");
  }

  PriorMomentReport report;
  report.link = link_moments(link, state_hyper, lag);

  double expectation = 1.0;
  double var_first = 1.0, var_second = 1.0;
  double cov_first = 1.0, cov_second = 1.0;
  for (int j = 0; j < schema.num_vars(); ++j) {
    const double a_c = hyper.concentration[j][cell[j]];
    const double a_cp = hyper.concentration[j][other_cell[j]];
    const double a_tot = hyper.total(j);
    expectation *= a_c / a_tot;
    var_first *= a_c * (a_c + 1.0) / (a_tot * (a_tot + 1.0));
    var_second *= (a_c * a_c) / (a_tot * a_tot);
    const double match = (cell[j] == other_cell[j]) ? 1.0 : 0.0;
    cov_first *= a_c * (a_cp + match) / (a_tot * (a_tot + 1.0));
    cov_second *= (a_c * a_cp) / (a_tot * a_tot);
  }

  const double b1 = report.link.mean;
  const double b2 = report.link.second_moment;
  const double gk = report.link.lag_moment;
  report.expectation = expectation;
  report.variance = (var_first - var_second) * (b2 / (2.0 * b1 - b2));
  report.covariance = (cov_first - cov_second) * (gk / (2.0 * b1 - gk));
  return report;
}

}  // namespace dptf
