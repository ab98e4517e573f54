#pragma once
// Closed-form moments of the prior on cell probabilities induced by
// Dirichlet atoms and the dynamic stick-breaking weights. The weight side
// enters through three link moments: the mean of g(W), the mean of g^2(W),
// and the lagged product mean E[g(W_t) g(W_{t+k})].

#include <span>
#include <vector>

#include "dptf/link.hpp"
#include "dptf/schema.hpp"
#include "dptf/stick.hpp"

namespace dptf {

struct DirichletHyper {
  // concentration[j][l] > 0 for level l of variable j
  std::vector<std::vector<double>> concentration;

  static DirichletHyper symmetric(const CategoricalSchema& schema, double a);

  void validate(const CategoricalSchema& schema) const;
  double total(int j) const;
};

struct LinkMoments {
  double mean = 0.0;           // E g(W)
  double second_moment = 0.0;  // E g(W)^2
  double lag_moment = 0.0;     // E g(W_t) g(W_{t+k})
  int lag = 0;
};

// lag 0 returns second_moment for the lag product exactly.
LinkMoments link_moments(const Link& link, const StateHyper& hyper, int lag);

struct PriorMomentReport {
  double expectation = 0.0;
  double variance = 0.0;
  double covariance = 0.0;  // Cov(pi_t(cell), pi_{t+lag}(other_cell))
  LinkMoments link;
};

PriorMomentReport prior_moments(const CategoricalSchema& schema, const DirichletHyper& hyper,
                                const Link& link, const StateHyper& state_hyper,
                                std::span<const int> cell, std::span<const int> other_cell,
                                int lag);

}  // namespace dptf
