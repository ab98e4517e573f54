#include "dptf/mixture.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace dptf {

ParafacMixture::ParafacMixture(CategoricalSchema schema, AtomTable atoms,
                               std::vector<std::vector<double>> weights)
    : schema_(std::move(schema)), atoms_(std::move(atoms)), weights_(std::move(weights)) {
  const int k = static_cast<int>(atoms_.size());
  for (int h = 0; h < k; ++h) {
    if (static_cast<int>(atoms_[h].size()) != schema_.num_vars()) {
      throw std::invalid_argument("mixture: atom variable count mismatch");
    }
    for (int j = 0; j < schema_.num_vars(); ++j) {
      if (static_cast<int>(atoms_[h][j].size()) != schema_.levels(j) ||
          !is_probability_vector(atoms_[h][j], 1e-10)) {
        throw std::invalid_argument("mixture: atom is not a probability vector");
      }
    }
  }
  if (weights_.empty()) throw std::invalid_argument("mixture: need at least one time point");
  remainder_.reserve(weights_.size());
  for (const auto& ladder : weights_) {
    if (static_cast<int>(ladder.size()) != k) {
      throw std::invalid_argument("mixture: ladder length must match component count");
    }
    double total = 0.0;
    for (double w : ladder) {
      if (w < 0.0 || w > 1.0) throw std::invalid_argument("mixture: weight outside [0,1]");
      total += w;
    }
    if (total > 1.0 + 1e-10) throw std::invalid_argument("mixture: ladder mass exceeds one");
    remainder_.push_back(std::max(0.0, 1.0 - total));
  }
}

void ParafacMixture::check_time(int t) const {
  if (t < 0 || t >= horizon()) {
    throw std::domain_error("mixture: time index " + std::to_string(t) + " out of range");
  }
}

CellProbability ParafacMixture::cell_probability(int t, std::span<const int> cell) const {
  check_time(t);
  if (!schema_.valid_cell(cell)) throw std::domain_error("mixture: cell out of range");
  double value = 0.0;
  for (int h = 0; h < num_components(); ++h) {
    double prod = weights_[t][h];
    if (prod == 0.0) continue;
    for (int j = 0; j < schema_.num_vars(); ++j) {
      prod *= atoms_[h][j][cell[j]];
    }
    value += prod;
  }
  return {value, remainder_[t]};
}

double ParafacMixture::marginal_probability(int t, int j, int level) const {
  check_time(t);
  if (j < 0 || j >= schema_.num_vars() || level < 0 || level >= schema_.levels(j)) {
    throw std::domain_error("mixture: marginal index out of range");
  }
  double value = 0.0;
  for (int h = 0; h < num_components(); ++h) {
    value += weights_[t][h] * atoms_[h][j][level];
  }
  return value;
}

double ParafacMixture::pairwise_dependence(int t, int j, int jp) const {
  check_time(t);
  if (j == jp) throw std::domain_error("pairwise_dependence: variables must differ");
  if (j < 0 || jp < 0 || j >= schema_.num_vars() || jp >= schema_.num_vars()) {
    throw std::domain_error("pairwise_dependence: variable index out of range");
  }
  const int dj = schema_.levels(j);
  const int djp = schema_.levels(jp);

  std::vector<double> marg_j(dj, 0.0), marg_jp(djp, 0.0);
  for (int l = 0; l < dj; ++l) marg_j[l] = marginal_probability(t, j, l);
  for (int l = 0; l < djp; ++l) marg_jp[l] = marginal_probability(t, jp, l);

  double total = 0.0;
  for (int cj = 0; cj < dj; ++cj) {
    for (int cp = 0; cp < djp; ++cp) {
      double joint = 0.0;
      for (int h = 0; h < num_components(); ++h) {
        joint += weights_[t][h] * atoms_[h][j][cj] * atoms_[h][jp][cp];
      }
      const double denom = marg_j[cj] * marg_jp[cp];
      if (denom == 0.0) {
        // a vanished marginal forces a vanished joint; the summand tends
        // to zero along that limit
        if (joint == 0.0) continue;
        throw std::domain_error("pairwise_dependence: zero marginal with nonzero joint");
      }
      const double diff = joint - denom;
      total += diff * diff / denom;
    }
  }
  total /= std::min(dj, djp) - 1;
  return std::sqrt(std::max(0.0, total));
}

}  // namespace dptf
