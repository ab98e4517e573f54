#pragma once
// Finite view of the infinite mixture of product multinomials: shared
// per-component atoms and per-time weight ladders with an explicit
// remainder. Cell and marginal probabilities are evaluated lazily; the
// full probability tensor is never materialized.

#include <span>
#include <vector>

#include "dptf/schema.hpp"

namespace dptf {

// atoms[h][j] is the level distribution of variable j in component h
using AtomTable = std::vector<std::vector<std::vector<double>>>;

struct CellProbability {
  double value = 0.0;
  // unassigned tail mass of the ladder at that time; bounds the truncation
  // error of value from below true probability
  double truncation_bound = 0.0;
};

class ParafacMixture {
 public:
  ParafacMixture(CategoricalSchema schema, AtomTable atoms,
                 std::vector<std::vector<double>> weights);

  const CategoricalSchema& schema() const { return schema_; }
  int num_components() const { return static_cast<int>(atoms_.size()); }
  int horizon() const { return static_cast<int>(weights_.size()); }
  double remainder(int t) const { return remainder_.at(t); }
  const AtomTable& atoms() const { return atoms_; }
  const std::vector<std::vector<double>>& weights() const { return weights_; }

  CellProbability cell_probability(int t, std::span<const int> cell) const;
  double marginal_probability(int t, int j, int level) const;

  // Normalized chi-square style divergence between the pairwise joint of
  // (j, jp) and the product of its marginals, mapped to [0, 1] by the
  // min(d)-1 factor; returns the nonnegative square root.
  double pairwise_dependence(int t, int j, int jp) const;

 private:
  void check_time(int t) const;

  CategoricalSchema schema_;
  AtomTable atoms_;
  std::vector<std::vector<double>> weights_;
  std::vector<double> remainder_;
};

}  // namespace dptf
