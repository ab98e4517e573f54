#pragma once
// Variable layout of a multivariate categorical response: p variables, the
// j-th taking values in {0, ..., levels(j)-1}. Immutable once built.

#include <cmath>
#include <span>
#include <stdexcept>
#include <vector>

namespace dptf {

class CategoricalSchema {
 public:
  explicit CategoricalSchema(std::vector<int> levels) : levels_(std::move(levels)) {
    if (levels_.empty()) throw std::invalid_argument("schema: need at least one variable");
    for (int d : levels_) {
      if (d < 2) throw std::invalid_argument("schema: every variable needs >= 2 levels");
    }
  }

  int num_vars() const { return static_cast<int>(levels_.size()); }
  int levels(int j) const { return levels_.at(j); }
  std::span<const int> all_levels() const { return levels_; }

  // product of level counts; only meaningful while it fits in 64 bits
  long long num_cells() const {
    long long n = 1;
    for (int d : levels_) n *= d;
    return n;
  }

  bool valid_cell(std::span<const int> cell) const {
    if (static_cast<int>(cell.size()) != num_vars()) return false;
    for (int j = 0; j < num_vars(); ++j) {
      if (cell[j] < 0 || cell[j] >= levels_[j]) return false;
    }
    return true;
  }

  bool operator==(const CategoricalSchema& other) const { return levels_ == other.levels_; }

 private:
  std::vector<int> levels_;
};

inline bool is_probability_vector(std::span<const double> v, double tol = 1e-12) {
  double sum = 0.0;
  for (double x : v) {
    if (x < 0.0) return false;
    sum += x;
  }
  return std::fabs(sum - 1.0) <= tol;
}

}  // namespace dptf
