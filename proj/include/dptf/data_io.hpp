#pragma once
// File formats: delimited survey-style input with a `time` column and
// 1-based level codes (empty or NA = missing), a line-oriented versioned
// draw store, and plot-ready dependence summaries. All numeric output uses
// 17 significant digits so doubles round-trip exactly.

#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "dptf/dataset.hpp"
#include "dptf/sampler.hpp"

namespace dptf {

struct VariableSpec {
  std::string name;
  int levels = 2;
  std::vector<std::string> level_labels;  // optional, size == levels when present
  // raw code -> 1..levels, or 0 for "treat as missing"; empty map = identity
  std::map<int, int> recode;
};

struct CodebookSpec {
  std::vector<VariableSpec> variables;

  CategoricalSchema schema() const;
  void validate() const;

  static CodebookSpec from_json_file(const std::string& path);
  void to_json_file(const std::string& path) const;

  // plain codebook with identity coding for a schema
  static CodebookSpec identity(const CategoricalSchema& schema,
                               const std::vector<std::string>& names = {});
};

Dataset load_dataset(const std::string& path, const CodebookSpec& codebook);
void write_dataset(const Dataset& data, const CodebookSpec& codebook, const std::string& path);

void write_draws(const PosteriorDraws& draws, const std::string& path);
PosteriorDraws read_draws(const std::string& path);

struct RhoSummaryRow {
  int t = 0, j = 0, jp = 0;
  double mean = 0.0, lo = 0.0, hi = 0.0;  // posterior mean, 2.5%, 97.5%
};

// pairs with j < jp; empty list means every pair
std::vector<RhoSummaryRow> rho_summary(const PosteriorDraws& draws,
                                       const std::vector<std::pair<int, int>>& pairs);
void write_rho_summary(const PosteriorDraws& draws,
                       const std::vector<std::pair<int, int>>& pairs,
                       const std::string& path);

// 17-significant-digit decimal form, shortest round-trip not required
std::string format_double(double value);

// order-statistic quantile with linear interpolation; input must be sorted
double quantile_sorted(std::span<const double> sorted, double prob);

}  // namespace dptf
