#pragma once
// Study orchestration: synthetic data generators with exact ground truth,
// dependence-recovery scoring, one-step-ahead table forecasting, and the
// predictive criteria comparing replicated tables with an observed one.

#include <cstdint>
#include <optional>
#include <vector>

#include "dptf/baselines.hpp"
#include "dptf/dataset.hpp"
#include "dptf/mixture.hpp"
#include "dptf/sampler.hpp"

namespace dptf {

struct SimulationSpec {
  enum class Case { model_based, loglinear_rw };

  Case kind = Case::model_based;
  int horizon = 10;
  int num_vars = 20;
  int levels = 4;                // shared by every variable
  std::vector<int> wave_sizes;   // empty: reference sizes mapped onto horizon
  int holdout_waves = 0;         // extra waves generated past the horizon

  // model-based generator
  StateHyper hyper{0.0, 0.8, 0.01, 0.64};
  double dirichlet_a = 1.0;
  double truncation_tol = 1e-10;

  // random-walk log-linear generator (binary variables only)
  double rw_var = 1.0;

  std::uint64_t seed = 1;

  void validate() const;
  std::vector<int> resolved_wave_sizes() const;  // length horizon + holdout_waves
};

struct SimulationOutput {
  Dataset data;                     // first `horizon` waves
  std::optional<Dataset> holdout;   // the extra waves, when requested
  ParafacMixture truth;             // exact per-time mixture incl. holdout times
};

SimulationOutput generate_model_based(const SimulationSpec& spec);
SimulationOutput generate_loglinear_rw(const SimulationSpec& spec);
SimulationOutput generate(const SimulationSpec& spec);

struct RhoRecovery {
  std::vector<int> times;
  std::vector<double> per_time;  // Pearson correlation, NaN when undefined
  double pooled = 0.0;
  int pairs = 0;
};

// Correlation between true dependence values and posterior means over all
// variable pairs, per time and pooled.
RhoRecovery evaluate_rho_recovery(const PosteriorDraws& draws, const ParafacMixture& truth,
                                  const std::vector<int>& times);

// Same scoring for externally supplied posterior-mean tables (one value per
// (time, pair j<jp)), used for the per-time baseline fits.
RhoRecovery evaluate_rho_recovery_means(const std::vector<std::vector<double>>& means_by_time,
                                        const ParafacMixture& truth,
                                        const std::vector<int>& times);

double pearson_correlation(std::span<const double> x, std::span<const double> y);

struct PredictiveCriteria {
  std::vector<double> abs_deviation;    // per replicate
  std::vector<double> mean_abs_pct;     // per replicate
  double mean_ad = 0.0;
  double mean_mape = 0.0;
};

// observed and replicated tables share one flattened cell layout; zero
// observed cells are excluded from the percentage error, kept in AD
PredictiveCriteria predictive_criteria(const std::vector<std::vector<double>>& replicated,
                                       std::span<const double> observed);

struct ForecastTables {
  std::vector<int> margin_vars;            // subset of variables tabulated
  std::vector<int> dims;                   // level counts of those variables
  std::vector<std::vector<double>> tables; // one count table per replicate
};

// Per retained draw: push the final-wave states `horizon` steps forward,
// extend the ladder with stationary components until its tail is
// negligible, then tabulate n_future simulated subjects on the margin.
// horizon 0 reuses the fitted final-wave weights.
ForecastTables forecast_table(const PosteriorDraws& draws, int horizon, int n_future,
                              const std::vector<int>& margin_vars, std::uint64_t seed);

// Matched-replicate forecast from a single fixed mixture (the independence
// baseline): multinomial tables with the same subject count.
ForecastTables forecast_from_mixture(const ParafacMixture& mixture, int time_index,
                                     int replicates, int n_future,
                                     const std::vector<int>& margin_vars, std::uint64_t seed);

// Observed margin counts of one wave (subjects with any masked margin
// variable are dropped).
std::vector<double> observed_margin(const Dataset& data, int t,
                                    const std::vector<int>& margin_vars);

}  // namespace dptf
