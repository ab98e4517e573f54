#include "dptf/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "dptf/distributions.hpp"
#include "dptf/kernels.hpp"

namespace dptf {

void SimulationSpec::validate() const {
  if (horizon < 1 || num_vars < 1 || levels < 2) {
    throw std::invalid_argument("simulation spec: bad shape");
  }
  if (holdout_waves < 0) throw std::invalid_argument("simulation spec: negative holdout");
  if (!wave_sizes.empty() &&
      static_cast<int>(wave_sizes.size()) != horizon + holdout_waves) {
    throw std::invalid_argument("simulation spec: wave size list must cover every wave");
  }
  for (int n : wave_sizes) {
    if (n < 0) throw std::invalid_argument("simulation spec: negative wave size");
  }
  if (kind == Case::loglinear_rw) {
    if (levels != 2) throw std::invalid_argument("loglinear generator: variables must be binary");
    if (num_vars > 15) {
      throw std::invalid_argument("loglinear generator: refuses p > 15 (full table materialized)");
    }
    if (!(rw_var > 0.0)) throw std::invalid_argument("loglinear generator: rw variance must be > 0");
  } else {
    hyper.validate();
    if (!(dirichlet_a > 0.0)) throw std::invalid_argument("simulation spec: dirichlet_a must be > 0");
  }
}

std::vector<int> SimulationSpec::resolved_wave_sizes() const {
  const int total = horizon + holdout_waves;
  if (!wave_sizes.empty()) return wave_sizes;
  static const int reference[10] = {120, 110, 150, 80, 100, 120, 100, 140, 110, 150};
  std::vector<int> sizes(total);
  for (int t = 0; t < total; ++t) {
    sizes[t] = reference[(t * 10) / total % 10];
  }
  return sizes;
}

namespace {

// component index from a weight ladder with negligible remainder: inverse
// cdf walk, the tail mass collapses onto the last component
int sample_ladder_index(Rng& rng, const std::vector<double>& nu) {
  double target = rng.uniform();
  for (std::size_t h = 0; h < nu.size(); ++h) {
    target -= nu[h];
    if (target < 0.0) return static_cast<int>(h);
  }
  return static_cast<int>(nu.size()) - 1;
}

SimulationOutput package_output(const SimulationSpec& spec, const CategoricalSchema& schema,
                                AtomTable atoms, std::vector<std::vector<double>> weights,
                                std::vector<ObservationBlock> waves) {
  const int total = spec.horizon + spec.holdout_waves;
  std::vector<double> labels(total);
  for (int t = 0; t < total; ++t) labels[t] = t + 1;

  std::vector<ObservationBlock> fit_waves(waves.begin(), waves.begin() + spec.horizon);
  std::vector<double> fit_labels(labels.begin(), labels.begin() + spec.horizon);
  Dataset data(schema, std::move(fit_waves), std::move(fit_labels));

  std::optional<Dataset> holdout;
  if (spec.holdout_waves > 0) {
    std::vector<ObservationBlock> rest(waves.begin() + spec.horizon, waves.end());
    std::vector<double> rest_labels(labels.begin() + spec.horizon, labels.end());
    holdout.emplace(schema, std::move(rest), std::move(rest_labels));
  }
  return SimulationOutput{std::move(data), std::move(holdout),
                          ParafacMixture(schema, std::move(atoms), std::move(weights))};
}

}  // namespace

SimulationOutput generate_model_based(const SimulationSpec& spec) {
  spec.validate();
  if (spec.kind != SimulationSpec::Case::model_based) {
    throw std::invalid_argument("generate_model_based: wrong case");
  }
  const int total = spec.horizon + spec.holdout_waves;
  const CategoricalSchema schema(std::vector<int>(spec.num_vars, spec.levels));
  Rng rng(spec.seed);

  // grow the trajectory until every wave's ladder tail is below tolerance
  StateTrajectory traj(total, 0);
  const Link link;  // probit
  std::vector<double> state_col(total), signal_col(total);
  std::vector<WeightLadder> ladders;
  constexpr int kMaxColumns = 4000;
  for (;;) {
    for (int grow = 0; grow < 8; ++grow) {
      sample_prior_column(spec.hyper, rng, state_col, signal_col);
      traj.append_column(state_col, signal_col);
    }
    ladders.clear();
    double worst = 0.0;
    for (int t = 0; t < total; ++t) {
      ladders.push_back(weights_from_states(traj.signal_row(t, traj.columns()), link));
      worst = std::max(worst, ladders.back().remainder);
    }
    if (worst < spec.truncation_tol) break;
    if (traj.columns() > kMaxColumns) {
      throw std::runtime_error("generate_model_based: ladder tail refuses to vanish");
    }
  }
  const int k = traj.columns();

  AtomTable atoms(k, std::vector<std::vector<double>>(spec.num_vars));
  const std::vector<double> conc(spec.levels, spec.dirichlet_a);
  for (int h = 0; h < k; ++h) {
    for (int j = 0; j < spec.num_vars; ++j) atoms[h][j] = sample_dirichlet(rng, conc);
  }

  std::vector<std::vector<double>> weights(total);
  for (int t = 0; t < total; ++t) weights[t] = ladders[t].nu;

  const auto sizes = spec.resolved_wave_sizes();
  std::vector<ObservationBlock> waves;
  waves.reserve(total);
  for (int t = 0; t < total; ++t) {
    ObservationBlock wave(sizes[t], spec.num_vars);
    for (int i = 0; i < sizes[t]; ++i) {
      const int h = sample_ladder_index(rng, weights[t]);
      for (int j = 0; j < spec.num_vars; ++j) {
        wave.set(i, j, sample_categorical(rng, atoms[h][j]));
      }
    }
    waves.push_back(std::move(wave));
  }
  return package_output(spec, schema, std::move(atoms), std::move(weights), std::move(waves));
}

SimulationOutput generate_loglinear_rw(const SimulationSpec& spec) {
  spec.validate();
  if (spec.kind != SimulationSpec::Case::loglinear_rw) {
    throw std::invalid_argument("generate_loglinear_rw: wrong case");
  }
  const int total = spec.horizon + spec.holdout_waves;
  const int p = spec.num_vars;
  const CategoricalSchema schema(std::vector<int>(p, 2));
  Rng rng(spec.seed);

  const int cells = 1 << p;
  const double rw_sd = std::sqrt(spec.rw_var);
  std::vector<double> mains(p, 0.0);
  std::vector<double> inter(static_cast<std::size_t>(p) * p, 0.0);

  // cell tensors per time as degenerate one-cell components
  AtomTable atoms(cells, std::vector<std::vector<double>>(p));
  for (int c = 0; c < cells; ++c) {
    for (int j = 0; j < p; ++j) {
      atoms[c][j] = {0.0, 0.0};
      atoms[c][j][(c >> j) & 1] = 1.0;
    }
  }

  std::vector<std::vector<double>> weights(total, std::vector<double>(cells, 0.0));
  std::vector<double> log_pmf(cells);
  for (int t = 0; t < total; ++t) {
    // coefficients start at zero and take their first step at the first wave
    for (int j = 0; j < p; ++j) mains[j] += rw_sd * sample_normal(rng);
    for (int j = 0; j < p; ++j) {
      for (int jp = j + 1; jp < p; ++jp) {
        inter[static_cast<std::size_t>(j) * p + jp] += rw_sd * sample_normal(rng);
      }
    }
    double max_log = -std::numeric_limits<double>::infinity();
    for (int c = 0; c < cells; ++c) {
      double lp = 0.0;
      for (int j = 0; j < p; ++j) {
        if (((c >> j) & 1) != 0) continue;  // active level is the first one
        lp += mains[j];
        for (int jp = j + 1; jp < p; ++jp) {
          if (((c >> jp) & 1) == 0) lp += inter[static_cast<std::size_t>(j) * p + jp];
        }
      }
      log_pmf[c] = lp;
      max_log = std::max(max_log, lp);
    }
    double norm = 0.0;
    for (int c = 0; c < cells; ++c) {
      weights[t][c] = std::exp(log_pmf[c] - max_log);
      norm += weights[t][c];
    }
    for (int c = 0; c < cells; ++c) weights[t][c] /= norm;
  }

  const auto sizes = spec.resolved_wave_sizes();
  std::vector<ObservationBlock> waves;
  waves.reserve(total);
  for (int t = 0; t < total; ++t) {
    ObservationBlock wave(sizes[t], p);
    for (int i = 0; i < sizes[t]; ++i) {
      const int c = sample_categorical(rng, weights[t]);
      for (int j = 0; j < p; ++j) wave.set(i, j, (c >> j) & 1);
    }
    waves.push_back(std::move(wave));
  }
  return package_output(spec, schema, std::move(atoms), std::move(weights), std::move(waves));
}

SimulationOutput generate(const SimulationSpec& spec) {
  return spec.kind == SimulationSpec::Case::model_based ? generate_model_based(spec)
                                                        : generate_loglinear_rw(spec);
}

double pearson_correlation(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size() || x.empty()) {
    throw std::invalid_argument("pearson_correlation: size mismatch");
  }
  const double n = static_cast<double>(x.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0.0, syy = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    syy += (y[i] - my) * (y[i] - my);
    sxy += (x[i] - mx) * (y[i] - my);
  }
  if (sxx == 0.0 || syy == 0.0) return std::numeric_limits<double>::quiet_NaN();
  return sxy / std::sqrt(sxx * syy);
}

namespace {

RhoRecovery score_recovery(const std::vector<std::vector<double>>& means_by_time,
                           const ParafacMixture& truth, const std::vector<int>& times) {
  const int p = truth.schema().num_vars();
  RhoRecovery out;
  out.times = times;
  out.pairs = p * (p - 1) / 2;
  std::vector<double> pooled_true, pooled_mean;
  for (std::size_t ti = 0; ti < times.size(); ++ti) {
    std::vector<double> truths, means;
    truths.reserve(out.pairs);
    means.reserve(out.pairs);
    std::size_t pair = 0;
    for (int j = 0; j < p; ++j) {
      for (int jp = j + 1; jp < p; ++jp, ++pair) {
        truths.push_back(truth.pairwise_dependence(times[ti], j, jp));
        means.push_back(means_by_time[ti].at(pair));
      }
    }
    out.per_time.push_back(pearson_correlation(truths, means));
    pooled_true.insert(pooled_true.end(), truths.begin(), truths.end());
    pooled_mean.insert(pooled_mean.end(), means.begin(), means.end());
  }
  out.pooled = pearson_correlation(pooled_true, pooled_mean);
  return out;
}

}  // namespace

RhoRecovery evaluate_rho_recovery(const PosteriorDraws& draws, const ParafacMixture& truth,
                                  const std::vector<int>& times) {
  if (!(truth.schema() == draws.schema)) {
    throw std::invalid_argument("evaluate_rho_recovery: schema mismatch");
  }
  if (draws.draws.empty()) throw std::invalid_argument("evaluate_rho_recovery: no draws");
  const int p = draws.schema.num_vars();
  const int pairs = p * (p - 1) / 2;

  std::vector<std::vector<double>> sums(times.size(), std::vector<double>(pairs, 0.0));
  for (const auto& draw : draws.draws) {
    const ParafacMixture mixture = draws.mixture_of(draw);
    const auto entries = dependence_table(ExecPolicy::parallel, mixture);
    // entries are ordered pair-major, time-minor over the fit horizon
    for (std::size_t ti = 0; ti < times.size(); ++ti) {
      const int t = times[ti];
      if (t < 0 || t >= draws.horizon) {
        throw std::invalid_argument("evaluate_rho_recovery: time outside the fitted horizon");
      }
      for (int pair = 0; pair < pairs; ++pair) {
        sums[ti][pair] += entries[static_cast<std::size_t>(pair) * draws.horizon + t].rho;
      }
    }
  }
  for (auto& row : sums) {
    for (double& v : row) v /= static_cast<double>(draws.draws.size());
  }
  return score_recovery(sums, truth, times);
}

RhoRecovery evaluate_rho_recovery_means(const std::vector<std::vector<double>>& means_by_time,
                                        const ParafacMixture& truth,
                                        const std::vector<int>& times) {
  if (means_by_time.size() != times.size()) {
    throw std::invalid_argument("evaluate_rho_recovery_means: one mean table per time");
  }
  return score_recovery(means_by_time, truth, times);
}

PredictiveCriteria predictive_criteria(const std::vector<std::vector<double>>& replicated,
                                       std::span<const double> observed) {
  if (replicated.empty()) throw std::invalid_argument("predictive_criteria: no replicates");
  PredictiveCriteria out;
  out.abs_deviation.reserve(replicated.size());
  out.mean_abs_pct.reserve(replicated.size());
  for (const auto& rep : replicated) {
    if (rep.size() != observed.size()) {
      throw std::invalid_argument("predictive_criteria: table size mismatch");
    }
    double ad = 0.0, mape = 0.0;
    int positive_cells = 0;
    for (std::size_t c = 0; c < observed.size(); ++c) {
      const double diff = std::fabs(rep[c] - observed[c]);
      ad += diff;
      if (observed[c] > 0.0) {
        mape += diff / observed[c];
        ++positive_cells;
      }
    }
    out.abs_deviation.push_back(ad);
    out.mean_abs_pct.push_back(positive_cells > 0 ? mape / positive_cells : 0.0);
  }
  for (double v : out.abs_deviation) out.mean_ad += v;
  for (double v : out.mean_abs_pct) out.mean_mape += v;
  out.mean_ad /= static_cast<double>(out.abs_deviation.size());
  out.mean_mape /= static_cast<double>(out.mean_abs_pct.size());
  return out;
}

namespace {

std::vector<int> margin_dims(const CategoricalSchema& schema, const std::vector<int>& vars) {
  if (vars.empty()) throw std::invalid_argument("forecast: empty margin");
  std::vector<int> dims;
  int previous = -1;
  for (int j : vars) {
    if (j <= previous || j >= schema.num_vars()) {
      throw std::invalid_argument("forecast: margin variables must be strictly increasing");
    }
    previous = j;
    dims.push_back(schema.levels(j));
  }
  return dims;
}

int flat_margin_index(const std::vector<int>& dims, std::span<const int> levels) {
  int idx = 0;
  for (std::size_t m = 0; m < dims.size(); ++m) idx = idx * dims[m] + levels[m];
  return idx;
}

}  // namespace

std::vector<double> observed_margin(const Dataset& data, int t,
                                    const std::vector<int>& margin_vars) {
  const auto dims = margin_dims(data.schema(), margin_vars);
  int cells = 1;
  for (int d : dims) cells *= d;
  std::vector<double> counts(cells, 0.0);
  const auto& wave = data.wave(t);
  std::vector<int> levels(margin_vars.size());
  for (int i = 0; i < wave.num_subjects(); ++i) {
    bool complete = true;
    for (std::size_t m = 0; m < margin_vars.size(); ++m) {
      if (wave.missing(i, margin_vars[m])) {
        complete = false;
        break;
      }
      levels[m] = wave.level(i, margin_vars[m]);
    }
    if (complete) counts[flat_margin_index(dims, levels)] += 1.0;
  }
  return counts;
}

ForecastTables forecast_table(const PosteriorDraws& draws, int horizon, int n_future,
                              const std::vector<int>& margin_vars, std::uint64_t seed) {
  if (draws.draws.empty()) throw std::invalid_argument("forecast_table: no draws");
  if (horizon < 0 || n_future < 1) throw std::invalid_argument("forecast_table: bad horizon/size");
  const auto& schema = draws.schema;
  const auto dims = margin_dims(schema, margin_vars);
  int cells = 1;
  for (int d : dims) cells *= d;

  ForecastTables out;
  out.margin_vars = margin_vars;
  out.dims = dims;
  out.tables.assign(draws.draws.size(), std::vector<double>(cells, 0.0));

  const Link link;  // probit weights
  constexpr double kTailTol = 1e-9;
  constexpr int kMaxExtra = 500;

  for (std::size_t d = 0; d < draws.draws.size(); ++d) {
    const Draw& draw = draws.draws[d];
    Rng rng = Rng::keyed(seed, {0x4f5eull, static_cast<std::uint64_t>(d)});
    StateHyper hyper{draw.mu, draw.phi, draw.var_obs, draw.var_state};

    // fitted components at the forecast time
    std::vector<double> nu;
    if (horizon == 0) {
      nu = draw.weights.empty() ? std::vector<double>{} : draw.weights[draws.horizon - 1];
    } else {
      const auto ladders = forecast_states(draw.last_state, hyper, link, horizon, 1, rng);
      nu = ladders[0][horizon - 1].nu;
    }

    // extend with unoccupied components: independent of the data, their
    // signal at any single time follows the stationary marginal
    double tail = 1.0;
    for (double w : nu) tail -= w;
    std::vector<std::vector<double>> extra_atoms;
    const double sig_mean = hyper.stationary_mean();
    const double sig_sd = std::sqrt(hyper.signal_var());
    while (tail > kTailTol && static_cast<int>(extra_atoms.size()) < kMaxExtra) {
      const double g = link(sample_normal(rng, sig_mean, sig_sd));
      nu.push_back(g * tail);
      tail *= (1.0 - g);
      extra_atoms.emplace_back();  // flattened per-variable atoms
      auto& flat = extra_atoms.back();
      for (int j = 0; j < schema.num_vars(); ++j) {
        const std::vector<double> conc(schema.levels(j), 1.0);
        const auto atom = sample_dirichlet(rng, conc);
        flat.insert(flat.end(), atom.begin(), atom.end());
      }
    }

    std::vector<int> levels(margin_vars.size());
    for (int s = 0; s < n_future; ++s) {
      double target = rng.uniform();
      int comp = -1;
      for (std::size_t h = 0; h < nu.size(); ++h) {
        target -= nu[h];
        if (target < 0.0) {
          comp = static_cast<int>(h);
          break;
        }
      }
      if (comp >= 0 && comp < draw.k_star) {
        for (std::size_t m = 0; m < margin_vars.size(); ++m) {
          levels[m] = sample_categorical(rng, draw.atoms[comp][margin_vars[m]]);
        }
      } else if (comp >= draw.k_star) {
        const auto& flat = extra_atoms[comp - draw.k_star];
        std::size_t offset = 0;
        for (int j = 0, m = 0; j < schema.num_vars(); ++j) {
          const int dlev = schema.levels(j);
          if (m < static_cast<int>(margin_vars.size()) && margin_vars[m] == j) {
            levels[m] = sample_categorical(
                rng, std::span<const double>(flat.data() + offset, dlev));
            ++m;
          }
          offset += dlev;
        }
      } else {
        // residual tail below tolerance: fresh-component predictive, which
        // is uniform under the unit Dirichlet prior
        for (std::size_t m = 0; m < margin_vars.size(); ++m) {
          levels[m] = static_cast<int>(rng.next() % static_cast<std::uint64_t>(dims[m]));
        }
      }
      out.tables[d][flat_margin_index(dims, levels)] += 1.0;
    }
  }
  return out;
}

ForecastTables forecast_from_mixture(const ParafacMixture& mixture, int time_index,
                                     int replicates, int n_future,
                                     const std::vector<int>& margin_vars, std::uint64_t seed) {
  const auto dims = margin_dims(mixture.schema(), margin_vars);
  int cells = 1;
  for (int d : dims) cells *= d;

  // margin pmf of the mixture
  std::vector<double> pmf(cells, 0.0);
  std::vector<int> levels(margin_vars.size(), 0);
  for (int c = 0; c < cells; ++c) {
    int rem = c;
    for (int m = static_cast<int>(dims.size()) - 1; m >= 0; --m) {
      levels[m] = rem % dims[m];
      rem /= dims[m];
    }
    double prob = 0.0;
    for (int h = 0; h < mixture.num_components(); ++h) {
      double term = mixture.weights()[time_index][h];
      for (std::size_t m = 0; m < margin_vars.size(); ++m) {
        term *= mixture.atoms()[h][margin_vars[m]][levels[m]];
      }
      prob += term;
    }
    pmf[c] = prob;
  }

  ForecastTables out;
  out.margin_vars = margin_vars;
  out.dims = dims;
  out.tables.assign(replicates, std::vector<double>(cells, 0.0));
  for (int r = 0; r < replicates; ++r) {
    Rng rng = Rng::keyed(seed, {0x8a2bull, static_cast<std::uint64_t>(r)});
    for (int s = 0; s < n_future; ++s) {
      out.tables[r][sample_categorical(rng, pmf)] += 1.0;
    }
  }
  return out;
}

}  // namespace dptf
