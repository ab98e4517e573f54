#include "dptf/sampler.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "dptf/distributions.hpp"

namespace dptf {

DirichletHyper PriorConfig::atom_hyper(const CategoricalSchema& schema) const {
  if (dirichlet.empty()) return DirichletHyper::symmetric(schema, dirichlet_a);
  DirichletHyper hyper{dirichlet};
  hyper.validate(schema);
  return hyper;
}

void ChainConfig::validate() const {
  if (iterations < 1) throw std::invalid_argument("chain config: iterations must be >= 1");
  if (burnin < 0 || burnin >= iterations) {
    throw std::invalid_argument("chain config: burn-in must lie in [0, iterations)");
  }
  if (thin < 1) throw std::invalid_argument("chain config: thinning must be >= 1");
  if (init_components < 1) {
    throw std::invalid_argument("chain config: need at least one initial component");
  }
  if (!(prior.var_mu0 > 0.0) || !(prior.shape_obs > 0.0) || !(prior.scale_obs > 0.0) ||
      !(prior.shape_state > 0.0) || !(prior.scale_state > 0.0)) {
    throw std::invalid_argument("chain config: prior hyperparameters must be positive");
  }
  if (freeze_weights && fixed_ladders.empty()) {
    throw std::invalid_argument("chain config: frozen weights need a ladder fixture");
  }
}

ParafacMixture PosteriorDraws::mixture_of(const Draw& draw) const {
  return ParafacMixture(schema, draw.atoms, draw.weights);
}

double PosteriorDraws::mean_cell_probability(int t, std::span<const int> cell) const {
  if (draws.empty()) throw std::logic_error("posterior draws: empty");
  double acc = 0.0;
  for (const auto& draw : draws) acc += mixture_of(draw).cell_probability(t, cell).value;
  return acc / static_cast<double>(draws.size());
}

double PosteriorDraws::mean_dependence(int t, int j, int jp) const {
  if (draws.empty()) throw std::logic_error("posterior draws: empty");
  double acc = 0.0;
  for (const auto& draw : draws) acc += mixture_of(draw).pairwise_dependence(t, j, jp);
  return acc / static_cast<double>(draws.size());
}

DynamicSampler::DynamicSampler(const Dataset& data, const ChainConfig& config)
    : data_(data), config_(config), atom_hyper_(config.prior.atom_hyper(data.schema())) {
  config_.validate();
}

void DynamicSampler::append_prior_component(Rng traj_rng, const DrawContext& ctx, int column) {
  const int T = data_.num_waves();
  std::vector<double> state_col(T), signal_col(T);
  sample_prior_column(state_.hyper, traj_rng, state_col, signal_col);
  state_.traj.append_column(state_col, signal_col);

  const int p = data_.schema().num_vars();
  std::vector<std::vector<double>> atom(p);
  for (int j = 0; j < p; ++j) {
    Rng rng = ctx.site(kStepExtendAtom, static_cast<std::uint64_t>(column),
                       static_cast<std::uint64_t>(j));
    atom[j] = sample_dirichlet(rng, atom_hyper_.concentration[j]);
  }
  state_.atoms.push_back(std::move(atom));
}

void DynamicSampler::init() {
  const int T = data_.num_waves();
  const int p = data_.schema().num_vars();
  const int k0 = config_.init_components;
  const DrawContext ctx = context(0);

  auto& prior = config_.prior;
  state_.hyper.mu = prior.mu0;
  state_.hyper.phi = 0.0;
  state_.hyper.var_obs =
      prior.shape_obs > 2.0 ? prior.scale_obs / (prior.shape_obs - 2.0) : prior.scale_obs;
  state_.hyper.var_state =
      prior.shape_state > 2.0 ? prior.scale_state / (prior.shape_state - 2.0) : prior.scale_state;

  const int columns = config_.freeze_weights
                          ? static_cast<int>(config_.fixed_ladders.front().size())
                          : k0;
  state_.traj = StateTrajectory(T, columns);
  for (int h = 0; h < columns; ++h) {
    for (int t = 0; t < T; ++t) {
      state_.traj.state(t, h) = state_.hyper.stationary_mean();
      state_.traj.signal(t, h) = state_.traj.state(t, h);
    }
  }

  state_.atoms.assign(columns, std::vector<std::vector<double>>(p));
  for (int h = 0; h < columns; ++h) {
    for (int j = 0; j < p; ++j) {
      Rng rng = ctx.site(kStepExtendAtom, static_cast<std::uint64_t>(h),
                         static_cast<std::uint64_t>(j));
      state_.atoms[h][j] = sample_dirichlet(rng, atom_hyper_.concentration[j]);
    }
  }

  state_.labels.assign(T, {});
  state_.slices.assign(T, {});
  int max_label = -1;
  for (int t = 0; t < T; ++t) {
    const int n = data_.wave(t).num_subjects();
    state_.labels[t].resize(n);
    state_.slices[t].assign(n, 0.0);
    for (int i = 0; i < n; ++i) {
      Rng rng = ctx.site(kStepInit, static_cast<std::uint64_t>(t), static_cast<std::uint64_t>(i));
      state_.labels[t][i] = static_cast<int>(rng.next() % static_cast<std::uint64_t>(columns));
      max_label = std::max(max_label, state_.labels[t][i]);
    }
  }
  state_.k_star = max_label + 1;
  state_.cover = columns;
  state_.latents = LatentTable{};
  refresh_ladders();
  diag_ = ChainDiagnostics{};
}

void DynamicSampler::init_from_prior(Rng& rng) {
  const int T = data_.num_waves();
  const int p = data_.schema().num_vars();
  const auto& prior = config_.prior;

  state_.hyper.mu = sample_normal(rng, prior.mu0, std::sqrt(prior.var_mu0));
  state_.hyper.phi = sample_uniform(rng, -1.0, 1.0);
  state_.hyper.var_obs = sample_inverse_gamma(rng, prior.shape_obs / 2.0, prior.scale_obs / 2.0);
  state_.hyper.var_state =
      sample_inverse_gamma(rng, prior.shape_state / 2.0, prior.scale_state / 2.0);

  state_.traj = StateTrajectory(T, 0);
  state_.atoms.clear();
  auto extend = [&]() {
    std::vector<double> state_col(T), signal_col(T);
    sample_prior_column(state_.hyper, rng, state_col, signal_col);
    state_.traj.append_column(state_col, signal_col);
    std::vector<std::vector<double>> atom(p);
    for (int j = 0; j < p; ++j) atom[j] = sample_dirichlet(rng, atom_hyper_.concentration[j]);
    state_.atoms.push_back(std::move(atom));
  };
  for (int h = 0; h < config_.init_components; ++h) extend();

  // labels by walking the stick prefix until the uniform target is passed
  state_.labels.assign(T, {});
  state_.slices.assign(T, {});
  refresh_ladders();
  int max_label = -1;
  for (int t = 0; t < T; ++t) {
    const int n = data_.wave(t).num_subjects();
    state_.labels[t].resize(n);
    state_.slices[t].resize(n);
    for (int i = 0; i < n; ++i) {
      const double target = rng.uniform();
      double cumulative = 0.0;
      int h = 0;
      for (;; ++h) {
        if (h == state_.traj.columns()) {
          extend();
          refresh_ladders();
          if (h > 100000) throw std::runtime_error("init_from_prior: stick walk diverged");
        }
        cumulative += state_.ladders[t].nu[h];
        if (target < cumulative) break;
      }
      state_.labels[t][i] = h;
      max_label = std::max(max_label, h);
      state_.slices[t][i] = state_.ladders[t].nu[h] * rng.uniform();
    }
  }
  state_.k_star = max_label + 1;

  double slice_min = 1.0;
  bool any = false;
  for (const auto& wave : state_.slices) {
    for (double u : wave) {
      slice_min = std::min(slice_min, u);
      any = true;
    }
  }
  if (any) {
    while (minimal_cover(state_.ladders, slice_min) < 0) {
      extend();
      refresh_ladders();
    }
    state_.cover = minimal_cover(state_.ladders, slice_min);
  } else {
    state_.cover = state_.traj.columns();
  }

  // probit latents consistent with the labels
  state_.latents.offsets.assign(T, {});
  state_.latents.values.assign(T, {});
  for (int t = 0; t < T; ++t) {
    const int n = static_cast<int>(state_.labels[t].size());
    state_.latents.offsets[t].resize(n);
    std::size_t total = 0;
    for (int i = 0; i < n; ++i) {
      state_.latents.offsets[t][i] = total;
      total += static_cast<std::size_t>(state_.labels[t][i]) + 1;
    }
    state_.latents.values[t].resize(total);
    for (int i = 0; i < n; ++i) {
      const int own = state_.labels[t][i];
      double* z = state_.latents.values[t].data() + state_.latents.offsets[t][i];
      for (int h = 0; h < own; ++h) {
        z[h] = sample_truncated_normal(rng, state_.traj.signal(t, h), 1.0, HalfLine::negative);
      }
      z[own] = sample_truncated_normal(rng, state_.traj.signal(t, own), 1.0, HalfLine::positive);
    }
  }

  // observations from the sampled component memberships
  for (int t = 0; t < T; ++t) {
    auto& wave = data_.wave_for_update(t);
    for (int i = 0; i < wave.num_subjects(); ++i) {
      for (int j = 0; j < p; ++j) {
        if (wave.missing(i, j)) continue;
        wave.set(i, j, sample_categorical(rng, state_.atoms[state_.labels[t][i]][j]));
      }
    }
  }
  diag_ = ChainDiagnostics{};
}

void DynamicSampler::refresh_ladders() {
  const int T = data_.num_waves();
  state_.ladders.assign(T, {});
  if (config_.freeze_weights) {
    for (int t = 0; t < T; ++t) {
      const auto& fixture = config_.fixed_ladders[t % config_.fixed_ladders.size()];
      WeightLadder ladder;
      ladder.nu = fixture;
      double total = 0.0;
      for (double w : ladder.nu) total += w;
      ladder.remainder = std::max(0.0, 1.0 - total);
      state_.ladders[t] = std::move(ladder);
    }
    return;
  }
  for (int t = 0; t < T; ++t) {
    state_.ladders[t] =
        weights_from_states(state_.traj.signal_row(t, state_.traj.columns()), config_.link);
  }
}

void DynamicSampler::update_atoms(int sweep_index) {
  if (state_.k_star == 0) return;
  LevelCounts counts;
  count_levels(config_.exec, data_, state_.labels, state_.k_star, counts);
  draw_atoms(context(sweep_index), config_.exec, atom_hyper_, counts, state_.k_star,
             state_.atoms);
}

void DynamicSampler::update_latents(int sweep_index) {
  if (config_.link.kind() != Link::Kind::probit || config_.generic_link_update) {
    throw std::logic_error("update_latents: latent augmentation requires the probit path");
  }
  draw_probit_latents(context(sweep_index), config_.exec, state_.labels, state_.traj,
                      state_.latents);
}

void DynamicSampler::update_signal(int sweep_index) {
  const int T = data_.num_waves();
  const int columns = state_.traj.columns();
  std::vector<std::vector<double>> sums;
  std::vector<std::vector<int>> counts;
  latent_column_sums(config_.exec, state_.labels, state_.latents, columns, sums, counts);

  const DrawContext ctx = context(sweep_index);
  const double inv_var_obs = 1.0 / state_.hyper.var_obs;
  for_each_index(config_.exec, T * columns, [&](int idx) {
    const int t = idx / columns;
    const int h = idx % columns;
    Rng rng = ctx.site(kStepSignal, static_cast<std::uint64_t>(t), static_cast<std::uint64_t>(h));
    const double var = 1.0 / (counts[t][h] + inv_var_obs);
    const double mean = var * (sums[t][h] + inv_var_obs * state_.traj.state(t, h));
    state_.traj.signal(t, h) = sample_normal(rng, mean, std::sqrt(var));
  });
  refresh_ladders();
}

void DynamicSampler::update_signal_generic(int sweep_index) {
  const int T = data_.num_waves();
  const int columns = state_.traj.columns();
  const Link& link = config_.link;

  // per (t,h): how many subjects sit at h and how many sit past it
  std::vector<std::vector<int>> at(T, std::vector<int>(columns, 0));
  std::vector<std::vector<int>> past(T, std::vector<int>(columns, 0));
  for (int t = 0; t < T; ++t) {
    for (int label : state_.labels[t]) {
      if (label < columns) at[t][label] += 1;
      for (int h = 0; h < std::min(label, columns); ++h) past[t][h] += 1;
    }
  }

  const DrawContext ctx = context(sweep_index);
  const double var_obs = state_.hyper.var_obs;
  std::vector<std::uint8_t> accepted(static_cast<std::size_t>(T) * columns, 0);

  for_each_index(config_.exec, T * columns, [&](int idx) {
    const int t = idx / columns;
    const int h = idx % columns;
    Rng rng = ctx.site(kStepSignal, static_cast<std::uint64_t>(t), static_cast<std::uint64_t>(h));
    const double prior_mean = state_.traj.state(t, h);
    const int n_at = at[t][h];
    const int n_past = past[t][h];

    auto log_target = [&](double w) {
      double value = -0.5 * (w - prior_mean) * (w - prior_mean) / var_obs;
      if (n_at > 0) value += n_at * link.log_value(w);
      if (n_past > 0) value += n_past * link.log_complement(w);
      return value;
    };
    auto dlog_target = [&](double w) {
      double value = -(w - prior_mean) / var_obs;
      if (n_at > 0) value += n_at * std::exp(link.log_derivative(w) - link.log_value(w));
      if (n_past > 0) value -= n_past * std::exp(link.log_derivative(w) - link.log_complement(w));
      return value;
    };

    // bracket the root of the gradient, then bisect
    double lo = prior_mean, hi = prior_mean;
    double width = std::sqrt(var_obs) + 1.0;
    while (dlog_target(lo) < 0.0) lo -= width;
    while (dlog_target(hi) > 0.0) hi += width;
    for (int it = 0; it < 200 && hi - lo > 1e-10 * (1.0 + std::fabs(lo)); ++it) {
      const double mid = 0.5 * (lo + hi);
      (dlog_target(mid) > 0.0 ? lo : hi) = mid;
    }
    const double mode = 0.5 * (lo + hi);
    const double delta = 1e-5 * (1.0 + std::fabs(mode));
    const double curvature = (dlog_target(mode + delta) - dlog_target(mode - delta)) / (2.0 * delta);

    const double current = state_.traj.signal(t, h);
    double proposal, log_ratio;
    if (curvature < -1e-12) {
      const double prop_var = -1.0 / curvature;
      proposal = sample_normal(rng, mode, std::sqrt(prop_var));
      log_ratio = log_target(proposal) - log_target(current) +
                  0.5 * ((proposal - mode) * (proposal - mode) -
                         (current - mode) * (current - mode)) /
                      prop_var;
    } else {
      // flat local geometry: symmetric random-walk fallback
      proposal = sample_normal(rng, current, 0.5);
      log_ratio = log_target(proposal) - log_target(current);
    }
    if (std::log(rng.uniform()) < log_ratio) {
      state_.traj.signal(t, h) = proposal;
      accepted[idx] = 1;
    }
  });

  diag_.signal_proposals += static_cast<long long>(T) * columns;
  for (auto flag : accepted) diag_.signal_accepts += flag;
  refresh_ladders();
}

void DynamicSampler::update_slices(int sweep_index) {
  draw_slices(context(sweep_index), config_.exec, state_.labels, state_.ladders, state_.slices);
}

void DynamicSampler::extend_columns_to_cover(int sweep_index, double slice_min) {
  const DrawContext ctx = context(sweep_index);
  int cover = minimal_cover(state_.ladders, slice_min);
  while (cover < 0) {
    const int column = state_.traj.columns();
    append_prior_component(ctx.site(kStepExtendColumn, static_cast<std::uint64_t>(column)), ctx,
                           column);
    refresh_ladders();
    cover = minimal_cover(state_.ladders, slice_min);
  }
  state_.cover = cover;
}

void DynamicSampler::update_labels(int sweep_index) {
  double slice_min = 1.0;
  bool any_subject = false;
  for (const auto& wave : state_.slices) {
    for (double u : wave) {
      slice_min = std::min(slice_min, u);
      any_subject = true;
    }
  }
  if (!any_subject) {
    state_.k_star = 0;
    return;
  }

  if (config_.freeze_weights) {
    const int cover = minimal_cover(state_.ladders, slice_min);
    if (cover < 0) throw std::logic_error("update_labels: frozen ladder does not cover slices");
    state_.cover = cover;
  } else {
    extend_columns_to_cover(sweep_index, slice_min);
  }

  draw_labels(context(sweep_index), config_.exec, data_, state_.atoms, state_.ladders,
              state_.slices, state_.cover, state_.labels);
  int max_label = -1;
  for (const auto& wave : state_.labels) {
    for (int label : wave) max_label = std::max(max_label, label);
  }
  state_.k_star = max_label + 1;
}

void DynamicSampler::update_states(int sweep_index) {
  const DrawContext ctx = context(sweep_index);
  const int columns = state_.traj.columns();
  const int T = data_.num_waves();
  for_each_index(config_.exec, columns, [&](int h) {
    Rng rng = ctx.site(kStepStates, static_cast<std::uint64_t>(h));
    if (h < state_.k_star) {
      const auto draw = ffbs_draw(state_.traj.signal_column(h), state_.hyper, rng);
      auto col = state_.traj.mutable_state_column(h);
      std::copy(draw.begin(), draw.end(), col.begin());
    } else {
      // unoccupied: the conditional is the prior joint of (state, signal)
      std::vector<double> state_col(T), signal_col(T);
      sample_prior_column(state_.hyper, rng, state_col, signal_col);
      auto sc = state_.traj.mutable_state_column(h);
      auto gc = state_.traj.mutable_signal_column(h);
      std::copy(state_col.begin(), state_col.end(), sc.begin());
      std::copy(signal_col.begin(), signal_col.end(), gc.begin());
    }
  });
  refresh_ladders();
}

void DynamicSampler::update_mean(int sweep_index) {
  Rng rng = context(sweep_index).site(kStepMu);
  const auto& prior = config_.prior;
  if (state_.k_star == 0) {
    state_.hyper.mu = sample_normal(rng, prior.mu0, std::sqrt(prior.var_mu0));
    return;
  }
  const int T = data_.num_waves();
  const double phi = state_.hyper.phi;
  double transitions = 0.0;
  double initial = 0.0;
  for (int h = 0; h < state_.k_star; ++h) {
    for (int t = 1; t < T; ++t) {
      transitions += state_.traj.state(t, h) - phi * state_.traj.state(t - 1, h);
    }
    initial += state_.traj.state(0, h);
  }
  const double units = state_.k_star * (T - 1.0 + (1.0 + phi) / (1.0 - phi));
  const double cond_mean = (transitions + (1.0 + phi) * initial) / units;
  const double cond_var = state_.hyper.var_state / units;
  const double post_var = 1.0 / (1.0 / cond_var + 1.0 / prior.var_mu0);
  const double post_mean = post_var * (cond_mean / cond_var + prior.mu0 / prior.var_mu0);
  state_.hyper.mu = sample_normal(rng, post_mean, std::sqrt(post_var));
}

double DynamicSampler::autocorr_log_density(double phi) const {
  const int T = data_.num_waves();
  const double mu = state_.hyper.mu;
  const double var_state = state_.hyper.var_state;
  double value = 0.5 * state_.k_star * std::log1p(-phi * phi);
  const double stat_mean = mu / (1.0 - phi);
  double initial = 0.0, transitions = 0.0;
  for (int h = 0; h < state_.k_star; ++h) {
    const double d0 = state_.traj.state(0, h) - stat_mean;
    initial += d0 * d0;
    for (int t = 1; t < T; ++t) {
      const double d = state_.traj.state(t, h) - mu - phi * state_.traj.state(t - 1, h);
      transitions += d * d;
    }
  }
  value -= (1.0 - phi * phi) / (2.0 * var_state) * initial;
  value -= transitions / (2.0 * var_state);
  return value;
}

void DynamicSampler::update_autocorr(int sweep_index) {
  Rng rng = context(sweep_index).site(kStepPhi);
  if (state_.k_star == 0) {
    state_.hyper.phi = sample_uniform(rng, -1.0, 1.0);
    return;
  }
  constexpr double kEdge = 1e-9;

  // golden-section maximization of the log conditional on (-1, 1)
  const double gr = 0.6180339887498949;
  double a = -1.0 + kEdge, b = 1.0 - kEdge;
  double x1 = b - gr * (b - a), x2 = a + gr * (b - a);
  double f1 = autocorr_log_density(x1), f2 = autocorr_log_density(x2);
  for (int it = 0; it < 200 && (b - a) > 1e-12; ++it) {
    if (f1 < f2) {
      a = x1;
      x1 = x2;
      f1 = f2;
      x2 = a + gr * (b - a);
      f2 = autocorr_log_density(x2);
    } else {
      b = x2;
      x2 = x1;
      f2 = f1;
      x1 = b - gr * (b - a);
      f1 = autocorr_log_density(x1);
    }
  }
  const double mode = 0.5 * (a + b);
  const double delta = std::min(1e-4, 0.25 * (1.0 - std::fabs(mode)));
  const double curvature = (autocorr_log_density(mode + delta) -
                            2.0 * autocorr_log_density(mode) +
                            autocorr_log_density(mode - delta)) /
                           (delta * delta);
  double prop_var = 0.01;  // fallback when the curvature is not usable
  double center = mode;
  if (curvature < -1e-12) {
    prop_var = -1.0 / curvature;
    const double gradient =
        (autocorr_log_density(mode + delta) - autocorr_log_density(mode - delta)) / (2.0 * delta);
    center = mode + prop_var * gradient;
  }

  const double current = state_.hyper.phi;
  const double proposal = sample_truncated_normal_interval(rng, center, prop_var, -1.0, 1.0);
  const double log_ratio = autocorr_log_density(proposal) - autocorr_log_density(current) +
                           0.5 * ((proposal - center) * (proposal - center) -
                                  (current - center) * (current - center)) /
                               prop_var;
  diag_.phi_proposals += 1;
  if (std::log(rng.uniform()) < log_ratio) {
    state_.hyper.phi = proposal;
    diag_.phi_accepts += 1;
  }
}

void DynamicSampler::update_var_obs(int sweep_index) {
  Rng rng = context(sweep_index).site(kStepVarObs);
  const int T = data_.num_waves();
  double residual = 0.0;
  for (int h = 0; h < state_.k_star; ++h) {
    for (int t = 0; t < T; ++t) {
      const double d = state_.traj.signal(t, h) - state_.traj.state(t, h);
      residual += d * d;
    }
  }
  const double shape = T * state_.k_star + config_.prior.shape_obs;
  const double scale = residual + config_.prior.scale_obs;
  state_.hyper.var_obs = sample_inverse_gamma(rng, shape / 2.0, scale / 2.0);
}

void DynamicSampler::update_var_state(int sweep_index) {
  Rng rng = context(sweep_index).site(kStepVarState);
  const int T = data_.num_waves();
  const double phi = state_.hyper.phi;
  const double mu = state_.hyper.mu;
  const double stat_mean = mu / (1.0 - phi);
  double residual = 0.0;
  for (int h = 0; h < state_.k_star; ++h) {
    const double d0 = state_.traj.state(0, h) - stat_mean;
    residual += (1.0 - phi * phi) * d0 * d0;
    for (int t = 1; t < T; ++t) {
      const double d = state_.traj.state(t, h) - mu - phi * state_.traj.state(t - 1, h);
      residual += d * d;
    }
  }
  const double shape = T * state_.k_star + config_.prior.shape_state;
  const double scale = residual + config_.prior.scale_state;
  state_.hyper.var_state = sample_inverse_gamma(rng, shape / 2.0, scale / 2.0);
}

void DynamicSampler::regenerate_observations(int cycle) {
  const DrawContext ctx = context(cycle);
  for (int t = 0; t < data_.num_waves(); ++t) {
    auto& wave = data_.wave_for_update(t);
    for (int i = 0; i < wave.num_subjects(); ++i) {
      Rng rng = ctx.site(kStepRegenerate, static_cast<std::uint64_t>(t),
                         static_cast<std::uint64_t>(i));
      const auto& atom = state_.atoms[state_.labels[t][i]];
      for (int j = 0; j < wave.num_vars(); ++j) {
        if (wave.missing(i, j)) continue;
        wave.set(i, j, sample_categorical(rng, atom[j]));
      }
    }
  }
}

void DynamicSampler::sweep(int sweep_index) {
  update_atoms(sweep_index);
  if (!config_.freeze_weights) {
    if (config_.link.kind() == Link::Kind::probit && !config_.generic_link_update) {
      update_latents(sweep_index);
      update_signal(sweep_index);
    } else {
      update_signal_generic(sweep_index);
    }
  }
  update_slices(sweep_index);
  update_labels(sweep_index);
  if (!config_.freeze_weights) {
    update_states(sweep_index);
    update_mean(sweep_index);
    update_autocorr(sweep_index);
    update_var_obs(sweep_index);
    update_var_state(sweep_index);
  }
}

void DynamicSampler::check_finite(int sweep_index) const {
  const auto& h = state_.hyper;
  if (!std::isfinite(h.mu)) throw NumericAbort(sweep_index, "mu");
  if (!std::isfinite(h.phi)) throw NumericAbort(sweep_index, "phi");
  if (!std::isfinite(h.var_obs) || !(h.var_obs > 0.0)) throw NumericAbort(sweep_index, "var_obs");
  if (!std::isfinite(h.var_state) || !(h.var_state > 0.0)) {
    throw NumericAbort(sweep_index, "var_state");
  }
  for (int hh = 0; hh < state_.traj.columns(); ++hh) {
    for (int t = 0; t < state_.traj.horizon(); ++t) {
      if (!std::isfinite(state_.traj.state(t, hh))) throw NumericAbort(sweep_index, "state");
      if (!std::isfinite(state_.traj.signal(t, hh))) throw NumericAbort(sweep_index, "signal");
    }
  }
}

Draw DynamicSampler::snapshot(int sweep_index) const {
  Draw draw;
  draw.chain = static_cast<int>(config_.stream);
  draw.sweep = sweep_index;
  draw.mu = state_.hyper.mu;
  draw.phi = state_.hyper.phi;
  draw.var_obs = state_.hyper.var_obs;
  draw.var_state = state_.hyper.var_state;
  draw.k_star = state_.k_star;
  draw.cover = state_.cover;
  const int T = data_.num_waves();
  draw.weights.assign(T, std::vector<double>(state_.k_star, 0.0));
  for (int t = 0; t < T; ++t) {
    for (int h = 0; h < state_.k_star; ++h) draw.weights[t][h] = state_.ladders[t].nu[h];
  }
  draw.atoms.assign(state_.atoms.begin(), state_.atoms.begin() + state_.k_star);
  draw.last_state.resize(state_.k_star);
  for (int h = 0; h < state_.k_star; ++h) draw.last_state[h] = state_.traj.state(T - 1, h);
  return draw;
}

PosteriorDraws DynamicSampler::run() {
  init();
  PosteriorDraws out{data_.schema(), data_.num_waves(), {}, {}};
  for (int s = 0; s < config_.iterations; ++s) {
    sweep(s);
    check_finite(s);
    diag_.k_star_trace.push_back(state_.k_star);
    diag_.cover_trace.push_back(state_.cover);
    if (s >= config_.burnin && (s - config_.burnin) % config_.thin == 0) {
      out.draws.push_back(snapshot(s));
    }
  }
  out.diagnostics.push_back(diag_);
  return out;
}

PosteriorDraws run_chain(const Dataset& data, const ChainConfig& config) {
  DynamicSampler sampler(data, config);
  return sampler.run();
}

PosteriorDraws run_chains(const Dataset& data, const ChainConfig& config, int num_chains) {
  if (num_chains < 1) throw std::invalid_argument("run_chains: need at least one chain");
  PosteriorDraws all{data.schema(), data.num_waves(), {}, {}};
  for (int c = 0; c < num_chains; ++c) {
    ChainConfig chain_config = config;
    chain_config.stream = config.stream + static_cast<std::uint64_t>(c);
    PosteriorDraws one = run_chain(data, chain_config);
    for (auto& draw : one.draws) {
      draw.chain = c;
      all.draws.push_back(std::move(draw));
    }
    all.diagnostics.push_back(std::move(one.diagnostics.front()));
  }
  return all;
}

}  // namespace dptf
