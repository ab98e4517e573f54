#include "dptf/baselines.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "dptf/distributions.hpp"

namespace dptf {

void StaticDXConfig::validate() const {
  if (!(alpha > 0.0)) throw std::invalid_argument("static dx: concentration must be positive");
  if (iterations < 1 || burnin < 0 || burnin >= iterations || thin < 1 || init_components < 1) {
    throw std::invalid_argument("static dx: bad schedule");
  }
  if (freeze_weights && fixed_ladder.empty()) {
    throw std::invalid_argument("static dx: frozen weights need a ladder fixture");
  }
}

StaticDXSampler::StaticDXSampler(const Dataset& single_wave, const StaticDXConfig& config)
    : data_(single_wave), config_(config),
      atom_hyper_(config.prior.atom_hyper(single_wave.schema())) {
  config_.validate();
  if (data_.num_waves() != 1) {
    throw std::invalid_argument("static dx: expects a single wave; fit per time instead");
  }
}

void StaticDXSampler::refresh_ladder() {
  if (config_.freeze_weights) {
    state_.ladder.nu = config_.fixed_ladder;
    double total = 0.0;
    for (double w : state_.ladder.nu) total += w;
    state_.ladder.remainder = std::max(0.0, 1.0 - total);
    return;
  }
  state_.ladder.nu.resize(state_.sticks.size());
  double stick = 1.0;
  for (std::size_t h = 0; h < state_.sticks.size(); ++h) {
    state_.ladder.nu[h] = state_.sticks[h] * stick;
    stick *= (1.0 - state_.sticks[h]);
  }
  state_.ladder.remainder = stick;
}

void StaticDXSampler::append_prior_component(const DrawContext& ctx, int column) {
  Rng stick_rng = ctx.site(kStepExtendColumn, static_cast<std::uint64_t>(column));
  state_.sticks.push_back(sample_beta(stick_rng, 1.0, config_.alpha));
  const int p = data_.schema().num_vars();
  std::vector<std::vector<double>> atom(p);
  for (int j = 0; j < p; ++j) {
    Rng rng = ctx.site(kStepExtendAtom, static_cast<std::uint64_t>(column),
                       static_cast<std::uint64_t>(j));
    atom[j] = sample_dirichlet(rng, atom_hyper_.concentration[j]);
  }
  state_.atoms.push_back(std::move(atom));
}

void StaticDXSampler::init() {
  const int p = data_.schema().num_vars();
  const DrawContext ctx = context(0);
  const int columns = config_.freeze_weights ? static_cast<int>(config_.fixed_ladder.size())
                                             : config_.init_components;
  state_ = StaticDXState{};
  state_.sticks.assign(columns, 1.0 / (1.0 + config_.alpha));  // prior mean increment
  state_.atoms.assign(columns, std::vector<std::vector<double>>(p));
  for (int h = 0; h < columns; ++h) {
    for (int j = 0; j < p; ++j) {
      Rng rng = ctx.site(kStepExtendAtom, static_cast<std::uint64_t>(h),
                         static_cast<std::uint64_t>(j));
      state_.atoms[h][j] = sample_dirichlet(rng, atom_hyper_.concentration[j]);
    }
  }
  const int n = data_.wave(0).num_subjects();
  state_.labels.assign(1, std::vector<int>(n, 0));
  state_.slices.assign(1, std::vector<double>(n, 0.0));
  int max_label = -1;
  for (int i = 0; i < n; ++i) {
    Rng rng = ctx.site(kStepInit, 0, static_cast<std::uint64_t>(i));
    state_.labels[0][i] = static_cast<int>(rng.next() % static_cast<std::uint64_t>(columns));
    max_label = std::max(max_label, state_.labels[0][i]);
  }
  state_.k_star = max_label + 1;
  state_.cover = columns;
  refresh_ladder();
}

void StaticDXSampler::init_from_prior(Rng& rng) {
  const int p = data_.schema().num_vars();
  state_ = StaticDXState{};
  auto extend = [&]() {
    state_.sticks.push_back(sample_beta(rng, 1.0, config_.alpha));
    std::vector<std::vector<double>> atom(p);
    for (int j = 0; j < p; ++j) atom[j] = sample_dirichlet(rng, atom_hyper_.concentration[j]);
    state_.atoms.push_back(std::move(atom));
  };
  for (int h = 0; h < config_.init_components; ++h) extend();
  refresh_ladder();

  const int n = data_.wave(0).num_subjects();
  state_.labels.assign(1, std::vector<int>(n, 0));
  state_.slices.assign(1, std::vector<double>(n, 0.0));
  int max_label = -1;
  for (int i = 0; i < n; ++i) {
    const double target = rng.uniform();
    double cumulative = 0.0;
    int h = 0;
    for (;; ++h) {
      if (h == static_cast<int>(state_.sticks.size())) {
        extend();
        refresh_ladder();
      }
      cumulative += state_.ladder.nu[h];
      if (target < cumulative) break;
      if (h > 100000) throw std::runtime_error("init_from_prior: stick walk diverged");
    }
    state_.labels[0][i] = h;
    max_label = std::max(max_label, h);
    state_.slices[0][i] = state_.ladder.nu[h] * rng.uniform();
  }
  state_.k_star = max_label + 1;

  double slice_min = 1.0;
  for (double u : state_.slices[0]) slice_min = std::min(slice_min, u);
  if (n > 0) {
    for (;;) {
      std::vector<WeightLadder> l{state_.ladder};
      const int cover = minimal_cover(l, slice_min);
      if (cover >= 0) {
        state_.cover = cover;
        break;
      }
      extend();
      refresh_ladder();
    }
  } else {
    state_.cover = static_cast<int>(state_.sticks.size());
  }

  auto& wave = data_.wave_for_update(0);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < p; ++j) {
      if (wave.missing(i, j)) continue;
      wave.set(i, j, sample_categorical(rng, state_.atoms[state_.labels[0][i]][j]));
    }
  }
}

void StaticDXSampler::regenerate_observations(int cycle) {
  const DrawContext ctx = context(cycle);
  auto& wave = data_.wave_for_update(0);
  for (int i = 0; i < wave.num_subjects(); ++i) {
    Rng rng = ctx.site(kStepRegenerate, 0, static_cast<std::uint64_t>(i));
    const auto& atom = state_.atoms[state_.labels[0][i]];
    for (int j = 0; j < wave.num_vars(); ++j) {
      if (wave.missing(i, j)) continue;
      wave.set(i, j, sample_categorical(rng, atom[j]));
    }
  }
}

void StaticDXSampler::update_atoms(int sweep_index) {
  if (state_.k_star == 0) return;
  LevelCounts counts;
  count_levels(config_.exec, data_, state_.labels, state_.k_star, counts);
  draw_atoms(context(sweep_index), config_.exec, atom_hyper_, counts, state_.k_star,
             state_.atoms);
}

void StaticDXSampler::update_sticks(int sweep_index) {
  const DrawContext ctx = context(sweep_index);
  const int columns = static_cast<int>(state_.sticks.size());
  // occupancy and past-h counts; the slice variables are marginalized out
  std::vector<int> at(columns, 0);
  for (int label : state_.labels[0]) at[label] += 1;
  std::vector<int> past(columns, 0);
  int running = 0;
  for (int h = columns - 1; h >= 0; --h) {
    past[h] = running;
    running += at[h];
  }
  for_each_index(config_.exec, columns, [&](int h) {
    Rng rng = ctx.site(kStepStick, static_cast<std::uint64_t>(h));
    state_.sticks[h] = sample_beta(rng, 1.0 + at[h], config_.alpha + past[h]);
  });
  refresh_ladder();
}

void StaticDXSampler::update_slices(int sweep_index) {
  std::vector<WeightLadder> ladders{state_.ladder};
  draw_slices(context(sweep_index), config_.exec, state_.labels, ladders, state_.slices);
}

void StaticDXSampler::update_labels(int sweep_index) {
  double slice_min = 1.0;
  bool any_subject = false;
  for (double u : state_.slices[0]) {
    slice_min = std::min(slice_min, u);
    any_subject = true;
  }
  if (!any_subject) {
    state_.k_star = 0;
    return;
  }

  if (config_.freeze_weights) {
    std::vector<WeightLadder> frozen{state_.ladder};
    const int cover = minimal_cover(frozen, slice_min);
    if (cover < 0) throw std::logic_error("static dx: frozen ladder does not cover slices");
    state_.cover = cover;
  } else {
    const DrawContext ctx = context(sweep_index);
    for (;;) {
      std::vector<WeightLadder> current{state_.ladder};
      const int cover = minimal_cover(current, slice_min);
      if (cover >= 0) {
        state_.cover = cover;
        break;
      }
      append_prior_component(ctx, static_cast<int>(state_.sticks.size()));
      refresh_ladder();
    }
  }

  std::vector<WeightLadder> ladders{state_.ladder};
  draw_labels(context(sweep_index), config_.exec, data_, state_.atoms, ladders, state_.slices,
              state_.cover, state_.labels);
  int max_label = -1;
  for (int label : state_.labels[0]) max_label = std::max(max_label, label);
  state_.k_star = max_label + 1;
}

void StaticDXSampler::sweep(int sweep_index) {
  update_atoms(sweep_index);
  if (!config_.freeze_weights) update_sticks(sweep_index);
  update_slices(sweep_index);
  update_labels(sweep_index);
}

Draw StaticDXSampler::snapshot(int sweep_index) const {
  Draw draw;
  draw.chain = static_cast<int>(config_.stream);
  draw.sweep = sweep_index;
  draw.k_star = state_.k_star;
  draw.cover = state_.cover;
  draw.weights.assign(1, std::vector<double>(state_.k_star, 0.0));
  for (int h = 0; h < state_.k_star; ++h) draw.weights[0][h] = state_.ladder.nu[h];
  draw.atoms.assign(state_.atoms.begin(), state_.atoms.begin() + state_.k_star);
  return draw;
}

PosteriorDraws StaticDXSampler::run() {
  init();
  PosteriorDraws out{data_.schema(), 1, {}, {}};
  ChainDiagnostics diag;
  for (int s = 0; s < config_.iterations; ++s) {
    sweep(s);
    diag.k_star_trace.push_back(state_.k_star);
    diag.cover_trace.push_back(state_.cover);
    if (s >= config_.burnin && (s - config_.burnin) % config_.thin == 0) {
      out.draws.push_back(snapshot(s));
    }
  }
  out.diagnostics.push_back(std::move(diag));
  return out;
}

PosteriorDraws fit_static_dx(const Dataset& single_wave, const StaticDXConfig& config) {
  StaticDXSampler sampler(single_wave, config);
  return sampler.run();
}

ParafacMixture independence_baseline(const Dataset& single_wave) {
  if (single_wave.num_waves() != 1) {
    throw std::invalid_argument("independence_baseline: expects a single wave");
  }
  const auto& schema = single_wave.schema();
  const auto& wave = single_wave.wave(0);
  if (wave.num_subjects() == 0) {
    throw std::invalid_argument("independence_baseline: empty wave");
  }
  AtomTable atoms(1);
  atoms[0].resize(schema.num_vars());
  for (int j = 0; j < schema.num_vars(); ++j) {
    const int d = schema.levels(j);
    std::vector<double> counts(d, 1.0);  // add-one smoothing
    double total = d;
    for (int i = 0; i < wave.num_subjects(); ++i) {
      if (wave.missing(i, j)) continue;
      counts[wave.level(i, j)] += 1.0;
      total += 1.0;
    }
    for (double& c : counts) c /= total;
    atoms[0][j] = std::move(counts);
  }
  return ParafacMixture(schema, std::move(atoms), {{1.0}});
}

}  // namespace dptf
