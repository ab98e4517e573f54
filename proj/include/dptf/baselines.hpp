#pragma once
// Static per-time baselines: the Dirichlet-process mixture of product
// multinomials with beta stick-breaking weights, fit to one wave at a
// time, and a smoothed product-of-marginals reference.

#include "dptf/dataset.hpp"
#include "dptf/kernels.hpp"
#include "dptf/mixture.hpp"
#include "dptf/sampler.hpp"

namespace dptf {

struct StaticDXConfig {
  double alpha = 1.0;  // DP concentration, fixed
  int iterations = 6000;
  int burnin = 2000;
  int thin = 5;
  std::uint64_t seed = 1;
  std::uint64_t stream = 0;
  int init_components = 10;
  ExecPolicy exec = ExecPolicy::parallel;
  PriorConfig prior;

  // test hook mirroring the dynamic sampler's frozen-weight mode
  bool freeze_weights = false;
  std::vector<double> fixed_ladder;

  void validate() const;
};

struct StaticDXState {
  std::vector<double> sticks;  // beta increments, one per component
  WeightLadder ladder;
  AtomTable atoms;
  LabelTable labels;  // single wave at index 0
  SliceTable slices;
  int k_star = 0;
  int cover = 0;
};

class StaticDXSampler {
 public:
  StaticDXSampler(const Dataset& single_wave, const StaticDXConfig& config);

  void init();
  // exact joint prior draw plus fresh observations, for validation harnesses
  void init_from_prior(Rng& rng);
  void sweep(int sweep_index);
  PosteriorDraws run();

  void update_atoms(int sweep_index);
  void update_sticks(int sweep_index);
  void update_slices(int sweep_index);
  void update_labels(int sweep_index);
  // redraw observed entries from current labels and atoms
  void regenerate_observations(int cycle);

  StaticDXState& state() { return state_; }
  const StaticDXState& state() const { return state_; }

 private:
  DrawContext context(int sweep_index) const {
    return {config_.seed, config_.stream, static_cast<std::uint64_t>(sweep_index)};
  }
  void refresh_ladder();
  void append_prior_component(const DrawContext& ctx, int column);
  Draw snapshot(int sweep_index) const;

  Dataset data_;
  StaticDXConfig config_;
  DirichletHyper atom_hyper_;
  StaticDXState state_;
};

PosteriorDraws fit_static_dx(const Dataset& single_wave, const StaticDXConfig& config);

// Product of per-variable marginals with add-one smoothing, as a one
// component mixture at a single time.
ParafacMixture independence_baseline(const Dataset& single_wave);

}  // namespace dptf
