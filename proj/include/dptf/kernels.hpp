#pragma once
// Data-parallel inner loops of the samplers. Each kernel is independent
// across its index range; generators are derived per site from
// (seed, stream, sweep, step, indices), so scheduling cannot change draws.

#include <cstdint>
#include <span>
#include <vector>

#include "dptf/dataset.hpp"
#include "dptf/mixture.hpp"
#include "dptf/parallel.hpp"
#include "dptf/prior_moments.hpp"
#include "dptf/rng.hpp"
#include "dptf/stick.hpp"

namespace dptf {

// Draw-site addressing for one chain sweep.
struct DrawContext {
  std::uint64_t seed = 0;
  std::uint64_t stream = 0;
  std::uint64_t sweep = 0;

  Rng site(std::uint64_t step, std::uint64_t a = 0, std::uint64_t b = 0) const {
    return Rng::keyed(seed, {stream, sweep, step, a, b});
  }
};

// Step identifiers feeding the site keys. Shared between the dynamic and
// the static samplers so that matched steps consume matched streams.
enum StepId : std::uint64_t {
  kStepInit = 1,
  kStepAtoms,
  kStepLatents,
  kStepSignal,
  kStepSlice,
  kStepLabels,
  kStepStates,
  kStepMu,
  kStepPhi,
  kStepVarObs,
  kStepVarState,
  kStepExtendColumn,
  kStepExtendAtom,
  kStepStick,
  kStepRegenerate,
};

using LabelTable = std::vector<std::vector<int>>;  // [t][i], 0-based components
using SliceTable = std::vector<std::vector<double>>;

// Ragged per-subject latent storage: subject (t,i) holds labels[t][i]+1
// values starting at offsets[t][i].
struct LatentTable {
  std::vector<std::vector<std::size_t>> offsets;
  std::vector<std::vector<double>> values;

  double value(int t, int i, int h) const { return values[t][offsets[t][i] + h]; }
};

// Per-level observation counts for occupied components: counts[h][j][l].
using LevelCounts = std::vector<std::vector<std::vector<double>>>;

void count_levels(ExecPolicy exec, const Dataset& data, const LabelTable& labels,
                  int num_components, LevelCounts& counts);

void draw_atoms(const DrawContext& ctx, ExecPolicy exec, const DirichletHyper& hyper,
                const LevelCounts& counts, int num_components, AtomTable& atoms);

// Truncated-normal latents under the probit augmentation; the latent at the
// subject's own label is positive, all earlier ones nonpositive.
void draw_probit_latents(const DrawContext& ctx, ExecPolicy exec, const LabelTable& labels,
                         const StateTrajectory& traj, LatentTable& out);

// For each (t, h): sum of latents over subjects with label >= h, plus the
// member count. Inner loops run in subject order regardless of policy.
void latent_column_sums(ExecPolicy exec, const LabelTable& labels, const LatentTable& latents,
                        int columns, std::vector<std::vector<double>>& sums,
                        std::vector<std::vector<int>>& counts);

void draw_slices(const DrawContext& ctx, ExecPolicy exec, const LabelTable& labels,
                 std::span<const WeightLadder> ladders, SliceTable& out);

// Multinomial label draw over the slice set {h < cover : nu_th > u_ti},
// weighted by the product of atom entries at the observed levels.
void draw_labels(const DrawContext& ctx, ExecPolicy exec, const Dataset& data,
                 const AtomTable& atoms, std::span<const WeightLadder> ladders,
                 const SliceTable& slices, int cover, LabelTable& out);

struct DependenceEntry {
  int t = 0, j = 0, jp = 0;
  double rho = 0.0;
};

// Dependence for every pair j < jp at every time of the mixture.
std::vector<DependenceEntry> dependence_table(ExecPolicy exec, const ParafacMixture& mixture);

}  // namespace dptf
