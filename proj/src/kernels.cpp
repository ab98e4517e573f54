#include "dptf/kernels.hpp"

#include <cmath>
#include <stdexcept>

#include "dptf/distributions.hpp"

namespace dptf {

void count_levels(ExecPolicy exec, const Dataset& data, const LabelTable& labels,
                  int num_components, LevelCounts& counts) {
  const auto& schema = data.schema();
  const int p = schema.num_vars();
  counts.assign(num_components, {});
  for (int h = 0; h < num_components; ++h) {
    counts[h].resize(p);
    for (int j = 0; j < p; ++j) counts[h][j].assign(schema.levels(j), 0.0);
  }
  // variables are independent count targets, so j indexes the parallel loop
  for_each_index(exec, p, [&](int j) {
    for (int t = 0; t < data.num_waves(); ++t) {
      const auto& wave = data.wave(t);
      for (int i = 0; i < wave.num_subjects(); ++i) {
        if (wave.missing(i, j)) continue;
        const int h = labels[t][i];
        if (h < num_components) counts[h][j][wave.level(i, j)] += 1.0;
      }
    }
  });
}

void draw_atoms(const DrawContext& ctx, ExecPolicy exec, const DirichletHyper& hyper,
                const LevelCounts& counts, int num_components, AtomTable& atoms) {
  const int p = static_cast<int>(hyper.concentration.size());
  for_each_index(exec, num_components * p, [&](int idx) {
    const int h = idx / p;
    const int j = idx % p;
    Rng rng = ctx.site(kStepAtoms, static_cast<std::uint64_t>(h), static_cast<std::uint64_t>(j));
    const auto& base = hyper.concentration[j];
    std::vector<double> conc(base.size());
    for (std::size_t l = 0; l < base.size(); ++l) conc[l] = base[l] + counts[h][j][l];
    sample_dirichlet(rng, conc, atoms[h][j]);
  });
}

void draw_probit_latents(const DrawContext& ctx, ExecPolicy exec, const LabelTable& labels,
                         const StateTrajectory& traj, LatentTable& out) {
  const int T = static_cast<int>(labels.size());
  out.offsets.assign(T, {});
  out.values.assign(T, {});
  for (int t = 0; t < T; ++t) {
    const int n = static_cast<int>(labels[t].size());
    out.offsets[t].resize(n);
    std::size_t total = 0;
    for (int i = 0; i < n; ++i) {
      out.offsets[t][i] = total;
      total += static_cast<std::size_t>(labels[t][i]) + 1;
    }
    out.values[t].resize(total);
  }
  for (int t = 0; t < T; ++t) {
    const int n = static_cast<int>(labels[t].size());
    for_each_index(exec, n, [&, t](int i) {
      Rng rng = ctx.site(kStepLatents, static_cast<std::uint64_t>(t), static_cast<std::uint64_t>(i));
      const int own = labels[t][i];
      double* z = out.values[t].data() + out.offsets[t][i];
      for (int h = 0; h < own; ++h) {
        z[h] = sample_truncated_normal(rng, traj.signal(t, h), 1.0, HalfLine::negative);
      }
      z[own] = sample_truncated_normal(rng, traj.signal(t, own), 1.0, HalfLine::positive);
    });
  }
}

void latent_column_sums(ExecPolicy exec, const LabelTable& labels, const LatentTable& latents,
                        int columns, std::vector<std::vector<double>>& sums,
                        std::vector<std::vector<int>>& counts) {
  const int T = static_cast<int>(labels.size());
  sums.assign(T, std::vector<double>(columns, 0.0));
  counts.assign(T, std::vector<int>(columns, 0));
  for_each_index(exec, T * columns, [&](int idx) {
    const int t = idx / columns;
    const int h = idx % columns;
    double s = 0.0;
    int c = 0;
    const int n = static_cast<int>(labels[t].size());
    for (int i = 0; i < n; ++i) {
      if (labels[t][i] >= h) {
        s += latents.value(t, i, h);
        ++c;
      }
    }
    sums[t][h] = s;
    counts[t][h] = c;
  });
}

void draw_slices(const DrawContext& ctx, ExecPolicy exec, const LabelTable& labels,
                 std::span<const WeightLadder> ladders, SliceTable& out) {
  const int T = static_cast<int>(labels.size());
  out.assign(T, {});
  for (int t = 0; t < T; ++t) {
    const int n = static_cast<int>(labels[t].size());
    out[t].resize(n);
    for_each_index(exec, n, [&, t](int i) {
      Rng rng = ctx.site(kStepSlice, static_cast<std::uint64_t>(t), static_cast<std::uint64_t>(i));
      const double nu = ladders[t].nu[labels[t][i]];
      if (!(nu > 0.0)) {
        throw std::logic_error("draw_slices: zero weight at an occupied component");
      }
      out[t][i] = nu * rng.uniform();
    });
  }
}

namespace {

// weight of component h for subject (t,i): product of atom entries over the
// observed variables; empty product for fully masked subjects
double label_weight(const ObservationBlock& wave, const AtomTable& atoms, int i, int h) {
  double w = 1.0;
  for (int j = 0; j < wave.num_vars(); ++j) {
    if (wave.missing(i, j)) continue;
    w *= atoms[h][j][wave.level(i, j)];
  }
  return w;
}

double label_log_weight(const ObservationBlock& wave, const AtomTable& atoms, int i, int h) {
  double lw = 0.0;
  for (int j = 0; j < wave.num_vars(); ++j) {
    if (wave.missing(i, j)) continue;
    lw += std::log(atoms[h][j][wave.level(i, j)]);
  }
  return lw;
}

}  // namespace

void draw_labels(const DrawContext& ctx, ExecPolicy exec, const Dataset& data,
                 const AtomTable& atoms, std::span<const WeightLadder> ladders,
                 const SliceTable& slices, int cover, LabelTable& out) {
  const int T = data.num_waves();
  out.resize(T);
  for (int t = 0; t < T; ++t) {
    const auto& wave = data.wave(t);
    out[t].resize(wave.num_subjects());
    for_each_index(exec, wave.num_subjects(), [&, t](int i) {
      Rng rng = ctx.site(kStepLabels, static_cast<std::uint64_t>(t), static_cast<std::uint64_t>(i));
      const double u = slices[t][i];
      std::vector<int> candidates;
      std::vector<double> weights;
      candidates.reserve(cover);
      weights.reserve(cover);
      for (int h = 0; h < cover; ++h) {
        if (ladders[t].nu[h] > u) {
          candidates.push_back(h);
          weights.push_back(label_weight(wave, atoms, i, h));
        }
      }
      if (candidates.empty()) {
        throw std::logic_error("draw_labels: empty slice set; truncation is inconsistent");
      }
      double total = 0.0;
      for (double w : weights) total += w;
      if (!(total > 0.0)) {
        // all products underflowed; redo on the log scale
        double max_lw = -std::numeric_limits<double>::infinity();
        std::vector<double> lw(candidates.size());
        for (std::size_t c = 0; c < candidates.size(); ++c) {
          lw[c] = label_log_weight(wave, atoms, i, candidates[c]);
          max_lw = std::max(max_lw, lw[c]);
        }
        for (std::size_t c = 0; c < candidates.size(); ++c) {
          weights[c] = std::exp(lw[c] - max_lw);
        }
      }
      out[t][i] = candidates[sample_categorical(rng, weights)];
    });
  }
}

std::vector<DependenceEntry> dependence_table(ExecPolicy exec, const ParafacMixture& mixture) {
  const int p = mixture.schema().num_vars();
  const int T = mixture.horizon();
  std::vector<std::pair<int, int>> pairs;
  for (int j = 0; j < p; ++j) {
    for (int jp = j + 1; jp < p; ++jp) pairs.emplace_back(j, jp);
  }
  std::vector<DependenceEntry> out(pairs.size() * T);
  for_each_index(exec, static_cast<int>(out.size()), [&](int idx) {
    const int pair = idx / T;
    const int t = idx % T;
    const auto [j, jp] = pairs[pair];
    out[idx] = {t, j, jp, mixture.pairwise_dependence(t, j, jp)};
  });
  return out;
}

}  // namespace dptf
