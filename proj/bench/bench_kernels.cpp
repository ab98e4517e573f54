// Timing comparison of the serial reference kernels against the OpenMP
// variants on a synthetic state large enough to show scaling. Outputs are
// also cross-checked for equality, since the two paths must agree bitwise.

#include <chrono>
#include <cstdio>
#include <cstring>

#include "dptf/distributions.hpp"
#include "dptf/kernels.hpp"

using namespace dptf;

namespace {

template <class F>
double time_best_of(int reps, F&& fn) {
  double best = 1e300;
  for (int r = 0; r < reps; ++r) {
    const auto start = std::chrono::steady_clock::now();
    fn();
    const auto stop = std::chrono::steady_clock::now();
    best = std::min(best, std::chrono::duration<double>(stop - start).count());
  }
  return best;
}

}  // namespace

int main() {
  const int T = 10, p = 20, levels = 4, n_per_wave = 2000, components = 40;
  const CategoricalSchema schema(std::vector<int>(p, levels));
  Rng rng(20240917);

  // synthetic atoms, trajectory, data, labels
  AtomTable atoms(components, std::vector<std::vector<double>>(p));
  const std::vector<double> conc(levels, 1.0);
  for (auto& atom : atoms) {
    for (auto& column : atom) column = sample_dirichlet(rng, conc);
  }
  StateHyper hyper{0.0, 0.8, 0.01, 0.64};
  StateTrajectory traj = sample_prior_trajectory(hyper, T, components, rng);
  const Link link;
  std::vector<WeightLadder> ladders;
  for (int t = 0; t < T; ++t) {
    ladders.push_back(weights_from_states(traj.signal_row(t, components), link));
  }

  std::vector<ObservationBlock> waves;
  LabelTable labels(T);
  for (int t = 0; t < T; ++t) {
    ObservationBlock wave(n_per_wave, p);
    labels[t].resize(n_per_wave);
    for (int i = 0; i < n_per_wave; ++i) {
      const int h = static_cast<int>(rng.next() % components / 4);
      labels[t][i] = h;
      for (int j = 0; j < p; ++j) wave.set(i, j, sample_categorical(rng, atoms[h][j]));
    }
    waves.push_back(std::move(wave));
  }
  std::vector<double> time_labels(T);
  for (int t = 0; t < T; ++t) time_labels[t] = t + 1;
  const Dataset data(schema, std::move(waves), std::move(time_labels));

  const DrawContext ctx{7, 0, 3};
  SliceTable slices;
  draw_slices(ctx, ExecPolicy::serial, labels, ladders, slices);

  std::printf("%-24s %12s %12s %9s\n", "kernel", "serial (ms)", "openmp (ms)", "speedup");

  auto report = [&](const char* name, double ts, double tp, bool equal) {
    std::printf("%-24s %12.3f %12.3f %8.2fx %s\n", name, ts * 1e3, tp * 1e3, ts / tp,
                equal ? "" : "MISMATCH");
  };

  {
    LatentTable a, b;
    const double ts = time_best_of(
        5, [&] { draw_probit_latents(ctx, ExecPolicy::serial, labels, traj, a); });
    const double tp = time_best_of(
        5, [&] { draw_probit_latents(ctx, ExecPolicy::parallel, labels, traj, b); });
    report("probit latents", ts, tp, a.values == b.values);
  }
  {
    LatentTable z;
    draw_probit_latents(ctx, ExecPolicy::serial, labels, traj, z);
    std::vector<std::vector<double>> sa, sb;
    std::vector<std::vector<int>> ca, cb;
    const double ts = time_best_of(
        5, [&] { latent_column_sums(ExecPolicy::serial, labels, z, components, sa, ca); });
    const double tp = time_best_of(
        5, [&] { latent_column_sums(ExecPolicy::parallel, labels, z, components, sb, cb); });
    report("latent column sums", ts, tp, sa == sb && ca == cb);
  }
  {
    LevelCounts ca, cb;
    const double ts =
        time_best_of(5, [&] { count_levels(ExecPolicy::serial, data, labels, components, ca); });
    const double tp =
        time_best_of(5, [&] { count_levels(ExecPolicy::parallel, data, labels, components, cb); });
    report("level counts", ts, tp, ca == cb);
  }
  {
    const auto hyper_a = DirichletHyper::symmetric(schema, 1.0);
    LevelCounts counts;
    count_levels(ExecPolicy::serial, data, labels, components, counts);
    AtomTable aa = atoms, ab = atoms;
    const double ts = time_best_of(
        5, [&] { draw_atoms(ctx, ExecPolicy::serial, hyper_a, counts, components, aa); });
    const double tp = time_best_of(
        5, [&] { draw_atoms(ctx, ExecPolicy::parallel, hyper_a, counts, components, ab); });
    report("atom draws", ts, tp, aa == ab);
  }
  {
    LabelTable la, lb;
    const double ts = time_best_of(5, [&] {
      draw_labels(ctx, ExecPolicy::serial, data, atoms, ladders, slices, components, la);
    });
    const double tp = time_best_of(5, [&] {
      draw_labels(ctx, ExecPolicy::parallel, data, atoms, ladders, slices, components, lb);
    });
    report("label draws", ts, tp, la == lb);
  }
  {
    std::vector<std::vector<double>> weights(T);
    for (int t = 0; t < T; ++t) weights[t] = ladders[t].nu;
    const ParafacMixture mixture(schema, atoms, weights);
    std::vector<DependenceEntry> ea, eb;
    const double ts =
        time_best_of(3, [&] { ea = dependence_table(ExecPolicy::serial, mixture); });
    const double tp =
        time_best_of(3, [&] { eb = dependence_table(ExecPolicy::parallel, mixture); });
    bool equal = ea.size() == eb.size();
    for (std::size_t i = 0; equal && i < ea.size(); ++i) equal = ea[i].rho == eb[i].rho;
    report("dependence table", ts, tp, equal);
  }
  return 0;
}
