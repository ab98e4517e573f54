#include <doctest.h>

#include <cmath>
#include <functional>

#include "dptf/distributions.hpp"
#include "dptf/ffbs.hpp"
#include "dptf/sampler.hpp"
#include "conditional_fixture.hpp"
#include "test_util.hpp"

using namespace dptf;

namespace {

Dataset tiny_dataset(int T, int n_per_wave, const CategoricalSchema& schema, std::uint64_t seed,
                     double missing_rate = 0.0) {
  Rng rng(seed);
  std::vector<ObservationBlock> waves;
  std::vector<double> labels;
  for (int t = 0; t < T; ++t) {
    ObservationBlock wave(n_per_wave, schema.num_vars());
    for (int i = 0; i < n_per_wave; ++i) {
      for (int j = 0; j < schema.num_vars(); ++j) {
        if (rng.uniform() < missing_rate) continue;
        wave.set(i, j, static_cast<int>(rng.next() % schema.levels(j)));
      }
    }
    waves.push_back(std::move(wave));
    labels.push_back(t + 1.0);
  }
  return Dataset(schema, std::move(waves), std::move(labels));
}

}  // namespace

TEST_CASE("atom update follows the conjugate posterior") {
  const CategoricalSchema schema({2});
  SUBCASE("all observations at the first level") {
    // 8 subjects, single wave, every response level one, single component
    std::vector<ObservationBlock> waves;
    ObservationBlock wave(8, 1);
    for (int i = 0; i < 8; ++i) wave.set(i, 0, 0);
    waves.push_back(wave);
    Dataset data(schema, std::move(waves), {1.0});
    ChainConfig config;
    config.init_components = 2;
    DynamicSampler sampler(data, config);
    sampler.init();
    auto& st = sampler.state();
    for (auto& s : st.labels[0]) s = 0;
    st.k_star = 1;
    constexpr int kReps = 20000;
    std::vector<double> first(kReps);
    for (int r = 0; r < kReps; ++r) {
      sampler.update_atoms(r);
      first[r] = st.atoms[0][0][0];
    }
    CHECK(std::fabs(testutil::mean(first) - 9.0 / 10.0) < 3.0 * testutil::std_error(first));
  }
  SUBCASE("empty component and fully masked variable fall back to the prior") {
    std::vector<ObservationBlock> waves;
    ObservationBlock wave(8, 1);
    // leave everything missing: design-based missingness
    waves.push_back(wave);
    Dataset data(schema, std::move(waves), {1.0});
    ChainConfig config;
    config.init_components = 2;
    DynamicSampler sampler(data, config);
    sampler.init();
    auto& st = sampler.state();
    for (auto& s : st.labels[0]) s = 0;
    st.k_star = 2;  // component 1 stays empty
    constexpr int kReps = 20000;
    std::vector<double> masked_var(kReps), empty_comp(kReps);
    for (int r = 0; r < kReps; ++r) {
      sampler.update_atoms(r);
      masked_var[r] = st.atoms[0][0][0];
      empty_comp[r] = st.atoms[1][0][0];
    }
    // prior Dirichlet(1,1): mean 1/2, variance 1/12
    CHECK(std::fabs(testutil::mean(masked_var) - 0.5) < 3.0 * testutil::std_error(masked_var));
    CHECK(std::fabs(testutil::mean(empty_comp) - 0.5) < 3.0 * testutil::std_error(empty_comp));
    CHECK(testutil::variance(empty_comp) == doctest::Approx(1.0 / 12.0).epsilon(0.05));
  }
}

TEST_CASE("probit latent update") {
  testutil::FrozenFixture f;
  auto& st = f.sampler.state();
  for (int t = 0; t < 3; ++t) {
    for (int h = 0; h < st.traj.columns(); ++h) st.traj.signal(t, h) = 0.0;
  }
  constexpr int kReps = 12000;
  std::vector<double> own(0);
  bool signs_ok = true;
  for (int r = 0; r < kReps; ++r) {
    f.sampler.update_latents(r);
    for (int t = 0; t < 3; ++t) {
      for (int i = 0; i < 6; ++i) {
        const int s = st.labels[t][i];
        for (int h = 0; h < s; ++h) signs_ok = signs_ok && st.latents.value(t, i, h) <= 0.0;
        const double z_own = st.latents.value(t, i, s);
        signs_ok = signs_ok && z_own > 0.0;
        if (r % 10 == 0) own.push_back(z_own);
      }
    }
  }
  CHECK(signs_ok);
  CHECK(std::fabs(testutil::mean(own) - std::sqrt(2.0 / M_PI)) < 3.0 * testutil::std_error(own));
}

TEST_CASE("signal update conditional") {
  testutil::FrozenFixture f;
  auto& st = f.sampler.state();
  SUBCASE("occupied rung with one pinned latent") {
    // only subject (0,0) reaches the top rung, so exactly one latent feeds
    // the signal at (t=0, h=1)
    for (int t = 0; t < 3; ++t) {
      for (int i = 0; i < 6; ++i) st.labels[t][i] = (t == 0 && i == 0) ? 1 : 0;
    }
    st.k_star = 2;
    st.hyper.var_obs = 1.0;
    const double z_pin = 0.8, alpha = st.traj.state(0, 1);
    constexpr int kReps = 30000;
    std::vector<double> w(kReps);
    for (int r = 0; r < kReps; ++r) {
      f.sampler.update_latents(r);
      // pin the top-rung latent of subject (0,0)
      st.latents.values[0][st.latents.offsets[0][0] + 1] = z_pin;
      f.sampler.update_signal(r);
      w[r] = st.traj.signal(0, 1);
    }
    CHECK(std::fabs(testutil::mean(w) - 0.5 * (z_pin + alpha)) < 3.0 * testutil::std_error(w));
    CHECK(testutil::variance(w) == doctest::Approx(0.5).epsilon(0.05));
  }
  SUBCASE("unoccupied rung reduces to the state prior") {
    st.hyper.var_obs = 0.3;
    const int h_free = 3;  // beyond both occupied components
    const double alpha = st.traj.state(1, h_free);
    constexpr int kReps = 30000;
    std::vector<double> w(kReps);
    for (int r = 0; r < kReps; ++r) {
      f.sampler.update_latents(r);
      f.sampler.update_signal(r);
      w[r] = st.traj.signal(1, h_free);
      st.traj.state(1, h_free) = alpha;  // keep the anchor fixed
    }
    CHECK(std::fabs(testutil::mean(w) - alpha) < 3.0 * testutil::std_error(w));
    CHECK(testutil::variance(w) == doctest::Approx(0.3).epsilon(0.05));
  }
}

TEST_CASE("slice update is uniform under its rung") {
  testutil::FrozenFixture f;
  auto& st = f.sampler.state();
  constexpr int kReps = 8000;
  std::vector<double> scaled;
  scaled.reserve(kReps * 18);
  bool support_ok = true;
  for (int r = 0; r < kReps; ++r) {
    f.sampler.update_slices(r);
    for (int t = 0; t < 3; ++t) {
      for (int i = 0; i < 6; ++i) {
        const double nu = st.ladders[t].nu[st.labels[t][i]];
        support_ok = support_ok && st.slices[t][i] > 0.0 && st.slices[t][i] < nu;
        if (r % 8 == 0) scaled.push_back(st.slices[t][i] / nu);
      }
    }
  }
  CHECK(support_ok);
  CHECK(testutil::ks_test_pvalue(scaled, [](double v) { return v; }) > 0.01);
  CHECK(std::fabs(testutil::mean(scaled) - 0.5) < 3.0 * testutil::std_error(scaled));
}

TEST_CASE("label update marginalized over slices matches the finite mixture posterior") {
  // three components with pinned weights and atoms; a single univariate
  // observation per subject
  const CategoricalSchema schema({2});
  std::vector<ObservationBlock> waves;
  ObservationBlock wave(2, 1);
  wave.set(0, 0, 0);
  wave.set(1, 0, 1);
  waves.push_back(wave);
  Dataset data(schema, std::move(waves), {1.0});

  ChainConfig config;
  config.freeze_weights = true;
  config.fixed_ladders = {{0.5, 0.3, 0.2}};
  config.init_components = 3;
  config.seed = 77;
  DynamicSampler sampler(data, config);
  sampler.init();
  auto& st = sampler.state();
  st.atoms[0][0] = {0.9, 0.1};
  st.atoms[1][0] = {0.5, 0.5};
  st.atoms[2][0] = {0.2, 0.8};
  st.labels[0] = {0, 0};
  st.k_star = 1;

  // long alternation of slice and label moves with everything else frozen
  std::vector<double> counts_x0(3, 0.0), counts_x1(3, 0.0);
  constexpr int kSweeps = 60000;
  for (int r = 0; r < kSweeps; ++r) {
    sampler.update_slices(r);
    sampler.update_labels(r);
    counts_x0[st.labels[0][0]] += 1.0;
    counts_x1[st.labels[0][1]] += 1.0;
  }
  auto posterior = [&](int level) {
    std::vector<double> w(3);
    double total = 0.0;
    for (int h = 0; h < 3; ++h) {
      w[h] = config.fixed_ladders[0][h] * st.atoms[h][0][level];
      total += w[h];
    }
    for (auto& v : w) v /= total;
    return w;
  };
  CHECK(testutil::chi2_gof_pvalue(counts_x0, posterior(0)) > 0.01);
  CHECK(testutil::chi2_gof_pvalue(counts_x1, posterior(1)) > 0.01);
}

TEST_CASE("state update draws from the smoothing law and refreshes free rungs") {
  testutil::FrozenFixture f;
  auto& st = f.sampler.state();
  const std::vector<double> signal_col{st.traj.signal(0, 0), st.traj.signal(1, 0),
                                       st.traj.signal(2, 0)};
  const auto moments = kalman_moments(signal_col, st.hyper);
  constexpr int kReps = 30000;
  std::vector<double> occupied(kReps), free_rung(kReps);
  for (int r = 0; r < kReps; ++r) {
    f.sampler.update_states(r);
    occupied[r] = st.traj.state(1, 0);
    free_rung[r] = st.traj.state(1, 3);
    // restore the signal column the draw conditions on
    for (int t = 0; t < 3; ++t) st.traj.signal(t, 0) = signal_col[t];
  }
  CHECK(std::fabs(testutil::mean(occupied) - moments.smooth_mean[1]) <
        3.0 * testutil::std_error(occupied));
  CHECK(testutil::variance(occupied) == doctest::Approx(moments.smooth_var[1]).epsilon(0.05));
  CHECK(std::fabs(testutil::mean(free_rung) - st.hyper.stationary_mean()) <
        3.0 * testutil::std_error(free_rung));
  CHECK(testutil::variance(free_rung) == doctest::Approx(st.hyper.stationary_var()).epsilon(0.05));
}

TEST_CASE("location update matches the grid-normalized conditional") {
  testutil::FrozenFixture f;
  constexpr int kReps = 100000;
  std::vector<double> draws(kReps);
  for (int r = 0; r < kReps; ++r) {
    f.sampler.update_mean(r);
    draws[r] = f.sampler.state().hyper.mu;
    f.sampler.state().hyper.mu = 0.15;  // restore the frozen value
  }
  const double p = testutil::grid_chi2_pvalue(draws, -1.2, 1.6, 40,
                                    [&](double mu) { return f.log_joint_mu(mu); });
  CHECK(p > 0.01);
}

TEST_CASE("flat-prior limit pulls the location toward the data value") {
  ChainConfig flat = testutil::FrozenFixture::make_config();
  flat.prior.var_mu0 = 1e12;  // effectively flat
  testutil::FrozenFixture f(flat);
  auto& st = f.sampler.state();
  // phi = 0 makes the conditional center the grand mean of transition targets
  st.hyper.phi = 0.0;
  double grand = 0.0;
  for (int h = 0; h < st.k_star; ++h) {
    for (int t = 0; t < 3; ++t) grand += st.traj.state(t, h);
  }
  grand /= 6.0;
  constexpr int kReps = 40000;
  std::vector<double> draws(kReps);
  for (int r = 0; r < kReps; ++r) {
    f.sampler.update_mean(r);
    draws[r] = st.hyper.mu;
    st.hyper.mu = 0.15;
  }
  CHECK(std::fabs(testutil::mean(draws) - grand) < 3.0 * testutil::std_error(draws));
}

TEST_CASE("autocorrelation update targets the grid-normalized conditional") {
  testutil::FrozenFixture f;
  auto& st = f.sampler.state();
  constexpr int kKept = 40000, kThin = 5;
  std::vector<double> draws(kKept);
  long long accepted = 0;
  double previous = st.hyper.phi;
  for (int r = 0; r < kKept * kThin; ++r) {
    f.sampler.update_autocorr(r);
    if (st.hyper.phi != previous) ++accepted;
    previous = st.hyper.phi;
    if (r % kThin == kThin - 1) draws[r / kThin] = st.hyper.phi;
  }
  // the independence proposal should accept most moves
  CHECK(static_cast<double>(accepted) / (kKept * kThin) > 0.5);
  bool inside = true;
  for (double v : draws) inside = inside && v > -1.0 && v < 1.0;
  CHECK(inside);
  const double p = testutil::grid_chi2_pvalue(draws, -0.999, 0.999, 40,
                                    [&](double phi) { return f.log_joint_phi(phi); });
  CHECK(p > 0.01);
}

TEST_CASE("variance updates match their grid-normalized conditionals") {
  testutil::FrozenFixture f;
  auto& st = f.sampler.state();
  SUBCASE("observation noise") {
    constexpr int kReps = 100000;
    std::vector<double> draws(kReps);
    for (int r = 0; r < kReps; ++r) {
      f.sampler.update_var_obs(r);
      draws[r] = st.hyper.var_obs;
      st.hyper.var_obs = 0.3;
    }
    const double p = testutil::grid_chi2_pvalue(draws, 1e-3, 1.2, 40,
                                      [&](double v) { return f.log_joint_var_obs(v); });
    CHECK(p > 0.01);
  }
  SUBCASE("state innovation, detecting a dropped initial term") {
    constexpr int kReps = 100000;
    std::vector<double> draws(kReps);
    for (int r = 0; r < kReps; ++r) {
      f.sampler.update_var_state(r);
      draws[r] = st.hyper.var_state;
      st.hyper.var_state = 0.2;
    }
    const double p = testutil::grid_chi2_pvalue(draws, 1e-3, 1.2, 40,
                                      [&](double v) { return f.log_joint_var_state(v); });
    CHECK(p > 0.01);
    // the same draws must be inconsistent with a density lacking the
    // stationary initial-state contribution
    auto without_initial = [&](double v) {
      const auto& state = f.sampler.state();
      const auto& prior = f.config.prior;
      double lp = (-prior.shape_state / 2.0 - 1.0) * std::log(v) - prior.scale_state / (2.0 * v);
      for (int h = 0; h < state.k_star; ++h) {
        for (int t = 1; t < 3; ++t) {
          const double d =
              state.traj.state(t, h) - state.hyper.mu - state.hyper.phi * state.traj.state(t - 1, h);
          lp += -0.5 * std::log(v) - 0.5 * d * d / v;
        }
      }
      return lp;
    };
    const double p_wrong = testutil::grid_chi2_pvalue(draws, 1e-3, 1.2, 40, without_initial);
    CHECK(p_wrong < 0.01);
  }
  SUBCASE("pinned residuals give the inverse-gamma mean") {
    // signal equals state: the residual sum vanishes and the scale is the
    // prior scale alone
    for (int t = 0; t < 3; ++t) {
      for (int h = 0; h < st.traj.columns(); ++h) st.traj.signal(t, h) = st.traj.state(t, h);
    }
    constexpr int kReps = 60000;
    std::vector<double> draws(kReps);
    for (int r = 0; r < kReps; ++r) {
      f.sampler.update_var_obs(r);
      draws[r] = st.hyper.var_obs;
      st.hyper.var_obs = 0.3;
    }
    const double shape = 3 * 2 + f.config.prior.shape_obs;  // T k* + prior shape
    const double target = f.config.prior.scale_obs / (shape - 2.0);
    CHECK(std::fabs(testutil::mean(draws) - target) < 3.0 * testutil::std_error(draws));
  }
}

TEST_CASE("generic-link path reproduces the specialized probit kernel's stationary law") {
  // freeze everything but one signal entry; iterate each kernel and compare
  // the stationary draws of W(0,0): latent augmentation followed by the
  // normal draw versus the mode/Hessian independence walk
  const CategoricalSchema schema({2});
  std::vector<ObservationBlock> waves;
  ObservationBlock wave(6, 1);
  for (int i = 0; i < 6; ++i) wave.set(i, 0, i % 2);
  waves.push_back(wave);
  const Dataset data(schema, std::move(waves), {1.0});

  auto collect = [&](bool generic) {
    ChainConfig c;
    c.init_components = 4;
    c.seed = 11;
    c.generic_link_update = generic;
    DynamicSampler sampler(data, c);
    sampler.init();
    auto& st = sampler.state();
    st.labels[0] = {0, 0, 1, 1, 1, 2};
    st.k_star = 3;
    st.hyper = StateHyper{0.0, 0.5, 0.4, 0.3};
    for (int h = 0; h < st.traj.columns(); ++h) st.traj.state(0, h) = 0.3;
    sampler.refresh_ladders();
    std::vector<double> w;
    for (int r = 0; r < 30000; ++r) {
      if (generic) {
        sampler.update_signal_generic(r);
      } else {
        sampler.update_latents(r);
        sampler.update_signal(r);
      }
      if (r % 5 == 4) w.push_back(st.traj.signal(0, 0));
    }
    return w;
  };
  CHECK(testutil::ks_two_sample_pvalue(collect(false), collect(true)) > 0.01);
}

TEST_CASE("numeric guard reports the offending sweep") {
  const CategoricalSchema schema({2});
  const Dataset data = tiny_dataset(1, 3, schema, 7);
  ChainConfig config;
  DynamicSampler sampler(data, config);
  sampler.init();
  sampler.state().hyper.mu = std::numeric_limits<double>::quiet_NaN();
  try {
    sampler.check_finite(12);
    FAIL("expected a numeric abort");
  } catch (const NumericAbort& e) {
    CHECK(e.sweep() == 12);
    CHECK(e.quantity() == "mu");
  }
}
