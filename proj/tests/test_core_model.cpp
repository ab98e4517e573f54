#include <doctest.h>

#include <cmath>

#include "dptf/distributions.hpp"
#include "dptf/mixture.hpp"
#include "dptf/prior_moments.hpp"
#include "dptf/stick.hpp"
#include "test_util.hpp"

using namespace dptf;

namespace {

// naive re-evaluation: walk every component without short-cuts
double naive_cell_probability(const ParafacMixture& m, int t, const std::vector<int>& cell) {
  double total = 0.0;
  for (int h = 0; h < m.num_components(); ++h) {
    double term = m.weights()[t][h];
    for (int j = 0; j < m.schema().num_vars(); ++j) term *= m.atoms()[h][j][cell[j]];
    total += term;
  }
  return total;
}

// naive dependence: full double loop over the pairwise table
double naive_dependence(const ParafacMixture& m, int t, int j, int jp) {
  const int dj = m.schema().levels(j);
  const int djp = m.schema().levels(jp);
  double total = 0.0;
  for (int a = 0; a < dj; ++a) {
    for (int b = 0; b < djp; ++b) {
      double joint = 0.0, mj = 0.0, mjp = 0.0;
      for (int h = 0; h < m.num_components(); ++h) {
        joint += m.weights()[t][h] * m.atoms()[h][j][a] * m.atoms()[h][jp][b];
        mj += m.weights()[t][h] * m.atoms()[h][j][a];
        mjp += m.weights()[t][h] * m.atoms()[h][jp][b];
      }
      if (mj * mjp == 0.0) continue;
      total += (joint - mj * mjp) * (joint - mj * mjp) / (mj * mjp);
    }
  }
  return std::sqrt(total / (std::min(dj, djp) - 1));
}

ParafacMixture random_mixture(Rng& rng, const CategoricalSchema& schema, int k, int T) {
  AtomTable atoms(k, std::vector<std::vector<double>>(schema.num_vars()));
  for (int h = 0; h < k; ++h) {
    for (int j = 0; j < schema.num_vars(); ++j) {
      const std::vector<double> conc(schema.levels(j), 1.0);
      atoms[h][j] = sample_dirichlet(rng, conc);
    }
  }
  std::vector<std::vector<double>> weights(T);
  for (int t = 0; t < T; ++t) {
    const std::vector<double> conc(k, 1.0);
    weights[t] = sample_dirichlet(rng, conc);
    for (auto& w : weights[t]) w *= 0.98;  // keep an explicit remainder
  }
  return ParafacMixture(schema, std::move(atoms), std::move(weights));
}

}  // namespace

TEST_CASE("schema validation") {
  CHECK_THROWS(CategoricalSchema({}));
  CHECK_THROWS(CategoricalSchema({2, 1}));
  const CategoricalSchema schema({2, 3, 4});
  CHECK(schema.num_vars() == 3);
  CHECK(schema.num_cells() == 24);
  CHECK(schema.valid_cell(std::vector<int>{1, 2, 3}));
  CHECK(!schema.valid_cell(std::vector<int>{1, 3, 3}));
}

TEST_CASE("cell probability basics") {
  const CategoricalSchema schema({2, 2});
  SUBCASE("single uniform component gives the product of uniforms") {
    AtomTable atoms{{{0.5, 0.5}, {0.5, 0.5}}};
    ParafacMixture m(schema, atoms, {{1.0}});
    CHECK(m.cell_probability(0, std::vector<int>{0, 0}).value == doctest::Approx(0.25));
    CHECK(m.cell_probability(0, std::vector<int>{1, 0}).value == doctest::Approx(0.25));
  }
  SUBCASE("two degenerate components at equal weight") {
    AtomTable atoms{{{1.0, 0.0}, {1.0, 0.0}}, {{0.0, 1.0}, {0.0, 1.0}}};
    ParafacMixture m(schema, atoms, {{0.5, 0.5}});
    CHECK(m.cell_probability(0, std::vector<int>{0, 0}).value == doctest::Approx(0.5));
    CHECK(m.cell_probability(0, std::vector<int>{0, 1}).value == doctest::Approx(0.0));
  }
  SUBCASE("out-of-range arguments raise") {
    AtomTable atoms{{{0.5, 0.5}, {0.5, 0.5}}};
    ParafacMixture m(schema, atoms, {{1.0}});
    CHECK_THROWS_AS((void)m.cell_probability(1, std::vector<int>{0, 0}), std::domain_error);
    CHECK_THROWS_AS((void)m.cell_probability(0, std::vector<int>{0, 2}), std::domain_error);
  }
}

TEST_CASE("random mixtures agree with the naive evaluator and sum to the kept mass") {
  Rng rng(101);
  const CategoricalSchema schema({2, 2, 2});
  for (int rep = 0; rep < 20; ++rep) {
    const auto m = random_mixture(rng, schema, 3, 2);
    double total = 0.0;
    for (int c0 = 0; c0 < 2; ++c0) {
      for (int c1 = 0; c1 < 2; ++c1) {
        for (int c2 = 0; c2 < 2; ++c2) {
          const std::vector<int> cell{c0, c1, c2};
          const auto cp = m.cell_probability(0, cell);
          CHECK(cp.value == doctest::Approx(naive_cell_probability(m, 0, cell)).epsilon(1e-12));
          CHECK(cp.truncation_bound == doctest::Approx(m.remainder(0)));
          total += cp.value;
        }
      }
    }
    CHECK(total == doctest::Approx(1.0 - m.remainder(0)).epsilon(1e-10));
  }
}

TEST_CASE("cell masses enumerate to the kept mass at mixed level counts") {
  Rng rng(106);
  const CategoricalSchema schema({3, 4, 2});
  for (int rep = 0; rep < 10; ++rep) {
    const auto m = random_mixture(rng, schema, 4, 1);
    double total = 0.0;
    for (int c0 = 0; c0 < 3; ++c0) {
      for (int c1 = 0; c1 < 4; ++c1) {
        for (int c2 = 0; c2 < 2; ++c2) {
          total += m.cell_probability(0, std::vector<int>{c0, c1, c2}).value;
        }
      }
    }
    CHECK(total == doctest::Approx(1.0 - m.remainder(0)).epsilon(1e-10));
  }
}

TEST_CASE("marginal probability") {
  const CategoricalSchema schema({2, 2});
  SUBCASE("single component returns the atom entry") {
    AtomTable atoms{{{0.3, 0.7}, {0.6, 0.4}}};
    ParafacMixture m(schema, atoms, {{1.0}});
    CHECK(m.marginal_probability(0, 0, 1) == doctest::Approx(0.7));
  }
  SUBCASE("hand-mixed two components") {
    AtomTable atoms{{{0.2, 0.8}, {0.5, 0.5}}, {{0.9, 0.1}, {0.5, 0.5}}};
    ParafacMixture m(schema, atoms, {{0.3, 0.7}});
    CHECK(m.marginal_probability(0, 0, 0) == doctest::Approx(0.3 * 0.2 + 0.7 * 0.9));
  }
  SUBCASE("levels of one variable sum to the kept mass") {
    Rng rng(102);
    const auto m = random_mixture(rng, schema, 4, 1);
    const double sum = m.marginal_probability(0, 0, 0) + m.marginal_probability(0, 0, 1);
    CHECK(sum == doctest::Approx(1.0 - m.remainder(0)).epsilon(1e-12));
  }
}

TEST_CASE("pairwise dependence") {
  SUBCASE("one full-mass component has none") {
    Rng rng(103);
    const CategoricalSchema schema({3, 4});
    AtomTable atoms(1, std::vector<std::vector<double>>(2));
    atoms[0][0] = sample_dirichlet(rng, std::vector<double>{1.0, 1.0, 1.0});
    atoms[0][1] = sample_dirichlet(rng, std::vector<double>{1.0, 1.0, 1.0, 1.0});
    const ParafacMixture m(schema, atoms, {{1.0}});
    CHECK(m.pairwise_dependence(0, 0, 1) == doctest::Approx(0.0).epsilon(1e-12));
  }
  SUBCASE("diagonal two-by-two table is maximal") {
    const CategoricalSchema schema({2, 2});
    AtomTable atoms{{{1.0, 0.0}, {1.0, 0.0}}, {{0.0, 1.0}, {0.0, 1.0}}};
    ParafacMixture m(schema, atoms, {{0.5, 0.5}});
    CHECK(m.pairwise_dependence(0, 0, 1) == doctest::Approx(1.0));
  }
  SUBCASE("matches the naive double loop on random mixtures") {
    Rng rng(104);
    const CategoricalSchema schema({3, 2});
    for (int rep = 0; rep < 20; ++rep) {
      const auto m = random_mixture(rng, schema, 3, 1);
      CHECK(m.pairwise_dependence(0, 0, 1) ==
            doctest::Approx(naive_dependence(m, 0, 0, 1)).epsilon(1e-10));
    }
  }
  SUBCASE("symmetric in the pair and invariant to level relabeling") {
    Rng rng(105);
    const CategoricalSchema schema({3, 3});
    const auto m = random_mixture(rng, schema, 3, 1);
    CHECK(m.pairwise_dependence(0, 0, 1) == doctest::Approx(m.pairwise_dependence(0, 1, 0)));
    // permute the levels of variable 0 in every atom
    AtomTable permuted = m.atoms();
    for (auto& atom : permuted) {
      std::swap(atom[0][0], atom[0][2]);
    }
    ParafacMixture mp(schema, permuted, m.weights());
    CHECK(mp.pairwise_dependence(0, 0, 1) == doctest::Approx(m.pairwise_dependence(0, 0, 1)));
  }
}

TEST_CASE("link moments under the probit link") {
  const Link probit;
  SUBCASE("centered state gives mean one half") {
    StateHyper hyper{0.0, 0.5, 0.09, 0.25};
    const auto m = link_moments(probit, hyper, 0);
    CHECK(m.mean == doctest::Approx(0.5).epsilon(1e-9));
    CHECK(m.lag_moment == m.second_moment);
  }
  SUBCASE("second moment matches the bivariate orthant identity") {
    StateHyper hyper{0.0, 0.5, 0.09, 0.25};
    const double v = hyper.signal_var();
    const double target = 0.25 + std::asin(v / (1.0 + v)) / (2.0 * M_PI);
    const auto m = link_moments(probit, hyper, 0);
    CHECK(m.second_moment == doctest::Approx(target).epsilon(1e-6));
  }
  SUBCASE("lagged moment matches the orthant identity at every lag") {
    StateHyper hyper{0.0, 0.6, 0.04, 0.36};
    const double v = hyper.signal_var();
    for (int lag = 1; lag <= 4; ++lag) {
      const double cov = std::pow(hyper.phi, lag) * hyper.stationary_var();
      const double target = 0.25 + std::asin(cov / (1.0 + v)) / (2.0 * M_PI);
      const auto m = link_moments(probit, hyper, lag);
      CHECK(m.lag_moment == doctest::Approx(target).epsilon(1e-6));
    }
  }
  SUBCASE("moment inequalities and monotone lag decay") {
    StateHyper hyper{0.4, 0.7, 0.09, 0.25};
    const auto m0 = link_moments(probit, hyper, 0);
    CHECK(m0.second_moment <= m0.mean);
    double previous = m0.second_moment;
    for (int lag = 1; lag <= 5; ++lag) {
      const auto mk = link_moments(probit, hyper, lag);
      CHECK(mk.lag_moment > 0.0);
      CHECK(mk.lag_moment < mk.mean);
      CHECK(mk.lag_moment <= previous + 1e-12);
      previous = mk.lag_moment;
    }
  }
  SUBCASE("rejects an explosive autocorrelation") {
    StateHyper hyper{0.0, 1.0, 0.1, 0.1};
    CHECK_THROWS_AS((void)link_moments(probit, hyper, 1), std::domain_error);
  }
}

TEST_CASE("prior moment report") {
  const Link probit;
  SUBCASE("uniform concentration expectation is one over the cell count") {
    const CategoricalSchema schema({4, 4});
    const auto hyper = DirichletHyper::symmetric(schema, 1.0);
    StateHyper state{0.0, 0.5, 0.09, 0.25};
    const std::vector<int> cell{0, 0};
    const auto report = prior_moments(schema, hyper, probit, state, cell, cell, 0);
    CHECK(report.expectation == doctest::Approx(1.0 / 16.0));
    CHECK(report.variance >= 0.0);
  }
  SUBCASE("matching cells covary positively, fully mismatched negatively") {
    const CategoricalSchema schema({2, 3});
    const auto hyper = DirichletHyper::symmetric(schema, 1.0);
    StateHyper state{0.0, 0.5, 0.09, 0.25};
    const std::vector<int> cell{0, 0};
    const std::vector<int> same{0, 0};
    const std::vector<int> disjoint{1, 2};
    CHECK(prior_moments(schema, hyper, probit, state, cell, same, 1).covariance > 0.0);
    CHECK(prior_moments(schema, hyper, probit, state, cell, disjoint, 1).covariance < 0.0);
  }
  SUBCASE("variance equals the matching-cell covariance at lag zero") {
    const CategoricalSchema schema({3, 2});
    const auto hyper = DirichletHyper::symmetric(schema, 2.0);
    StateHyper state{0.2, 0.6, 0.04, 0.16};
    const std::vector<int> cell{1, 0};
    const auto report = prior_moments(schema, hyper, probit, state, cell, cell, 0);
    CHECK(report.variance == doctest::Approx(report.covariance).epsilon(1e-12));
  }
}

TEST_CASE("prior moments match direct simulation of the generative prior") {
  // p=1, d=2: simulate atoms and weight ladders, evaluate the level-0 mass
  const CategoricalSchema schema({2});
  const auto hyper = DirichletHyper::symmetric(schema, 1.0);
  StateHyper state{0.0, 0.5, 0.09, 0.25};
  const Link probit;
  const std::vector<int> cell{0};

  constexpr int kSims = 100000;
  constexpr int kCols = 60;
  Rng rng(202);
  std::vector<double> pi_t(kSims), pi_lag(kSims);
  const std::vector<double> conc{1.0, 1.0};
  for (int s = 0; s < kSims; ++s) {
    const auto traj = sample_prior_trajectory(state, 2, kCols, rng);
    double value_t = 0.0, value_lag = 0.0;
    double stick_t = 1.0, stick_lag = 1.0;
    for (int h = 0; h < kCols; ++h) {
      const double atom = sample_dirichlet(rng, conc)[0];
      const double g_t = probit(traj.signal(0, h));
      const double g_lag = probit(traj.signal(1, h));
      value_t += g_t * stick_t * atom;
      value_lag += g_lag * stick_lag * atom;
      stick_t *= 1.0 - g_t;
      stick_lag *= 1.0 - g_lag;
    }
    pi_t[s] = value_t;
    pi_lag[s] = value_lag;
  }

  const auto report0 = prior_moments(schema, hyper, probit, state, cell, cell, 0);
  const auto report1 = prior_moments(schema, hyper, probit, state, cell, cell, 1);

  CHECK(std::fabs(testutil::mean(pi_t) - report0.expectation) < 3.0 * testutil::std_error(pi_t));

  const double m = testutil::mean(pi_t);
  std::vector<double> sq(kSims), cross(kSims);
  const double m_lag = testutil::mean(pi_lag);
  for (int s = 0; s < kSims; ++s) {
    sq[s] = (pi_t[s] - m) * (pi_t[s] - m);
    cross[s] = (pi_t[s] - m) * (pi_lag[s] - m_lag);
  }
  CHECK(std::fabs(testutil::mean(sq) - report0.variance) < 3.0 * testutil::std_error(sq));
  CHECK(std::fabs(testutil::mean(cross) - report1.covariance) < 3.0 * testutil::std_error(cross));
}

TEST_CASE("prior weights are stationary in time") {
  // the first-component weight should have the same law at every wave
  StateHyper hyper{0.1, 0.7, 0.04, 0.25};
  const Link probit;
  int rejections = 0;
  for (std::uint64_t seed = 1; seed <= 3; ++seed) {
    Rng rng(seed * 7919);
    constexpr int kSims = 4000, T = 6;
    std::vector<double> first(kSims), last(kSims);
    for (int s = 0; s < kSims; ++s) {
      const auto traj = sample_prior_trajectory(hyper, T, 1, rng);
      first[s] = probit(traj.signal(0, 0));
      last[s] = probit(traj.signal(T - 1, 0));
    }
    if (testutil::ks_two_sample_pvalue(first, last) < 0.01) ++rejections;
  }
  CHECK(rejections <= 1);
}
