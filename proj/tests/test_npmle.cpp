#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "ebcd/error.hpp"
#include "ebcd/mixture.hpp"
#include "ebcd/npmle.hpp"
#include "ebcd/random.hpp"
#include "oracles.hpp"

using namespace ebcd;

namespace {

Sample two_point_sample(std::size_t n, std::uint64_t seed, double c = 2.0) {
  std::mt19937_64 rng(seed);
  std::bernoulli_distribution coin(0.5);
  std::normal_distribution<double> noise(0.0, 1.0);
  std::vector<double> y(n);
  for (auto& v : y) v = (coin(rng) ? c : -c) + noise(rng);
  return Sample(std::move(y), 1.0);
}

}  // namespace

TEST(Grid, DefaultSize) {
  EXPECT_EQ(default_grid_size(1), 300);
  EXPECT_EQ(default_grid_size(44), 300);   // 44^1.5 = 291.9
  EXPECT_EQ(default_grid_size(45), 302);   // 45^1.5 = 301.87
  EXPECT_EQ(default_grid_size(100), 1000);
  EXPECT_EQ(default_grid_size(464), 9995);
  EXPECT_EQ(default_grid_size(465), 10000);
  EXPECT_EQ(default_grid_size(1000000), 10000);
  EXPECT_FALSE(default_grid_capped(464));
  EXPECT_TRUE(default_grid_capped(465));
}

TEST(Grid, DefaultRangeAndValidation) {
  const Sample s({3.0, -1.0, 0.5}, 2.0);
  const auto g = default_grid(s, 5);
  EXPECT_EQ(g.lo, -3.0);
  EXPECT_EQ(g.hi, 5.0);
  EXPECT_EQ(g.points(), (std::vector<double>{-3, -1, 1, 3, 5}));
  EXPECT_THROW((GridSpec{1.0, 1.0, 10}.validate()), ValidationError);
  EXPECT_THROW((GridSpec{0.0, 1.0, 1}.validate()), ValidationError);
  EXPECT_THROW((GridSpec{0.0, INFINITY, 4}.validate()), ValidationError);
  EXPECT_THROW(default_grid(s, 1), ValidationError);
}

TEST(EMConfig, Validation) {
  EXPECT_NO_THROW(EMConfig{}.validate());
  EXPECT_THROW((EMConfig{0, 1e-9, 1e-10, {}}.validate()), ValidationError);
  EXPECT_THROW((EMConfig{10, 0.0, 1e-10, {}}.validate()), ValidationError);
  EXPECT_THROW((EMConfig{10, 1e-9, 1e-3, {}}.validate()), ValidationError);
  EXPECT_THROW((EMConfig{10, 1e-9, 1e-10, 0}.validate()), ValidationError);
}

TEST(EM, StepMatchesDirectUpdate) {
  const Sample s = two_point_sample(40, 3);
  const GridSpec grid{-5.0, 5.0, 41};
  std::vector<double> w(41);
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(0.1, 1.0);
  double total = 0;
  for (auto& v : w) total += (v = u(rng));
  for (auto& v : w) v /= total;
  const std::vector<double> y(s.y().begin(), s.y().end());
  const auto ref = oracle::em_step(w, y, grid.points(), 1.0);
  const auto got = em_step(w, s, grid);
  ASSERT_EQ(got.size(), ref.size());
  double sum = 0;
  for (std::size_t j = 0; j < got.size(); ++j) {
    EXPECT_NEAR(got[j], ref[j], 1e-14);
    sum += got[j];
  }
  EXPECT_NEAR(sum, 1.0, 1e-13);
}

TEST(EM, StepOnLargeInstanceMatchesDirectUpdate) {
  // n * m above the cached-kernel threshold exercises the streaming path.
  const Sample s = two_point_sample(9000, 8);
  const GridSpec grid{-7.0, 7.0, 2000};
  const std::vector<double> w(2000, 1.0 / 2000);
  const auto got = em_step(w, s, grid);
  const Sample small({s.y().begin(), s.y().begin() + 100}, 1.0);
  const auto got_small = em_step(w, small, grid);
  const std::vector<double> y(s.y().begin(), s.y().end());
  const std::vector<double> y_small(y.begin(), y.begin() + 100);
  const auto pts = grid.points();
  // Compare a handful of coordinates against the direct update.
  const auto ref = oracle::em_step(w, y, pts, 1.0);
  const auto ref_small = oracle::em_step(w, y_small, pts, 1.0);
  for (std::size_t j = 0; j < 2000; j += 97) {
    EXPECT_NEAR(got[j], ref[j], 1e-14);
    EXPECT_NEAR(got_small[j], ref_small[j], 1e-14);
  }
}

TEST(EM, LoglikNondecreasingAndGapSmall) {
  const Sample s = two_point_sample(150, 21);
  const GridSpec grid = default_grid(s, 300);
  const auto fit = fit_npmle(s, grid, EMConfig{200000, 1e-10, 1e-10, {}});
  ASSERT_EQ(fit.loglik_trace.size(), static_cast<std::size_t>(fit.iterations_used) + 1);
  for (std::size_t t = 1; t < fit.loglik_trace.size(); ++t) {
    EXPECT_GE(fit.loglik_trace[t], fit.loglik_trace[t - 1] - 1e-10) << "iteration " << t;
  }
  EXPECT_TRUE(fit.converged);
  EXPECT_LE(fit.optimality_gap, 1e-4);
  EXPECT_GE(fit.optimality_gap, -1e-9);
  EXPECT_NEAR(loglik(fit.g_hat, s), fit.loglik_trace.back(), 1e-6);
  EXPECT_LE(support_count(fit.g_hat, 1e-6, grid.spacing()), static_cast<int>(s.size()));
}

// Plain EM stops on rel_tol here with D = 4.5e-3 at -4.42, next to the
// outlying Y = -4.81: the weight there decays early and regrows only by a
// factor 1 + D per iteration.
TEST(EM, OutlierAtomIsNotStranded) {
  Engine rng = make_engine(6006);
  std::uniform_int_distribution<int> size(5, 200);
  std::vector<double> y;
  for (int inst = 0; inst <= 12; ++inst) {
    y.assign(static_cast<std::size_t>(size(rng)), 0.0);
    for (auto& v : y) {
      double theta = 0.0;
      switch (inst % 3) {
        case 0: theta = (rng() & 1) ? 2.0 : -2.0; break;
        case 1: theta = 2.0 * standard_normal(rng); break;
        default: theta = 5.0 * static_cast<double>(rng() % 3); break;
      }
      v = theta + standard_normal(rng);
    }
  }
  ASSERT_EQ(y.size(), 138u);
  const Sample s(std::move(y), 1.0);
  const GridSpec grid = default_grid(s, 300);
  const auto fit = fit_npmle(s, grid, EMConfig{300000, 1e-10, 1e-10, {}});
  EXPECT_TRUE(fit.converged);
  EXPECT_LE(fit.optimality_gap, 1e-4);
  double tail = 0.0;
  for (std::size_t j = 0; j < fit.g_hat.size(); ++j) {
    if (fit.g_hat.atoms()[j] < -4.0) tail += fit.g_hat.weights()[j];
  }
  EXPECT_GT(tail, 1e-5);
  for (std::size_t t = 1; t < fit.loglik_trace.size(); ++t) {
    ASSERT_GE(fit.loglik_trace[t], fit.loglik_trace[t - 1] - 1e-10) << "iteration " << t;
  }
}

TEST(EM, SingleObservationConcentratesOnNearestAtom) {
  const Sample s({0.7}, 1.0);
  const GridSpec grid{-1.0, 2.0, 31};
  const auto fit = fit_npmle(s, grid, EMConfig{200000, 1e-12, 1e-10, {}});
  std::size_t top = 0;
  for (std::size_t k = 1; k < fit.g_hat.size(); ++k) {
    if (fit.g_hat.weights()[k] > fit.g_hat.weights()[top]) top = k;
  }
  EXPECT_NEAR(fit.g_hat.atoms()[top], 0.7, 1e-12);
  EXPECT_GT(fit.g_hat.weights()[top], 0.99);
}

TEST(EM, PointMassDataRecoversPointMass) {
  // Every observation equal: the likelihood is maximized by a point mass there.
  const Sample s(std::vector<double>(25, 1.0), 1.0);
  const auto fit = fit_npmle(s, GridSpec{-1.0, 3.0, 41}, EMConfig{200000, 1e-12, 1e-10, {}});
  EXPECT_NEAR(fit.g_hat.mean(), 1.0, 1e-3);
  EXPECT_LE(fit.optimality_gap, 1e-4);
}

TEST(EM, StopsAtIterationLimits) {
  const Sample s = two_point_sample(50, 4);
  const auto grid = default_grid(s, 100);
  const auto a = fit_npmle(s, grid, EMConfig{7, 1e-15, 1e-10, {}});
  EXPECT_EQ(a.iterations_used, 7);
  EXPECT_FALSE(a.converged);
  const auto b = fit_npmle(s, grid, EMConfig{1000, 1e-15, 1e-10, 3});
  EXPECT_EQ(b.iterations_used, 3);
  EXPECT_EQ(b.loglik_trace.size(), 4u);
}

TEST(EM, PrunedWeightsSumToOne) {
  const Sample s = two_point_sample(80, 9);
  const auto fit = fit_npmle(s, default_grid(s, 400), EMConfig{3000, 1e-9, 1e-8, {}});
  double total = 0;
  for (double w : fit.g_hat.weights()) {
    EXPECT_GT(w, 1e-8 * 0.5);
    total += w;
  }
  EXPECT_NEAR(total, 1.0, 1e-12);
}

TEST(OptimalityGap, ZeroOnSupportOfExactMle) {
  // For a single observation the MLE over {a, b} is the nearer atom, and the
  // directional derivative there is exactly zero.
  const Sample s({0.2}, 1.0);
  const GridSpec grid{0.0, 1.0, 2};
  const auto g = MixingDistribution::point_mass(0.0);
  EXPECT_NEAR(optimality_gap(g, s, grid), 0.0, 1e-15);
  const auto far = MixingDistribution::point_mass(1.0);
  EXPECT_GT(optimality_gap(far, s, grid), 0.0);
}

TEST(SupportCount, ClustersAdjacentAtoms) {
  const MixingDistribution g({0.0, 0.1, 0.2, 5.0, 5.1, 9.0}, {0.2, 0.2, 0.1, 0.25, 0.25, 0.0});
  EXPECT_EQ(support_count(g, 1e-6, 0.1), 2);
  EXPECT_EQ(support_count(g, 0.6, 0.1), 0);
  EXPECT_EQ(support_count(g, 1e-6, 0.01), 5);
}

TEST(EM, ObservationsFarOutsideGridStayFinite) {
  // Row scaling keeps every observation's best grid point at kernel value 1.
  const Sample s({-40.0, 40.0}, 0.01);
  const auto fit = fit_npmle(s, GridSpec{-1.0, 1.0, 3}, EMConfig{100, 1e-12, 1e-10, {}});
  EXPECT_TRUE(std::isfinite(fit.loglik_trace.back()));
  EXPECT_NEAR(fit.g_hat.weights().front(), 0.5, 1e-12);
  EXPECT_NEAR(fit.g_hat.weights().back(), 0.5, 1e-12);
}

TEST(EM, StepExamples) {
  // Symmetric data on a symmetric grid keeps the weights symmetric.
  const auto sym = em_step(std::vector<double>{0.5, 0.5}, Sample({-1.0, 1.0}, 1.0),
                           GridSpec{-2.0, 2.0, 2});
  EXPECT_NEAR(sym[0], 0.5, 1e-15);
  EXPECT_NEAR(sym[1], 0.5, 1e-15);

  // Hand computation: responsibility of atom 3 for y = 3 is
  // phi(0) / (phi(0) + phi(3)) = 1 / (1 + exp(-4.5)).
  const auto up = em_step(std::vector<double>{0.5, 0.5}, Sample({3.0, 3.0, 3.0}, 1.0),
                          GridSpec{0.0, 3.0, 2});
  EXPECT_NEAR(up[1], 1.0 / (1.0 + std::exp(-4.5)), 1e-15);
  EXPECT_GT(up[1], 0.5);
}

TEST(EM, TwoPointTruthIsRecovered) {
  const Sample s = two_point_sample(500, 77);
  const auto fit = fit_npmle(s, default_grid(s, 400));
  double left = 0, right = 0;
  for (std::size_t k = 0; k < fit.g_hat.size(); ++k) {
    const double a = fit.g_hat.atoms()[k];
    if (std::abs(a + 2) < 1) left += fit.g_hat.weights()[k];
    if (std::abs(a - 2) < 1) right += fit.g_hat.weights()[k];
  }
  EXPECT_NEAR(left, 0.5, 0.1);
  EXPECT_NEAR(right, 0.5, 0.1);
  EXPECT_EQ(support_count(fit.g_hat, 1e-8, fit.grid.spacing()) >= 2, true);
}

TEST(EM, SingleObservationMassNearObservation) {
  const Sample s({0.7}, 1.0);
  const GridSpec grid{-1.0, 2.0, 31};
  const auto fit = fit_npmle(s, grid, EMConfig{20000, 1e-15, 1e-10, {}});
  double near = 0;
  for (std::size_t k = 0; k < fit.g_hat.size(); ++k) {
    if (std::abs(fit.g_hat.atoms()[k] - 0.7) <= grid.spacing()) near += fit.g_hat.weights()[k];
  }
  EXPECT_GE(near, 1 - 1e-6);
  EXPECT_LE(fit.optimality_gap, 1e-6);
}

TEST(OptimalityGap, DecreasesUnderEmSteps) {
  const Sample s = two_point_sample(60, 31, 3.0);
  const GridSpec grid = default_grid(s, 120);
  std::vector<double> w(120, 1.0 / 120);
  double previous = optimality_gap(MixingDistribution(grid.points(), w), s, grid);
  EXPECT_GT(previous, 0.0);
  for (int t = 0; t < 5; ++t) {
    w = em_step(w, s, grid);
    const double gap = optimality_gap(MixingDistribution::from_unnormalized(grid.points(), w), s, grid);
    EXPECT_LT(gap, previous);
    previous = gap;
  }
}

TEST(SupportCount, PointMassAndSeparatedClusters) {
  EXPECT_EQ(support_count(MixingDistribution::point_mass(3.0), 1e-8, 0.1), 1);
  std::mt19937_64 rng(13);
  std::normal_distribution<double> noise(0.0, 0.3);
  std::vector<double> y;
  for (int i = 0; i < 100; ++i) y.push_back((i % 2 ? 10.0 : -10.0) + noise(rng));
  const Sample s(std::move(y), 0.3);
  // The NPMLE leaves small outlying atoms next to each cluster, so only
  // clusters carrying real weight are counted.
  const auto fit = fit_npmle(s, default_grid(s, 60));
  EXPECT_EQ(support_count(fit.g_hat, 0.05, fit.grid.spacing()), 2);
}

TEST(Grid, RefinementShrinksLoglikChange) {
  const Sample s = two_point_sample(40, 17);
  const EMConfig em{100000, 1e-12, 1e-10, {}};
  auto ll = [&](int m) { return fit_npmle(s, default_grid(s, m), em).loglik_trace.back(); };
  const double d1 = std::abs(ll(20) - ll(40));
  const double d2 = std::abs(ll(40) - ll(80));
  const double d3 = std::abs(ll(80) - ll(160));
  EXPECT_LT(d2, d1);
  EXPECT_LT(d3, d2);
}

TEST(EM, FittedMarginalMatchesSampleMean) {
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const Sample s = two_point_sample(200, 300 + seed);
    const auto fit = fit_npmle(s, default_grid(s, 300));
    double mean = 0, ss = 0;
    for (double y : s.y()) mean += y;
    mean /= 200;
    for (double y : s.y()) ss += (y - mean) * (y - mean);
    const double sd = std::sqrt(ss / 199);
    // The marginal mean of Y under G equals the mean of G.
    EXPECT_LE(std::abs(fit.g_hat.mean() - mean), 5 * sd / std::sqrt(200.0));
  }
}

TEST(Grid, SpecExamples) {
  const auto g = default_grid(Sample({0.0}, 1.0));
  EXPECT_EQ(g.lo, -1.0);
  EXPECT_EQ(g.hi, 1.0);
  EXPECT_EQ(default_grid_size(10000), 10000);
  // A one-point grid is not a valid GridSpec, so the one-atom simplex is
  // exercised with a two-point grid carrying all weight on one atom.
  const auto w = em_step(std::vector<double>{1.0, 0.0}, Sample({5.0, -2.0}, 1.0), GridSpec{0.0, 1.0, 2});
  EXPECT_EQ(w[0], 1.0);
  EXPECT_EQ(w[1], 0.0);
}
