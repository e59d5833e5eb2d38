#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "ebcd/decision_rule.hpp"
#include "ebcd/error.hpp"
#include "ebcd/sure.hpp"

using namespace ebcd;

namespace {

Sample gaussian_sample(std::size_t n, double sigma, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> d(0.5, 2.0);
  std::vector<double> y(n);
  for (auto& v : y) v = d(rng);
  return Sample(std::move(y), sigma);
}

}  // namespace

TEST(Sure, IdentityIsNoiseVarianceExactly) {
  for (double sigma : {0.3, 1.0, 2.0}) {
    const auto s = gaussian_sample(37, sigma, 1);
    EXPECT_EQ(sure_general(DecisionRule::identity(), s).value, sigma * sigma);
  }
}

TEST(Sure, ConstantRule) {
  const auto s = gaussian_sample(20, 1.5, 2);
  double ref = 0;
  for (double y : s.y()) ref += (3.0 - y) * (3.0 - y);
  ref = ref / 20 - 2.25;
  EXPECT_NEAR(sure_general(DecisionRule::constant(3.0), s).value, ref, 1e-12);
}

TEST(Sure, LinearShrinkageClosedForm) {
  // delta = a y: SURE = (1 - a)^2 mean(y^2) + 2 sigma^2 (a - 1) + sigma^2.
  const auto s = gaussian_sample(50, 1.0, 3);
  const double a = 0.6;
  double m2 = 0;
  for (double y : s.y()) m2 += y * y;
  m2 /= 50;
  const auto rule = DecisionRule([a](double y) { return a * y; }, [a](double) { return a; });
  EXPECT_NEAR(sure_general(rule, s).value, 0.16 * m2 - 0.8 + 1.0, 1e-12);
}

TEST(Sure, BayesFormMatchesGeneralForm) {
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> atom(-4, 4), weight(0.1, 1), sig(0.5, 2);
  for (int rep = 0; rep < 30; ++rep) {
    std::vector<double> atoms(5), weights(5);
    for (auto& a : atoms) a = atom(rng);
    std::sort(atoms.begin(), atoms.end());
    for (auto& w : weights) w = weight(rng);
    const auto g = MixingDistribution::from_unnormalized(atoms, weights);
    const auto s = gaussian_sample(40, sig(rng), 100 + rep);
    const double a = sure_bayes(g, s).value;
    const double b = sure_general(tweedie_rule(g, s.sigma()), s).value;
    EXPECT_NEAR(a, b, 1e-9);
  }
}

TEST(McRisk, IdentityRiskIsSigmaSquared) {
  const std::vector<double> theta{0, 1, -2, 5, 3};
  const auto r = mc_risk(DecisionRule::identity(), theta, 1.5, 4000, 9);
  EXPECT_NEAR(r.value, 2.25, 4 * r.standard_error);
  EXPECT_GT(r.standard_error, 0.0);
  EXPECT_EQ(r.n, 5u);
}

TEST(McRisk, IndependentOfWorkerCount) {
  const std::vector<double> theta{0, 1, -2, 5, 3, 0.5};
  const auto g = MixingDistribution::empirical(theta);
  const auto rule = tweedie_rule(g, 1.0);
  const auto a = mc_risk(rule, theta, 1.0, 500, 77, 1);
  const auto b = mc_risk(rule, theta, 1.0, 500, 77, 4);
  EXPECT_EQ(a.value, b.value);
  EXPECT_EQ(a.standard_error, b.standard_error);
  const auto c = mc_risk(rule, theta, 1.0, 500, 78, 1);
  EXPECT_NE(a.value, c.value);
}

TEST(McRisk, Validates) {
  const std::vector<double> theta{0.0};
  EXPECT_THROW(mc_risk(DecisionRule::identity(), theta, 1.0, 1, 0), ValidationError);
  EXPECT_THROW(mc_risk(DecisionRule::identity(), theta, 0.0, 10, 0), ValidationError);
  EXPECT_THROW(mc_risk(DecisionRule::identity(), {}, 1.0, 10, 0), ValidationError);
}

TEST(Sure, UnbiasedForTweedieRuleAtModerateScale) {
  std::mt19937_64 rng(12);
  std::bernoulli_distribution coin(0.5);
  std::vector<double> theta(20);
  for (auto& t : theta) t = coin(rng) ? 2.0 : -2.0;
  const auto g = MixingDistribution({-2.0, 2.0}, {0.5, 0.5});
  const auto rule = tweedie_rule(g, 1.0);
  const auto risk = mc_risk(rule, theta, 1.0, 2000, 5);
  std::normal_distribution<double> noise(0.0, 1.0);
  std::vector<double> sures(2000);
  double mean = 0;
  for (auto& v : sures) {
    std::vector<double> y(20);
    for (std::size_t i = 0; i < 20; ++i) y[i] = theta[i] + noise(rng);
    v = sure_general(rule, Sample(std::move(y), 1.0)).value;
    mean += v;
  }
  mean /= 2000;
  double ss = 0;
  for (double v : sures) ss += (v - mean) * (v - mean);
  const double se = std::sqrt(ss / 1999 / 2000);
  EXPECT_NEAR(mean, risk.value, 4 * std::hypot(se, risk.standard_error));
}

TEST(Sure, SinglePointMassSampleIsNegative) {
  const auto g = MixingDistribution::point_mass(0.0);
  const Sample s({0.0}, 1.0);
  EXPECT_NEAR(sure_general(tweedie_rule(g, 1.0), s).value, -1.0, 1e-15);
  EXPECT_NEAR(sure_bayes(g, s).value, -1.0, 1e-15);
}
