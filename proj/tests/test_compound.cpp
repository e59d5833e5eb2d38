#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "ebcd/compound.hpp"
#include "ebcd/decision_rule.hpp"
#include "ebcd/error.hpp"
#include "oracles.hpp"

using namespace ebcd;

namespace {

struct Instance {
  std::vector<double> theta;
  std::vector<double> y;
};

Instance make_instance(std::size_t n, std::uint64_t seed, double spread = 2.0) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> d(0.0, spread), noise(0.0, 1.0);
  Instance in;
  for (std::size_t i = 0; i < n; ++i) {
    in.theta.push_back(d(rng));
    in.y.push_back(in.theta.back() + noise(rng));
  }
  return in;
}

double max_abs_diff(const std::vector<double>& a, const std::vector<double>& b) {
  double m = 0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

}  // namespace

TEST(ParameterVector, Validates) {
  EXPECT_THROW(ParameterVector({}), ValidationError);
  EXPECT_THROW(ParameterVector({1.0, NAN}), ValidationError);
}

TEST(SimpleEstimator, IsTweedieOfEmpiricalTheta) {
  const auto in = make_instance(12, 1);
  const ParameterVector p(in.theta);
  const Sample s(in.y, 1.3);
  const auto got = simple_estimator(p, s);
  const auto rule = tweedie_rule(MixingDistribution::empirical(in.theta), 1.3);
  for (std::size_t i = 0; i < got.size(); ++i) EXPECT_EQ(got[i], rule(in.y[i]));
  EXPECT_THROW(simple_estimator(ParameterVector({1.0}), s), ValidationError);
}

TEST(PermExact, SingleCoordinateReturnsTheta) {
  EXPECT_EQ(perm_invariant_exact(ParameterVector({2.5}), Sample({-7.0}, 1.0)),
            std::vector<double>{2.5});
}

TEST(PermExact, TwoCoordinatesClosedForm) {
  // L(swap) / L(id) = exp((y1 - y2)(t2 - t1) / sigma^2).
  const double t1 = -1.0, t2 = 1.5, y1 = 0.3, y2 = -0.4, sigma = 0.9;
  const double r = std::exp((y1 - y2) * (t2 - t1) / (sigma * sigma));
  const double d1 = (t1 + r * t2) / (1 + r);
  const double d2 = (t2 + r * t1) / (1 + r);
  const auto got = perm_invariant_exact(ParameterVector({t1, t2}), Sample({y1, y2}, sigma));
  EXPECT_NEAR(got[0], d1, 1e-14);
  EXPECT_NEAR(got[1], d2, 1e-14);
}

TEST(PermExact, MatchesDirectEnumeration) {
  for (std::size_t n = 2; n <= 7; ++n) {
    const auto in = make_instance(n, 10 + n);
    const auto got = perm_invariant_exact(ParameterVector(in.theta), Sample(in.y, 1.0));
    const auto ref = oracle::perm_invariant(in.theta, in.y, 1.0);
    EXPECT_LT(max_abs_diff(got, ref), 1e-12) << "n = " << n;
  }
}

TEST(PermExact, DuplicateThetaValues) {
  const std::vector<double> theta{1.0, 1.0, -1.0, 3.0};
  const std::vector<double> y{0.2, 1.7, -2.0, 2.5};
  const auto got = perm_invariant_exact(ParameterVector(theta), Sample(y, 1.0));
  EXPECT_LT(max_abs_diff(got, oracle::perm_invariant(theta, y, 1.0)), 1e-12);
}

TEST(PermExact, ConstantThetaAndLimits) {
  const auto got = perm_invariant_exact(ParameterVector({4.0, 4.0, 4.0}), Sample({0, 9, -3}, 1));
  EXPECT_EQ(got, (std::vector<double>{4.0, 4.0, 4.0}));
  const auto big = make_instance(10, 3);
  EXPECT_THROW(perm_invariant_exact(ParameterVector(big.theta), Sample(big.y, 1.0)),
               ValidationError);
}

TEST(PermExact, FarTailStaysFinite) {
  const auto got =
      perm_invariant_exact(ParameterVector({-1.0, 1.0, 2.0}), Sample({-500.0, 40.0, 900.0}, 0.1));
  for (double v : got) EXPECT_TRUE(std::isfinite(v));
  EXPECT_NEAR(got[0], -1.0, 1e-12);
  EXPECT_NEAR(got[2], 2.0, 1e-12);
}

TEST(PermExact, Equivariance) {
  const auto in = make_instance(6, 4);
  const auto base = perm_invariant_exact(ParameterVector(in.theta), Sample(in.y, 1.0));
  std::vector<std::size_t> idx{3, 0, 5, 1, 4, 2};
  std::vector<double> y2, t2 = in.theta;
  for (std::size_t i : idx) y2.push_back(in.y[i]);
  std::reverse(t2.begin(), t2.end());
  const auto moved = perm_invariant_exact(ParameterVector(t2), Sample(y2, 1.0));
  for (std::size_t k = 0; k < idx.size(); ++k) EXPECT_NEAR(moved[k], base[idx[k]], 1e-14);
}

class PermMC : public ::testing::TestWithParam<PermSampler> {};

TEST_P(PermMC, AgreesWithExactEnumeration) {
  for (std::size_t n = 2; n <= 7; ++n) {
    const auto in = make_instance(n, 30 + n);
    const ParameterVector p(in.theta);
    const Sample s(in.y, 1.0);
    const auto exact = perm_invariant_exact(p, s);
    const auto mc = perm_invariant_mc(p, s, {200000, 5, GetParam()});
    EXPECT_LT(max_abs_diff(mc.estimates, exact), 0.02) << "n = " << n;
    EXPECT_FALSE(mc.degenerate);
  }
}

TEST_P(PermMC, ErrorShrinksWithBudget) {
  const auto in = make_instance(6, 50);
  const ParameterVector p(in.theta);
  const Sample s(in.y, 1.0);
  const auto exact = perm_invariant_exact(p, s);
  // Average over seeds so the comparison is not at the mercy of one draw.
  double small = 0, large = 0;
  for (std::uint64_t seed = 0; seed < 8; ++seed) {
    small += max_abs_diff(perm_invariant_mc(p, s, {2000, seed, GetParam()}).estimates, exact);
    large += max_abs_diff(perm_invariant_mc(p, s, {200000, seed, GetParam()}).estimates, exact);
  }
  EXPECT_LT(large, small / 3);
}

TEST_P(PermMC, DeterministicAndEquivariant) {
  const auto in = make_instance(40, 6);
  const PermMCConfig cfg{20000, 99, GetParam()};
  const auto a = perm_invariant_mc(ParameterVector(in.theta), Sample(in.y, 1.0), cfg);
  const auto b = perm_invariant_mc(ParameterVector(in.theta), Sample(in.y, 1.0), cfg);
  EXPECT_EQ(a.estimates, b.estimates);
  EXPECT_EQ(a.effective_samples, b.effective_samples);

  std::vector<std::size_t> idx(40);
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  std::shuffle(idx.begin(), idx.end(), std::mt19937_64(1));
  std::vector<double> y2, t2 = in.theta;
  for (std::size_t i : idx) y2.push_back(in.y[i]);
  std::shuffle(t2.begin(), t2.end(), std::mt19937_64(2));
  const auto c = perm_invariant_mc(ParameterVector(t2), Sample(y2, 1.0), cfg);
  for (std::size_t k = 0; k < idx.size(); ++k) EXPECT_EQ(c.estimates[k], a.estimates[idx[k]]);
}

TEST_P(PermMC, EstimatesStayInThetaHull) {
  const auto in = make_instance(30, 7, 0.5);
  const auto r = perm_invariant_mc(ParameterVector(in.theta), Sample(in.y, 0.2), {5000, 1, GetParam()});
  const auto [lo, hi] = std::minmax_element(in.theta.begin(), in.theta.end());
  for (double v : r.estimates) {
    EXPECT_GE(v, *lo);
    EXPECT_LE(v, *hi);
  }
}

TEST_P(PermMC, ConstantTheta) {
  const auto r = perm_invariant_mc(ParameterVector({2.0, 2.0}), Sample({0.0, 5.0}, 1.0),
                                   {10, 0, GetParam()});
  EXPECT_EQ(r.estimates, (std::vector<double>{2.0, 2.0}));
  EXPECT_FALSE(r.degenerate);
}

INSTANTIATE_TEST_SUITE_P(Samplers, PermMC,
                         ::testing::Values(PermSampler::importance, PermSampler::metropolis),
                         [](const auto& info) { return std::string(to_string(info.param)); });

TEST(PermSampling, UniformProposalDegeneratesAtLargeN) {
  const auto in = make_instance(100, 8, 3.0);
  const auto r = perm_invariant_mc(ParameterVector(in.theta), Sample(in.y, 1.0),
                                   {20000, 0, PermSampler::importance});
  EXPECT_TRUE(r.degenerate);
  EXPECT_LT(r.effective_samples, 10.0);
}

TEST(PermSampling, ConfigValidation) {
  EXPECT_THROW((PermMCConfig{0, 0, PermSampler::importance}.validate()), ValidationError);
  EXPECT_EQ(parse_perm_sampler("metropolis"), PermSampler::metropolis);
  EXPECT_THROW(parse_perm_sampler("gibbs"), ValidationError);
}
