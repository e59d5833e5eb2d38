#pragma once

#include <cstddef>
#include <cstdint>
#include <span>

#include "ebcd/decision_rule.hpp"
#include "ebcd/mixture.hpp"

namespace ebcd {

/// A risk value in squared observation units. standard_error is zero for the
/// plug-in SURE values and the Monte Carlo standard error for mc_risk.
struct RiskEstimate {
  double value = 0.0;
  std::size_t n = 0;
  double standard_error = 0.0;
};

/// Stein's unbiased risk estimate of a differentiable separable rule:
///   (1/n) sum_i [(delta(Y_i) - Y_i)^2 + 2 sigma^2 (delta'(Y_i) - 1)] + sigma^2.
/// May be negative for small samples.
RiskEstimate sure_general(const DecisionRule& rule, const Sample& s);

/// SURE of the Bayes rule for g written through the marginal density:
///   sigma^4 (1/n) sum_i [2 f''/f - (f'/f)^2](Y_i) + sigma^2.
/// Algebraically equal to sure_general(tweedie_rule(g, sigma), s).
RiskEstimate sure_bayes(const MixingDistribution& g, const Sample& s);

/// Monte Carlo risk E (1/n) sum_i (delta(Y_i) - theta_i)^2 over
/// Y ~ N(theta, sigma^2 I). Replication r draws from an engine seeded with
/// derive_seed(seed, r), so the value is independent of `workers`.
RiskEstimate mc_risk(const DecisionRule& rule, std::span<const double> theta, double sigma,
                     int reps, std::uint64_t seed, unsigned workers = 1);

}  // namespace ebcd
