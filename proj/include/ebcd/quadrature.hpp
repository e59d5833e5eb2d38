#pragma once

#include <functional>

#include "ebcd/decision_rule.hpp"
#include "ebcd/normal_mixture_prior.hpp"

namespace ebcd {

// Trapezoid rule in standardized coordinates z = (y - mu_k) / sd_k on
// [-half_width, half_width], one pass per mixture component. For smooth
// integrands against Gaussian weight this converges geometrically in the
// step size; the defaults give relative error far below 1e-6 for the risks
// computed here.
struct QuadratureOptions {
  double half_width = 12.0;
  int nodes_per_unit = 64;
};

/// E[h(Y)] where Y ~ sum_k w_k N(mu_k, s_k^2 + sigma^2), the marginal of the
/// prior observed through N(0, sigma^2) noise.
double expect_marginal(const NormalMixturePrior& prior, double sigma,
                       const std::function<double(double)>& h, QuadratureOptions opts = {});

/// Bayes risk of the posterior mean: E Var(theta | Y).
double bayes_risk(const NormalMixturePrior& prior, double sigma, QuadratureOptions opts = {});

/// E (rule(Y) - theta)^2 with theta drawn from the prior.
double integrated_risk(const NormalMixturePrior& prior, double sigma, const DecisionRule& rule,
                       QuadratureOptions opts = {});

/// Excess risk over the Bayes rule: E (rule(Y) - E[theta | Y])^2.
double integrated_regret(const NormalMixturePrior& prior, double sigma, const DecisionRule& rule,
                         QuadratureOptions opts = {});

}  // namespace ebcd
