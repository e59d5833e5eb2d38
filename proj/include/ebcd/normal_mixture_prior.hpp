#pragma once

#include <span>
#include <vector>

#include "ebcd/decision_rule.hpp"
#include "ebcd/mixture.hpp"
#include "ebcd/random.hpp"

namespace ebcd {

/// Prior on theta given as a finite mixture of normals sum_k w_k N(mu_k, s_k^2).
/// Components with s_k = 0 are point masses, so every MixingDistribution is
/// also expressible here.
class NormalMixturePrior {
 public:
  /// Weights must be nonnegative and sum to 1 within 1e-9; sds >= 0.
  NormalMixturePrior(std::vector<double> weights, std::vector<double> means,
                     std::vector<double> sds);

  static NormalMixturePrior from_discrete(const MixingDistribution& g);

  std::span<const double> weights() const { return weights_; }
  std::span<const double> means() const { return means_; }
  std::span<const double> sds() const { return sds_; }
  std::size_t size() const { return weights_.size(); }

  double sample(Engine& rng) const;

  /// Closed-form posterior of theta given Y = y under N(theta, sigma^2) noise.
  Posterior posterior(double sigma, double y) const;

 private:
  std::vector<double> weights_;
  std::vector<double> means_;
  std::vector<double> sds_;
};

/// Posterior-mean rule for a normal-mixture prior; derivative Var(theta|y)/sigma^2.
DecisionRule bayes_rule(const NormalMixturePrior& prior, double sigma);

}  // namespace ebcd
