#include "ebcd/normal_mixture_prior.hpp"

#include <cmath>
#include <limits>
#include <memory>
#include <string>

#include "ebcd/error.hpp"

namespace ebcd {

NormalMixturePrior::NormalMixturePrior(std::vector<double> weights, std::vector<double> means,
                                       std::vector<double> sds)
    : weights_(std::move(weights)), means_(std::move(means)), sds_(std::move(sds)) {
  if (weights_.empty()) throw ValidationError("prior: no components");
  if (means_.size() != weights_.size() || sds_.size() != weights_.size()) {
    throw ValidationError("prior: weights, means and sds must have equal length");
  }
  double total = 0.0;
  for (std::size_t k = 0; k < weights_.size(); ++k) {
    if (!(weights_[k] >= 0.0) || !std::isfinite(weights_[k])) {
      throw ValidationError("prior: weights[" + std::to_string(k) + "] must be nonnegative");
    }
    if (!std::isfinite(means_[k])) {
      throw ValidationError("prior: means[" + std::to_string(k) + "] is not finite");
    }
    if (!(sds_[k] >= 0.0) || !std::isfinite(sds_[k])) {
      throw ValidationError("prior: sds[" + std::to_string(k) + "] must be nonnegative");
    }
    total += weights_[k];
  }
  if (std::abs(total - 1.0) > 1e-9) {
    throw ValidationError("prior: weights sum to " + std::to_string(total) + ", expected 1");
  }
}

NormalMixturePrior NormalMixturePrior::from_discrete(const MixingDistribution& g) {
  return NormalMixturePrior(std::vector<double>(g.weights().begin(), g.weights().end()),
                            std::vector<double>(g.atoms().begin(), g.atoms().end()),
                            std::vector<double>(g.size(), 0.0));
}

double NormalMixturePrior::sample(Engine& rng) const {
  std::discrete_distribution<std::size_t> pick(weights_.begin(), weights_.end());
  const std::size_t k = pick(rng);
  return means_[k] + sds_[k] * standard_normal(rng);
}

Posterior NormalMixturePrior::posterior(double sigma, double y) const {
  const double noise_var = sigma * sigma;
  const std::size_t K = weights_.size();
  // Per component: Y ~ N(mu, s^2 + sigma^2); theta | y ~ N(mu + s^2/(s^2+sigma^2)(y-mu), s^2 sigma^2/(s^2+sigma^2)).
  std::vector<double> log_r(K), cmean(K), cvar(K);
  double peak = -std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < K; ++k) {
    const double s2 = sds_[k] * sds_[k];
    const double total_var = s2 + noise_var;
    const double d = y - means_[k];
    const double shrink = s2 / total_var;
    cmean[k] = means_[k] + shrink * d;
    cvar[k] = s2 * noise_var / total_var;
    log_r[k] = weights_[k] > 0.0
                   ? std::log(weights_[k]) - 0.5 * d * d / total_var - 0.5 * std::log(total_var)
                   : -std::numeric_limits<double>::infinity();
    peak = std::max(peak, log_r[k]);
  }
  double total = 0.0, mean = 0.0;
  for (std::size_t k = 0; k < K; ++k) {
    log_r[k] = std::exp(log_r[k] - peak);
    total += log_r[k];
    mean += log_r[k] * cmean[k];
  }
  mean /= total;
  double var = 0.0;
  for (std::size_t k = 0; k < K; ++k) {
    const double c = cmean[k] - mean;
    var += log_r[k] * (cvar[k] + c * c);
  }
  return {mean, var / total, peak + std::log(total) - kLogSqrtTwoPi};
}

DecisionRule bayes_rule(const NormalMixturePrior& prior, double sigma) {
  if (!(sigma > 0.0)) throw ValidationError("bayes rule: sigma must be positive");
  auto shared = std::make_shared<const NormalMixturePrior>(prior);
  const double var = sigma * sigma;
  return DecisionRule([shared, sigma](double y) { return shared->posterior(sigma, y).mean; },
                      [shared, sigma, var](double y) {
                        return shared->posterior(sigma, y).variance / var;
                      });
}

}  // namespace ebcd
