#include "ebcd/quadrature.hpp"

#include <cmath>

#include "ebcd/error.hpp"

namespace ebcd {

double expect_marginal(const NormalMixturePrior& prior, double sigma,
                       const std::function<double(double)>& h, QuadratureOptions opts) {
  if (!(sigma > 0.0)) throw ValidationError("quadrature: sigma must be positive");
  if (!(opts.half_width > 0.0) || opts.nodes_per_unit < 1) {
    throw ValidationError("quadrature: invalid options");
  }
  const double step = 1.0 / opts.nodes_per_unit;
  const long half = std::lround(opts.half_width * opts.nodes_per_unit);
  double total = 0.0;
  for (std::size_t k = 0; k < prior.size(); ++k) {
    const double w = prior.weights()[k];
    if (w == 0.0) continue;
    const double sd = std::sqrt(prior.sds()[k] * prior.sds()[k] + sigma * sigma);
    const double mu = prior.means()[k];
    double acc = 0.0;
    for (long i = -half; i <= half; ++i) {
      const double z = static_cast<double>(i) * step;
      const double node = (i == -half || i == half) ? 0.5 : 1.0;
      acc += node * std::exp(-0.5 * z * z - kLogSqrtTwoPi) * h(mu + sd * z);
    }
    total += w * acc * step;
  }
  return total;
}

double bayes_risk(const NormalMixturePrior& prior, double sigma, QuadratureOptions opts) {
  return expect_marginal(
      prior, sigma, [&](double y) { return prior.posterior(sigma, y).variance; }, opts);
}

double integrated_risk(const NormalMixturePrior& prior, double sigma, const DecisionRule& rule,
                       QuadratureOptions opts) {
  return expect_marginal(
      prior, sigma,
      [&](double y) {
        const Posterior post = prior.posterior(sigma, y);
        const double d = rule(y) - post.mean;
        return d * d + post.variance;
      },
      opts);
}

double integrated_regret(const NormalMixturePrior& prior, double sigma, const DecisionRule& rule,
                         QuadratureOptions opts) {
  return expect_marginal(
      prior, sigma,
      [&](double y) {
        const double d = rule(y) - prior.posterior(sigma, y).mean;
        return d * d;
      },
      opts);
}

}  // namespace ebcd
