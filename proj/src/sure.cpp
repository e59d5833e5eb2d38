#include "ebcd/sure.hpp"

#include <cmath>
#include <vector>

#include "ebcd/error.hpp"
#include "ebcd/parallel.hpp"
#include "ebcd/random.hpp"

namespace ebcd {

RiskEstimate sure_general(const DecisionRule& rule, const Sample& s) {
  const double var = s.sigma() * s.sigma();
  double acc = 0.0;
  for (double y : s.y()) {
    const double shift = rule(y) - y;
    acc += shift * shift + 2.0 * var * (rule.derivative(y) - 1.0);
  }
  return {acc / static_cast<double>(s.size()) + var, s.size(), 0.0};
}

RiskEstimate sure_bayes(const MixingDistribution& g, const Sample& s) {
  const double var = s.sigma() * s.sigma();
  double acc = 0.0;
  for (double y : s.y()) {
    const DensityBundle d = marginal_density(g, y, s.sigma());
    acc += 2.0 * d.curvature - d.score * d.score;
  }
  return {var * var * acc / static_cast<double>(s.size()) + var, s.size(), 0.0};
}

RiskEstimate mc_risk(const DecisionRule& rule, std::span<const double> theta, double sigma,
                     int reps, std::uint64_t seed, unsigned workers) {
  if (reps < 2) throw ValidationError("mc_risk: reps must be at least 2");
  if (theta.empty()) throw ValidationError("mc_risk: theta is empty");
  if (!(sigma > 0.0)) throw ValidationError("mc_risk: sigma must be positive");

  std::vector<double> losses(static_cast<std::size_t>(reps));
  parallel_for(losses.size(), workers, [&](std::size_t r) {
    Engine rng = make_engine(derive_seed(seed, r));
    double acc = 0.0;
    for (double t : theta) {
      const double y = t + sigma * standard_normal(rng);
      const double d = rule(y) - t;
      acc += d * d;
    }
    losses[r] = acc / static_cast<double>(theta.size());
  });

  double mean = 0.0;
  for (double l : losses) mean += l;
  mean /= static_cast<double>(reps);
  double ss = 0.0;
  for (double l : losses) ss += (l - mean) * (l - mean);
  const double sd = std::sqrt(ss / static_cast<double>(reps - 1));
  return {mean, theta.size(), sd / std::sqrt(static_cast<double>(reps))};
}

}  // namespace ebcd
