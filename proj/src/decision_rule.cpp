#include "ebcd/decision_rule.hpp"

#include <memory>

#include "ebcd/error.hpp"

namespace ebcd {

DecisionRule::DecisionRule(Fn value, Fn derivative)
    : value_(std::move(value)), derivative_(std::move(derivative)) {
  if (!value_ || !derivative_) throw ValidationError("decision rule: missing callable");
}

DecisionRule DecisionRule::identity() {
  return DecisionRule([](double y) { return y; }, [](double) { return 1.0; });
}

DecisionRule DecisionRule::constant(double a) {
  return DecisionRule([a](double) { return a; }, [](double) { return 0.0; });
}

std::vector<double> DecisionRule::apply(std::span<const double> y) const {
  std::vector<double> out;
  out.reserve(y.size());
  for (double v : y) out.push_back(value_(v));
  return out;
}

DecisionRule tweedie_rule(MixingDistribution g, double sigma) {
  if (!(sigma > 0.0)) throw ValidationError("tweedie rule: sigma must be positive");
  auto prior = std::make_shared<const MixingDistribution>(std::move(g));
  const double var = sigma * sigma;
  return DecisionRule([prior, sigma](double y) { return posterior(*prior, sigma, y).mean; },
                      [prior, sigma, var](double y) {
                        return posterior(*prior, sigma, y).variance / var;
                      });
}

}  // namespace ebcd
