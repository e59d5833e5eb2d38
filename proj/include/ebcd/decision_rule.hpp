#pragma once

#include <functional>
#include <span>
#include <vector>

#include "ebcd/mixture.hpp"

namespace ebcd {

/// A separable estimator y -> delta(y) together with its derivative
/// delta'(y). Cheap to copy; the callables share their captured state.
class DecisionRule {
 public:
  using Fn = std::function<double(double)>;

  DecisionRule(Fn value, Fn derivative);

  static DecisionRule identity();
  static DecisionRule constant(double a);

  double operator()(double y) const { return value_(y); }
  double derivative(double y) const { return derivative_(y); }

  std::vector<double> apply(std::span<const double> y) const;

 private:
  Fn value_;
  Fn derivative_;
};

/// Bayes rule for prior g under N(theta, sigma^2) noise (Tweedie's formula):
///   delta(y)  = y + sigma^2 f_g'(y) / f_g(y) = E[theta | y]
///   delta'(y) = Var(theta | y) / sigma^2
/// Both come from posterior moments, not from numerical differentiation.
DecisionRule tweedie_rule(MixingDistribution g, double sigma);

}  // namespace ebcd
