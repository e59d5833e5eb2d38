#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

namespace ebcd {

inline constexpr double kLogSqrtTwoPi = 0.91893853320467274178;

/// Discrete mixing distribution G over the normal means: strictly increasing
/// atoms with weights on the probability simplex.
///
/// The same type represents a fitted NPMLE, an empirical distribution of a
/// parameter vector, or any finitely supported prior. Instances are
/// immutable once built.
class MixingDistribution {
 public:
  /// Throws ValidationError unless atoms are finite and strictly increasing,
  /// weights are nonnegative and sum to 1 within 1e-12.
  MixingDistribution(std::vector<double> atoms, std::vector<double> weights);

  static MixingDistribution point_mass(double atom);

  /// Weight 1/n on each value; duplicated values are merged by accumulating
  /// their weight.
  static MixingDistribution empirical(std::span<const double> values);

  /// Builds from arbitrary nonnegative weights on strictly increasing atoms:
  /// atoms whose weight is <= drop_below are removed and the rest rescaled
  /// to sum to 1.
  static MixingDistribution from_unnormalized(std::span<const double> atoms,
                                              std::span<const double> weights,
                                              double drop_below = 0.0);

  std::span<const double> atoms() const { return atoms_; }
  std::span<const double> weights() const { return weights_; }
  std::size_t size() const { return atoms_.size(); }

  /// Smallest c with every atom in [-c, c].
  double support_bound() const;
  double mean() const;

 private:
  std::vector<double> atoms_;
  std::vector<double> weights_;
};

/// Noisy observations Y_i ~ N(theta_i, sigma^2) with known sigma.
class Sample {
 public:
  /// Throws ValidationError unless y is nonempty and finite, sigma > 0.
  Sample(std::vector<double> y, double sigma);

  std::span<const double> y() const { return y_; }
  double sigma() const { return sigma_; }
  std::size_t size() const { return y_.size(); }

 private:
  std::vector<double> y_;
  double sigma_;
};

/// Marginal density f_G at a point together with its first two derivatives.
///
/// Stored as log f and the ratios f'/f, f''/f so that points far in the tail
/// (where f itself underflows) remain representable.
struct DensityBundle {
  double log_f;
  double score;      // f'/f
  double curvature;  // f''/f

  double f() const;
  double f1() const { return f() * score; }
  double f2() const { return f() * curvature; }
};

/// Posterior summary of theta given Y = y under prior G and N(theta, sigma^2)
/// noise.
struct Posterior {
  double mean;
  double variance;      // central second moment, >= 0
  double log_marginal;  // log f_G(y)
};

// All evaluations run the posterior weights through log-sum-exp.
Posterior posterior(const MixingDistribution& g, double sigma, double y);

DensityBundle marginal_density(const MixingDistribution& g, double y, double sigma);

/// Var(theta | Y = y); lies in [0, c^2] for support bound c.
double posterior_variance(const MixingDistribution& g, double sigma, double y);

/// sum_i log f_G(Y_i), including the Gaussian normalizing constant.
double loglik(const MixingDistribution& g, const Sample& s);

/// log of the N(0, sigma^2) density at x.
inline double log_normal_density(double x, double sigma) {
  const double z = x / sigma;
  return -0.5 * z * z - kLogSqrtTwoPi - std::log(sigma);
}

}  // namespace ebcd
