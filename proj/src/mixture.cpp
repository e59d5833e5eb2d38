#include "ebcd/mixture.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>
#include <string>

#include "ebcd/error.hpp"

namespace ebcd {

namespace {

constexpr double kSimplexTolerance = 1e-12;

void check_mixing(const std::vector<double>& atoms, const std::vector<double>& weights) {
  if (atoms.empty()) throw ValidationError("mixing distribution: no atoms");
  if (atoms.size() != weights.size()) {
    throw ValidationError("mixing distribution: " + std::to_string(atoms.size()) + " atoms but " +
                          std::to_string(weights.size()) + " weights");
  }
  double total = 0.0;
  for (std::size_t j = 0; j < atoms.size(); ++j) {
    if (!std::isfinite(atoms[j])) {
      throw ValidationError("mixing distribution: atom " + std::to_string(j) + " is not finite");
    }
    if (j > 0 && !(atoms[j] > atoms[j - 1])) {
      throw ValidationError("mixing distribution: atoms must be strictly increasing (index " +
                            std::to_string(j) + ")");
    }
    if (!(weights[j] >= 0.0) || !std::isfinite(weights[j])) {
      throw ValidationError("mixing distribution: weight " + std::to_string(j) +
                            " must be finite and nonnegative");
    }
    total += weights[j];
  }
  if (std::abs(total - 1.0) > kSimplexTolerance) {
    throw ValidationError("mixing distribution: weights sum to " + std::to_string(total) +
                          ", expected 1");
  }
}

}  // namespace

MixingDistribution::MixingDistribution(std::vector<double> atoms, std::vector<double> weights)
    : atoms_(std::move(atoms)), weights_(std::move(weights)) {
  check_mixing(atoms_, weights_);
}

MixingDistribution MixingDistribution::point_mass(double atom) {
  return MixingDistribution({atom}, {1.0});
}

MixingDistribution MixingDistribution::empirical(std::span<const double> values) {
  if (values.empty()) throw ValidationError("empirical distribution: no values");
  std::map<double, std::size_t> counts;
  for (double v : values) {
    if (!std::isfinite(v)) throw ValidationError("empirical distribution: value is not finite");
    ++counts[v];
  }
  const double n = static_cast<double>(values.size());
  std::vector<double> atoms, weights;
  atoms.reserve(counts.size());
  weights.reserve(counts.size());
  for (const auto& [value, count] : counts) {
    atoms.push_back(value);
    weights.push_back(static_cast<double>(count) / n);
  }
  return from_unnormalized(atoms, weights);
}

MixingDistribution MixingDistribution::from_unnormalized(std::span<const double> atoms,
                                                         std::span<const double> weights,
                                                         double drop_below) {
  if (atoms.size() != weights.size()) {
    throw ValidationError("mixing distribution: atom/weight length mismatch");
  }
  std::vector<double> kept_atoms, kept_weights;
  double total = 0.0;
  for (std::size_t j = 0; j < atoms.size(); ++j) {
    if (!(weights[j] >= 0.0)) throw ValidationError("mixing distribution: negative weight");
    if (weights[j] > drop_below) {
      kept_atoms.push_back(atoms[j]);
      kept_weights.push_back(weights[j]);
      total += weights[j];
    }
  }
  if (kept_atoms.empty() || !(total > 0.0)) {
    throw ValidationError("mixing distribution: no atom carries positive weight");
  }
  for (double& w : kept_weights) w /= total;
  return MixingDistribution(std::move(kept_atoms), std::move(kept_weights));
}

double MixingDistribution::support_bound() const {
  return std::max(std::abs(atoms_.front()), std::abs(atoms_.back()));
}

double MixingDistribution::mean() const {
  return std::inner_product(atoms_.begin(), atoms_.end(), weights_.begin(), 0.0);
}

Sample::Sample(std::vector<double> y, double sigma) : y_(std::move(y)), sigma_(sigma) {
  if (!(sigma_ > 0.0) || !std::isfinite(sigma_)) {
    throw ValidationError("sample: sigma must be positive and finite");
  }
  if (y_.empty()) throw ValidationError("sample: no observations");
  for (std::size_t i = 0; i < y_.size(); ++i) {
    if (!std::isfinite(y_[i])) {
      throw ValidationError("sample: observation " + std::to_string(i) + " is not finite");
    }
  }
}

double DensityBundle::f() const { return std::exp(log_f); }

Posterior posterior(const MixingDistribution& g, double sigma, double y) {
  if (!(sigma > 0.0)) throw ValidationError("sigma must be positive");
  const auto atoms = g.atoms();
  const auto weights = g.weights();
  const double inv_two_var = 0.5 / (sigma * sigma);

  double peak = -std::numeric_limits<double>::infinity();
  for (std::size_t j = 0; j < atoms.size(); ++j) {
    if (weights[j] <= 0.0) continue;
    const double d = y - atoms[j];
    peak = std::max(peak, std::log(weights[j]) - d * d * inv_two_var);
  }

  double total = 0.0, first = 0.0;
  for (std::size_t j = 0; j < atoms.size(); ++j) {
    if (weights[j] <= 0.0) continue;
    const double d = y - atoms[j];
    const double p = std::exp(std::log(weights[j]) - d * d * inv_two_var - peak);
    total += p;
    first += p * atoms[j];
  }
  double mean = first / total;
  mean = std::clamp(mean, atoms.front(), atoms.back());

  double second = 0.0;
  for (std::size_t j = 0; j < atoms.size(); ++j) {
    if (weights[j] <= 0.0) continue;
    const double d = y - atoms[j];
    const double p = std::exp(std::log(weights[j]) - d * d * inv_two_var - peak);
    const double c = atoms[j] - mean;
    second += p * c * c;
  }

  return {mean, second / total, peak + std::log(total) - kLogSqrtTwoPi - std::log(sigma)};
}

DensityBundle marginal_density(const MixingDistribution& g, double y, double sigma) {
  const Posterior post = posterior(g, sigma, y);
  const double var = sigma * sigma;
  const double r = y - post.mean;
  return {post.log_marginal, -r / var, (r * r + post.variance) / (var * var) - 1.0 / var};
}

double posterior_variance(const MixingDistribution& g, double sigma, double y) {
  return posterior(g, sigma, y).variance;
}

double loglik(const MixingDistribution& g, const Sample& s) {
  double total = 0.0;
  for (double y : s.y()) total += posterior(g, s.sigma(), y).log_marginal;
  return total;
}

}  // namespace ebcd
