#include "ebcd/compound.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "ebcd/error.hpp"
#include "ebcd/random.hpp"

namespace ebcd {

namespace {

constexpr std::int64_t kImportanceBatch = 1024;
constexpr std::int64_t kLocalSwapWindow = 10;
constexpr double kMinEffectiveSamples = 10.0;

// theta sorted ascending and Y sorted by rank; `order[r]` is the original
// index of the r-th smallest observation.
struct Canonical {
  std::vector<double> theta;
  std::vector<double> y;
  std::vector<std::size_t> order;
  double sigma;

  Canonical(const ParameterVector& p, const Sample& s)
      : theta(p.theta().begin(), p.theta().end()), order(s.size()), sigma(s.sigma()) {
    if (p.size() != s.size()) {
      throw ValidationError("compound: theta has " + std::to_string(p.size()) +
                            " entries but the sample has " + std::to_string(s.size()));
    }
    std::sort(theta.begin(), theta.end());
    std::iota(order.begin(), order.end(), std::size_t{0});
    const auto ys = s.y();
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return ys[a] < ys[b]; });
    y.reserve(order.size());
    for (std::size_t i : order) y.push_back(ys[i]);
  }

  std::size_t size() const { return theta.size(); }
  bool constant() const { return theta.front() == theta.back(); }

  double log_kernel(std::size_t k, std::size_t j) const {
    const double d = (y[k] - theta[j]) / sigma;
    return -0.5 * d * d;
  }

  // Maps estimates in rank order back to the caller's observation order,
  // clamped to the convex hull of theta.
  std::vector<double> restore(const std::vector<double>& ranked) const {
    std::vector<double> out(ranked.size());
    for (std::size_t r = 0; r < ranked.size(); ++r) {
      out[order[r]] = std::clamp(ranked[r], theta.front(), theta.back());
    }
    return out;
  }
};

// Accumulates sum_b w_b theta_{pi_b(k)} with w_b = exp(lw_b - max lw), rescaling
// when a new maximum appears. The first maximum wins ties.
class WeightedPermutationSum {
 public:
  explicit WeightedPermutationSum(std::size_t n) : acc_(n, 0.0) {}

  void add(double log_weight, std::span<const std::size_t> perm, std::span<const double> theta) {
    if (log_weight > peak_) {
      const double scale = std::exp(peak_ - log_weight);
      for (double& a : acc_) a *= scale;
      total_ *= scale;
      peak_ = log_weight;
    }
    const double w = std::exp(log_weight - peak_);
    total_ += w;
    for (std::size_t k = 0; k < perm.size(); ++k) acc_[k] += w * theta[perm[k]];
  }

  std::vector<double> estimates() const {
    std::vector<double> out(acc_.size());
    for (std::size_t k = 0; k < acc_.size(); ++k) out[k] = acc_[k] / total_;
    return out;
  }

  // sum w / max w after normalization by the running maximum.
  double effective_samples() const { return total_; }

 private:
  std::vector<double> acc_;
  double total_ = 0.0;
  double peak_ = -std::numeric_limits<double>::infinity();
};

PermEstimate importance_sampler(const Canonical& c, const PermMCConfig& cfg) {
  const std::size_t n = c.size();
  WeightedPermutationSum sum(n);
  std::vector<std::size_t> perm(n);
  const std::int64_t batches = (cfg.num_perms + kImportanceBatch - 1) / kImportanceBatch;
  for (std::int64_t b = 0; b < batches; ++b) {
    Engine rng = make_engine(derive_seed(cfg.seed, static_cast<std::uint64_t>(b)));
    std::iota(perm.begin(), perm.end(), std::size_t{0});
    const std::int64_t count = std::min(kImportanceBatch, cfg.num_perms - b * kImportanceBatch);
    for (std::int64_t t = 0; t < count; ++t) {
      std::shuffle(perm.begin(), perm.end(), rng);
      double lw = 0.0;
      for (std::size_t k = 0; k < n; ++k) lw += c.log_kernel(k, perm[k]);
      sum.add(lw, perm, c.theta);
    }
  }
  const double ess = sum.effective_samples();
  return {c.restore(sum.estimates()), ess, ess < kMinEffectiveSamples};
}

// Symmetric proposals: half the time a uniformly chosen pair of positions,
// otherwise positions r and r + k in rank order with k uniform on
// 1..window (a null move if r + k falls off the end). The log-likelihood
// change of swapping the means at positions a and b is
//   (y_a - y_b)(theta_b - theta_a) / sigma^2.
// Averages use the expected post-step value under the acceptance
// probability (waste recycling) rather than the realized state alone.
PermEstimate metropolis_sampler(const Canonical& c, const PermMCConfig& cfg) {
  const std::size_t n = c.size();
  const std::int64_t steps = cfg.num_perms;
  const std::int64_t burn = steps / 10;
  const double inv_var = 1.0 / (c.sigma * c.sigma);
  const auto window = static_cast<std::size_t>(
      std::min<std::int64_t>(kLocalSwapWindow, static_cast<std::int64_t>(n) - 1));

  Engine rng = make_engine(cfg.seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::uniform_int_distribution<std::size_t> any_pos(0, n - 1);
  std::uniform_int_distribution<std::size_t> other_pos(0, n - 2);
  std::uniform_int_distribution<std::size_t> local_pos(0, n - 2);
  std::uniform_int_distribution<std::size_t> offset(1, window);

  // Rank-matched start: pairing sorted Y with sorted theta maximizes the likelihood.
  std::vector<std::size_t> perm(n);
  std::iota(perm.begin(), perm.end(), std::size_t{0});

  std::vector<double> acc(n, 0.0);
  std::vector<std::int64_t> since(n, burn);
  std::int64_t accepted = 0;

  for (std::int64_t t = 0; t < steps; ++t) {
    std::size_t a, b;
    if (unit(rng) < 0.5) {
      a = any_pos(rng);
      b = other_pos(rng);
      if (b >= a) ++b;
    } else {
      // Pair choice does not depend on the state, so the swap stays symmetric.
      a = local_pos(rng);
      b = a + std::min(offset(rng), n - 1 - a);
    }
    const double ta = c.theta[perm[a]];
    const double tb = c.theta[perm[b]];
    const double delta = (c.y[a] - c.y[b]) * (tb - ta) * inv_var;
    const double alpha = delta >= 0.0 ? 1.0 : std::exp(delta);
    const bool accept = alpha >= 1.0 || unit(rng) < alpha;

    if (t >= burn) {
      acc[a] += ta * static_cast<double>(t - since[a]) + alpha * tb + (1.0 - alpha) * ta;
      acc[b] += tb * static_cast<double>(t - since[b]) + alpha * ta + (1.0 - alpha) * tb;
      since[a] = since[b] = t + 1;
      if (accept) ++accepted;
    }
    if (accept) std::swap(perm[a], perm[b]);
  }

  const auto counted = static_cast<double>(steps - burn);
  std::vector<double> ranked(n);
  for (std::size_t k = 0; k < n; ++k) {
    acc[k] += c.theta[perm[k]] * static_cast<double>(steps - since[k]);
    ranked[k] = acc[k] / counted;
  }
  const double effective = 1.0 + static_cast<double>(accepted);
  return {c.restore(ranked), effective, effective < kMinEffectiveSamples};
}

}  // namespace

ParameterVector::ParameterVector(std::vector<double> theta) : theta_(std::move(theta)) {
  if (theta_.empty()) throw ValidationError("theta: empty parameter vector");
  for (std::size_t i = 0; i < theta_.size(); ++i) {
    if (!std::isfinite(theta_[i])) {
      throw ValidationError("theta: entry " + std::to_string(i) + " is not finite");
    }
  }
}

std::string_view to_string(PermSampler sampler) {
  switch (sampler) {
    case PermSampler::importance:
      return "importance";
    case PermSampler::metropolis:
      return "metropolis";
  }
  return "unknown";
}

PermSampler parse_perm_sampler(std::string_view name) {
  if (name == "importance") return PermSampler::importance;
  if (name == "metropolis") return PermSampler::metropolis;
  throw ValidationError("unknown permutation sampler '" + std::string(name) +
                        "' (expected importance or metropolis)");
}

void PermMCConfig::validate() const {
  if (num_perms < 1) throw ValidationError("perm config: num_perms must be >= 1");
}

std::vector<double> simple_estimator(const ParameterVector& p, const Sample& s) {
  if (p.size() != s.size()) {
    throw ValidationError("simple estimator: theta and sample lengths differ");
  }
  const auto g = MixingDistribution::empirical(p.theta());
  std::vector<double> out;
  out.reserve(s.size());
  for (double y : s.y()) out.push_back(posterior(g, s.sigma(), y).mean);
  return out;
}

std::vector<double> perm_invariant_exact(const ParameterVector& p, const Sample& s) {
  if (p.size() > kMaxExactPermutationSize) {
    throw ValidationError("perm_invariant_exact: n = " + std::to_string(p.size()) +
                          " exceeds the enumeration limit of " +
                          std::to_string(kMaxExactPermutationSize) +
                          "; use perm_invariant_mc instead");
  }
  const Canonical c(p, s);
  const std::size_t n = c.size();
  if (c.constant()) return std::vector<double>(n, c.theta.front());

  WeightedPermutationSum sum(n);
  std::vector<std::size_t> perm(n);
  std::iota(perm.begin(), perm.end(), std::size_t{0});
  do {
    double lw = 0.0;
    for (std::size_t k = 0; k < n; ++k) lw += c.log_kernel(k, perm[k]);
    sum.add(lw, perm, c.theta);
  } while (std::next_permutation(perm.begin(), perm.end()));
  return c.restore(sum.estimates());
}

PermEstimate perm_invariant_mc(const ParameterVector& p, const Sample& s,
                               const PermMCConfig& cfg) {
  cfg.validate();
  const Canonical c(p, s);
  if (c.constant()) {
    return {std::vector<double>(c.size(), c.theta.front()),
            static_cast<double>(cfg.num_perms), false};
  }
  return cfg.sampler == PermSampler::importance ? importance_sampler(c, cfg)
                                                : metropolis_sampler(c, cfg);
}

}  // namespace ebcd
