#pragma once

#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

#include "ebcd/mixture.hpp"

namespace ebcd {

/// The fixed means theta_1..theta_n of a compound decision problem.
class ParameterVector {
 public:
  /// Throws ValidationError on an empty or non-finite vector.
  explicit ParameterVector(std::vector<double> theta);

  std::span<const double> theta() const { return theta_; }
  std::size_t size() const { return theta_.size(); }

 private:
  std::vector<double> theta_;
};

enum class PermSampler {
  // Permutations drawn uniformly, self-normalized by their full-data
  // likelihood. Exact in the limit; degenerates quickly once n! dwarfs the
  // budget.
  importance,
  // Metropolis chain on permutations with transposition proposals, started at
  // the likelihood-maximizing (rank-matched) assignment. Scales to n in the
  // hundreds.
  metropolis,
};

std::string_view to_string(PermSampler sampler);
/// Accepts "importance" or "metropolis"; throws ValidationError otherwise.
PermSampler parse_perm_sampler(std::string_view name);

struct PermMCConfig {
  /// Importance: number of sampled permutations. Metropolis: number of
  /// proposed transpositions (the first tenth is discarded as burn-in).
  std::int64_t num_perms = 100000;
  std::uint64_t seed = 0;
  PermSampler sampler = PermSampler::importance;

  void validate() const;
};

struct PermEstimate {
  std::vector<double> estimates;
  /// Importance: sum(w) / max(w). Metropolis: 1 + accepted moves after burn-in.
  double effective_samples = 0.0;
  /// Set when effective_samples < 10 (and n > 1).
  bool degenerate = false;
};

inline constexpr std::size_t kMaxExactPermutationSize = 9;

/// Separable oracle rule: Tweedie's formula with G the empirical distribution
/// of theta, applied coordinate-wise.
std::vector<double> simple_estimator(const ParameterVector& p, const Sample& s);

/// Permutation-invariant oracle rule
///   delta*_i = sum_pi theta_{pi(i)} L(pi) / sum_pi L(pi),
///   L(pi) = prod_k phi((Y_k - theta_{pi(k)}) / sigma),
/// by enumerating all n! assignments in log space. Refuses n > 9.
std::vector<double> perm_invariant_exact(const ParameterVector& p, const Sample& s);

/// Monte Carlo approximation of perm_invariant_exact. Deterministic given the
/// config. Inputs are canonicalized (theta sorted, Y processed in rank order)
/// so reordering theta leaves the output unchanged and reordering Y reorders
/// it identically.
PermEstimate perm_invariant_mc(const ParameterVector& p, const Sample& s,
                               const PermMCConfig& cfg);

}  // namespace ebcd
