#pragma once

#include <cstdint>
#include <vector>

#include "ebcd/compound.hpp"
#include "ebcd/normal_mixture_prior.hpp"

namespace ebcd::harness {

/// Per-sample losses of the simple and permutation-invariant oracle rules.
struct LossPair {
  double simple = 0.0;
  double perm = 0.0;
};

/// Efficiency of the permutation-invariant rule relative to the simple rule
/// at one sample size. Both common definitions are reported:
///   ratio_of_means = mean(loss_simple) / mean(loss_perm)   (delta-method SE)
///   mean_of_ratios = mean(loss_simple / loss_perm)
/// Values above 1 favour the permutation-invariant rule.
struct EfficiencyRow {
  int n = 0;
  int trials = 0;
  double mean_loss_simple = 0.0;
  double mean_loss_perm = 0.0;
  double ratio_of_means = 0.0;
  double ratio_of_means_se = 0.0;
  double mean_of_ratios = 0.0;
  double mean_of_ratios_se = 0.0;
  double paired_diff = 0.0;  // mean(loss_simple - loss_perm)
  double paired_diff_se = 0.0;
};

struct Figure1Config {
  NormalMixturePrior prior;
  double sigma = 1.0;
  int scatter_n = 100;
  int scatter_samples = 1000;
  std::vector<int> curve_n{10, 20, 30, 50, 100, 200, 300};
  int curve_trials = 1000;
  PermMCConfig perm{1000000, 0, PermSampler::metropolis};
  std::uint64_t seed = 0;
};

Figure1Config default_figure1_config();

/// Losses of both rules on `samples` iid-prior draws of size n.
std::vector<LossPair> loss_pairs(const NormalMixturePrior& prior, double sigma, int n,
                                 int samples, const PermMCConfig& perm, std::uint64_t seed,
                                 unsigned workers = 1);

EfficiencyRow summarize_efficiency(int n, const std::vector<LossPair>& pairs);

/// One EfficiencyRow per entry of n_grid; size n uses seed derive_seed(seed, n).
std::vector<EfficiencyRow> efficiency_curve(const NormalMixturePrior& prior, double sigma,
                                            const std::vector<int>& n_grid, int trials,
                                            const PermMCConfig& perm, std::uint64_t seed,
                                            unsigned workers = 1);

}  // namespace ebcd::harness
