#pragma once

#include <cstdint>
#include <vector>

#include "ebcd/harness/experiment.hpp"
#include "ebcd/normal_mixture_prior.hpp"

namespace ebcd::harness {

struct RateConfig {
  explicit RateConfig(NormalMixturePrior p) : prior(std::move(p)) {}

  NormalMixturePrior prior;
  double sigma = 1.0;
  std::vector<int> n_grid;  // strictly increasing
  int trials = 200;
  std::uint64_t seed = 0;
  NpmleSettings npmle;

  void validate() const;
};

// Regret of the NPMLE-driven Tweedie rule over the true-prior Bayes rule.
//   regret: mean over trials of E_{G0}(delta_Ghat(Y) - delta_G0(Y))^2, the
//           excess risk of each fitted rule, integrated by quadrature.
//   paired_regret: mean over the same trials of the realized loss difference
//           loss(delta_Ghat) - loss(delta_G0) on that trial's theta.
//   normalized = regret * n / log n.
struct RateRow {
  int n = 0;
  int trials = 0;
  double bayes_risk = 0.0;
  double regret = 0.0;
  double regret_se = 0.0;
  double normalized = 0.0;
  double normalized_se = 0.0;
  double paired_regret = 0.0;
  double paired_regret_se = 0.0;
};

/// Trial t at sample size n uses seed derive_seed(derive_seed(seed, n), t).
std::vector<RateRow> rate_check(const RateConfig& cfg, unsigned workers = 1);

}  // namespace ebcd::harness
