#pragma once

#include <cstdint>
#include <optional>
#include <string_view>
#include <vector>

#include "ebcd/compound.hpp"
#include "ebcd/harness/scenario.hpp"
#include "ebcd/npmle.hpp"

namespace ebcd::harness {

enum class Estimator {
  npmle_tweedie,  // Tweedie rule of the NPMLE fitted to Y alone
  oracle_bayes,   // Bayes rule of the true prior (iid-prior scenarios)
  simple,         // Tweedie rule of the empirical distribution of the true theta
  perm_mc,        // permutation-invariant oracle, Monte Carlo
  identity,       // theta_hat = Y
};

std::string_view to_string(Estimator e);
Estimator parse_estimator(std::string_view name);

struct NpmleSettings {
  std::optional<int> grid_m;  // default_grid_size(n) when absent
  EMConfig em;
};

struct ExperimentConfig {
  ScenarioSpec scenario;
  std::vector<Estimator> estimators;
  int trials = 1;
  std::uint64_t seed = 0;
  NpmleSettings npmle;
  /// perm.seed is ignored: each trial derives its own.
  PermMCConfig perm{100000, 0, PermSampler::metropolis};
  bool keep_losses = false;  // echo per-trial losses in the JSON report

  void validate() const;
};

struct EstimatorSummary {
  Estimator estimator;
  double mean_loss = 0.0;
  double standard_error = 0.0;  // sample SD / sqrt(trials)
  double wall_seconds = 0.0;    // summed over trials; only meaningful with timing on
};

/// Mean and standard error of loss(a) - loss(b) over the same trials.
struct PairedDifference {
  Estimator a;
  Estimator b;
  double mean = 0.0;
  double standard_error = 0.0;
};

struct RiskReport {
  ExperimentConfig config;
  std::vector<EstimatorSummary> summaries;  // in config.estimators order
  std::vector<PairedDifference> paired;     // every ordered pair i < j
  std::vector<std::vector<double>> losses;  // [estimator][trial]
  std::vector<std::size_t> degenerate_perm_trials;
};

/// Seed of trial t: derive_seed(cfg.seed, t). Within a trial the permutation
/// sampler uses derive_seed(trial_seed, 1). Trials run on up to `workers`
/// threads; the report does not depend on the worker count.
RiskReport run_experiment(const ExperimentConfig& cfg, unsigned workers = 1);

/// Loss (1/n) sum_i (estimate_i - theta_i)^2.
double compound_loss(std::span<const double> estimate, std::span<const double> theta);

/// Estimates of one estimator on one draw (exposed for tests and tools).
std::vector<double> estimate(Estimator e, const ExperimentConfig& cfg, const ScenarioDraw& draw,
                             std::uint64_t trial_seed, bool* degenerate = nullptr);

struct MeanSe {
  double mean = 0.0;
  double standard_error = 0.0;
};
MeanSe mean_and_se(std::span<const double> values);

}  // namespace ebcd::harness
