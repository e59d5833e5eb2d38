#include "ebcd/harness/experiment.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <string>

#include "ebcd/decision_rule.hpp"
#include "ebcd/error.hpp"
#include "ebcd/normal_mixture_prior.hpp"
#include "ebcd/parallel.hpp"
#include "ebcd/random.hpp"

namespace ebcd::harness {

std::string_view to_string(Estimator e) {
  switch (e) {
    case Estimator::npmle_tweedie:
      return "npmle-tweedie";
    case Estimator::oracle_bayes:
      return "oracle-bayes";
    case Estimator::simple:
      return "simple";
    case Estimator::perm_mc:
      return "perm-mc";
    case Estimator::identity:
      return "identity";
  }
  return "unknown";
}

Estimator parse_estimator(std::string_view name) {
  for (Estimator e : {Estimator::npmle_tweedie, Estimator::oracle_bayes, Estimator::simple,
                      Estimator::perm_mc, Estimator::identity}) {
    if (name == to_string(e)) return e;
  }
  throw ValidationError("estimators: unknown estimator '" + std::string(name) + "'");
}

void ExperimentConfig::validate() const {
  scenario.validate();
  if (trials < 1) throw ValidationError("trials: must be >= 1");
  if (estimators.empty()) throw ValidationError("estimators: must be nonempty");
  for (std::size_t i = 0; i < estimators.size(); ++i) {
    for (std::size_t j = 0; j < i; ++j) {
      if (estimators[i] == estimators[j]) {
        throw ValidationError("estimators: '" + std::string(to_string(estimators[i])) +
                              "' listed twice");
      }
    }
    if (estimators[i] == Estimator::oracle_bayes && scenario.kind != ScenarioKind::iid_prior) {
      throw ValidationError("estimators: oracle-bayes needs the true prior, which only the "
                            "iid-prior scenario provides");
    }
  }
  if (npmle.grid_m && *npmle.grid_m < 2) throw ValidationError("npmle.grid_m: must be >= 2");
  npmle.em.validate();
  perm.validate();
}

double compound_loss(std::span<const double> estimate, std::span<const double> theta) {
  if (estimate.size() != theta.size() || theta.empty()) {
    throw ValidationError("loss: estimate and theta lengths differ");
  }
  double acc = 0.0;
  for (std::size_t i = 0; i < theta.size(); ++i) {
    const double d = estimate[i] - theta[i];
    acc += d * d;
  }
  return acc / static_cast<double>(theta.size());
}

std::vector<double> estimate(Estimator e, const ExperimentConfig& cfg, const ScenarioDraw& draw,
                             std::uint64_t trial_seed, bool* degenerate) {
  const Sample& s = draw.sample;
  switch (e) {
    case Estimator::identity:
      return {s.y().begin(), s.y().end()};
    case Estimator::oracle_bayes:
      if (!cfg.scenario.prior) throw ValidationError("oracle-bayes: scenario has no prior");
      return bayes_rule(*cfg.scenario.prior, s.sigma()).apply(s.y());
    case Estimator::simple:
      return simple_estimator(draw.theta, s);
    case Estimator::perm_mc: {
      PermMCConfig perm = cfg.perm;
      perm.seed = derive_seed(trial_seed, 1);
      PermEstimate result = perm_invariant_mc(draw.theta, s, perm);
      if (degenerate) *degenerate = result.degenerate;
      return std::move(result.estimates);
    }
    case Estimator::npmle_tweedie: {
      const GridSpec grid = default_grid(s, cfg.npmle.grid_m);
      FitReport fit = fit_npmle(s, grid, cfg.npmle.em);
      return tweedie_rule(std::move(fit.g_hat), s.sigma()).apply(s.y());
    }
  }
  throw ValidationError("unknown estimator");
}

MeanSe mean_and_se(std::span<const double> values) {
  if (values.empty()) return {};
  double mean = 0.0;
  for (double v : values) mean += v;
  mean /= static_cast<double>(values.size());
  if (values.size() < 2) return {mean, 0.0};
  double ss = 0.0;
  for (double v : values) ss += (v - mean) * (v - mean);
  const double sd = std::sqrt(ss / static_cast<double>(values.size() - 1));
  return {mean, sd / std::sqrt(static_cast<double>(values.size()))};
}

RiskReport run_experiment(const ExperimentConfig& cfg, unsigned workers) {
  cfg.validate();
  const std::size_t E = cfg.estimators.size();
  const auto T = static_cast<std::size_t>(cfg.trials);

  std::vector<std::vector<double>> losses(E, std::vector<double>(T));
  std::vector<std::vector<double>> seconds(E, std::vector<double>(T));
  std::vector<char> degenerate(T, 0);

  parallel_for(T, workers, [&](std::size_t t) {
    const std::uint64_t trial_seed = derive_seed(cfg.seed, t);
    const ScenarioDraw draw = generate_scenario(cfg.scenario, trial_seed);
    for (std::size_t e = 0; e < E; ++e) {
      const auto start = std::chrono::steady_clock::now();
      bool flag = false;
      const auto est = estimate(cfg.estimators[e], cfg, draw, trial_seed, &flag);
      losses[e][t] = compound_loss(est, draw.theta.theta());
      seconds[e][t] =
          std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
      if (flag) degenerate[t] = 1;
    }
  });

  RiskReport report;
  report.config = cfg;
  for (std::size_t e = 0; e < E; ++e) {
    const MeanSe stats = mean_and_se(losses[e]);
    double wall = 0.0;
    for (double s : seconds[e]) wall += s;
    report.summaries.push_back({cfg.estimators[e], stats.mean, stats.standard_error, wall});
  }
  std::vector<double> diff(T);
  for (std::size_t a = 0; a < E; ++a) {
    for (std::size_t b = a + 1; b < E; ++b) {
      for (std::size_t t = 0; t < T; ++t) diff[t] = losses[a][t] - losses[b][t];
      const MeanSe stats = mean_and_se(diff);
      report.paired.push_back(
          {cfg.estimators[a], cfg.estimators[b], stats.mean, stats.standard_error});
    }
  }
  for (std::size_t t = 0; t < T; ++t) {
    if (degenerate[t]) report.degenerate_perm_trials.push_back(t);
  }
  report.losses = std::move(losses);
  return report;
}

}  // namespace ebcd::harness
