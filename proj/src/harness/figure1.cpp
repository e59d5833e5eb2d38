#include "ebcd/harness/figure1.hpp"

#include <cmath>

#include "ebcd/error.hpp"
#include "ebcd/harness/experiment.hpp"
#include "ebcd/harness/scenario.hpp"
#include "ebcd/random.hpp"

namespace ebcd::harness {

Figure1Config default_figure1_config() { return Figure1Config{figure1_prior()}; }

std::vector<LossPair> loss_pairs(const NormalMixturePrior& prior, double sigma, int n,
                                 int samples, const PermMCConfig& perm, std::uint64_t seed,
                                 unsigned workers) {
  ExperimentConfig cfg;
  cfg.scenario.kind = ScenarioKind::iid_prior;
  cfg.scenario.prior = prior;
  cfg.scenario.n = n;
  cfg.scenario.sigma = sigma;
  cfg.estimators = {Estimator::simple, Estimator::perm_mc};
  cfg.trials = samples;
  cfg.seed = seed;
  cfg.perm = perm;
  const RiskReport report = run_experiment(cfg, workers);
  std::vector<LossPair> out(static_cast<std::size_t>(samples));
  for (std::size_t t = 0; t < out.size(); ++t) out[t] = {report.losses[0][t], report.losses[1][t]};
  return out;
}

EfficiencyRow summarize_efficiency(int n, const std::vector<LossPair>& pairs) {
  if (pairs.empty()) throw ValidationError("efficiency: no trials");
  const auto T = static_cast<double>(pairs.size());
  std::vector<double> a, b, ratio, diff;
  for (const auto& p : pairs) {
    a.push_back(p.simple);
    b.push_back(p.perm);
    ratio.push_back(p.simple / p.perm);
    diff.push_back(p.simple - p.perm);
  }
  const MeanSe ma = mean_and_se(a), mb = mean_and_se(b), mr = mean_and_se(ratio),
               md = mean_and_se(diff);
  const double r = ma.mean / mb.mean;
  // Delta method for a ratio of paired means.
  double var_a = 0.0, var_b = 0.0, cov = 0.0;
  for (std::size_t t = 0; t < pairs.size(); ++t) {
    var_a += (a[t] - ma.mean) * (a[t] - ma.mean);
    var_b += (b[t] - mb.mean) * (b[t] - mb.mean);
    cov += (a[t] - ma.mean) * (b[t] - mb.mean);
  }
  double r_se = 0.0;
  if (pairs.size() > 1) {
    var_a /= T - 1;
    var_b /= T - 1;
    cov /= T - 1;
    const double v = (var_a - 2.0 * r * cov + r * r * var_b) / (mb.mean * mb.mean * T);
    r_se = std::sqrt(std::max(v, 0.0));
  }
  return {n,       static_cast<int>(pairs.size()), ma.mean,         mb.mean, r, r_se,
          mr.mean, mr.standard_error,              md.mean, md.standard_error};
}

std::vector<EfficiencyRow> efficiency_curve(const NormalMixturePrior& prior, double sigma,
                                            const std::vector<int>& n_grid, int trials,
                                            const PermMCConfig& perm, std::uint64_t seed,
                                            unsigned workers) {
  std::vector<EfficiencyRow> rows;
  for (int n : n_grid) {
    const auto pairs = loss_pairs(prior, sigma, n, trials, perm,
                                  derive_seed(seed, static_cast<std::uint64_t>(n)), workers);
    rows.push_back(summarize_efficiency(n, pairs));
  }
  return rows;
}

}  // namespace ebcd::harness
