#include "ebcd/harness/rate.hpp"

#include <cmath>
#include <string>

#include "ebcd/error.hpp"
#include "ebcd/parallel.hpp"
#include "ebcd/quadrature.hpp"
#include "ebcd/random.hpp"

namespace ebcd::harness {

void RateConfig::validate() const {
  if (!(sigma > 0.0)) throw ValidationError("sigma: must be positive");
  if (n_grid.empty()) throw ValidationError("n_grid: must be nonempty");
  for (std::size_t i = 0; i < n_grid.size(); ++i) {
    if (n_grid[i] < 2) throw ValidationError("n_grid: entries must be >= 2");
    if (i > 0 && n_grid[i] <= n_grid[i - 1]) {
      throw ValidationError("n_grid: must be strictly increasing (index " + std::to_string(i) +
                            ")");
    }
  }
  if (trials < 1) throw ValidationError("trials: must be >= 1");
  if (npmle.grid_m && *npmle.grid_m < 2) throw ValidationError("npmle.grid_m: must be >= 2");
  npmle.em.validate();
}

std::vector<RateRow> rate_check(const RateConfig& cfg, unsigned workers) {
  cfg.validate();
  const double risk0 = bayes_risk(cfg.prior, cfg.sigma);
  const DecisionRule oracle = bayes_rule(cfg.prior, cfg.sigma);

  ExperimentConfig shape;
  shape.scenario.kind = ScenarioKind::iid_prior;
  shape.scenario.prior = cfg.prior;
  shape.scenario.sigma = cfg.sigma;
  shape.npmle = cfg.npmle;

  std::vector<RateRow> rows;
  for (int n : cfg.n_grid) {
    ExperimentConfig exp = shape;
    exp.scenario.n = n;
    const auto T = static_cast<std::size_t>(cfg.trials);
    std::vector<double> regret(T), paired(T);
    const std::uint64_t n_seed = derive_seed(cfg.seed, static_cast<std::uint64_t>(n));

    parallel_for(T, workers, [&](std::size_t t) {
      const std::uint64_t trial_seed = derive_seed(n_seed, t);
      const ScenarioDraw draw = generate_scenario(exp.scenario, trial_seed);
      const Sample& s = draw.sample;
      FitReport fit = fit_npmle(s, default_grid(s, cfg.npmle.grid_m), cfg.npmle.em);
      const DecisionRule fitted = tweedie_rule(std::move(fit.g_hat), cfg.sigma);
      regret[t] = integrated_regret(cfg.prior, cfg.sigma, fitted);
      paired[t] = compound_loss(fitted.apply(s.y()), draw.theta.theta()) -
                  compound_loss(oracle.apply(s.y()), draw.theta.theta());
    });

    const MeanSe r = mean_and_se(regret);
    const MeanSe p = mean_and_se(paired);
    const double scale = static_cast<double>(n) / std::log(static_cast<double>(n));
    rows.push_back({n, cfg.trials, risk0, r.mean, r.standard_error, r.mean * scale,
                    r.standard_error * scale, p.mean, p.standard_error});
  }
  return rows;
}

}  // namespace ebcd::harness
