#pragma once

#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"

#include "ebcd/harness/experiment.hpp"
#include "ebcd/harness/figure1.hpp"
#include "ebcd/harness/rate.hpp"
#include "ebcd/npmle.hpp"

namespace ebcd::harness {

using Json = nlohmann::json;

/// Shortest decimal string that reads back to the same double; '.' decimal
/// point regardless of locale.
std::string format_double(double x);

// ---- CSV ------------------------------------------------------------------
// Comma separated, header row, UTF-8 (a leading BOM is skipped), '\n' or
// "\r\n" line ends. Observation files need a `y` column; other columns are
// ignored.

std::vector<double> read_observations_csv(std::istream& in);
std::vector<double> read_observations_csv(const std::filesystem::path& path);

/// Columns y,theta_hat.
void write_estimates_csv(std::ostream& out, std::span<const double> y,
                         std::span<const double> theta_hat);

/// Columns trial,estimator,loss.
void write_losses_csv(std::ostream& out, const RiskReport& report);

/// Columns n,trials,bayes_risk,regret,regret_se,normalized,normalized_se,
/// paired_regret,paired_regret_se.
void write_rate_csv(std::ostream& out, const std::vector<RateRow>& rows);

/// Columns sample,loss_simple,loss_perm.
void write_scatter_csv(std::ostream& out, const std::vector<LossPair>& pairs);

/// Columns n,trials,mean_loss_simple,mean_loss_perm,ratio_of_means,
/// ratio_of_means_se,mean_of_ratios,mean_of_ratios_se,paired_diff,paired_diff_se.
void write_efficiency_csv(std::ostream& out, const std::vector<EfficiencyRow>& rows);

// ---- JSON -----------------------------------------------------------------

Json read_json(const std::filesystem::path& path);

Json to_json(const NormalMixturePrior& prior);
NormalMixturePrior prior_from_json(const Json& j, const std::string& where);

Json to_json(const ScenarioSpec& spec);
ScenarioSpec scenario_from_json(const Json& j);

Json to_json(const ExperimentConfig& cfg);
ExperimentConfig experiment_config_from_json(const Json& j);

/// Deterministic given the config unless include_timing is set.
Json to_json(const RiskReport& report, bool include_timing = false);

RateConfig rate_config_from_json(const Json& j);

Json fit_to_json(const FitReport& fit, const Sample& s, const EMConfig& em);

struct LoadedFit {
  MixingDistribution g;
  std::optional<double> sigma;
};
LoadedFit fit_from_json(const Json& j);

}  // namespace ebcd::harness
