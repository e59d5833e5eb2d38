#include "ebcd/harness/scenario.hpp"

#include <cmath>
#include <string>

#include "ebcd/error.hpp"
#include "ebcd/random.hpp"

namespace ebcd::harness {

std::string_view to_string(ScenarioKind kind) {
  switch (kind) {
    case ScenarioKind::iid_prior:
      return "iid-prior";
    case ScenarioKind::fixed_theta:
      return "fixed-theta";
    case ScenarioKind::clusters:
      return "clusters";
  }
  return "unknown";
}

ScenarioKind parse_scenario_kind(std::string_view name) {
  if (name == "iid-prior") return ScenarioKind::iid_prior;
  if (name == "fixed-theta") return ScenarioKind::fixed_theta;
  if (name == "clusters") return ScenarioKind::clusters;
  throw ValidationError("scenario.kind: unknown kind '" + std::string(name) +
                        "' (expected iid-prior, fixed-theta or clusters)");
}

void ScenarioSpec::validate() const {
  if (!(sigma > 0.0) || !std::isfinite(sigma)) {
    throw ValidationError("scenario.sigma: must be positive and finite");
  }
  const bool want_prior = kind == ScenarioKind::iid_prior;
  const bool want_theta = kind == ScenarioKind::fixed_theta;
  const bool want_clusters = kind == ScenarioKind::clusters;
  const std::string label(to_string(kind));
  if (prior.has_value() != want_prior) {
    throw ValidationError("scenario.prior: " +
                          std::string(want_prior ? "required" : "not allowed") + " for " + label);
  }
  if (theta.has_value() != want_theta) {
    throw ValidationError("scenario.theta: " +
                          std::string(want_theta ? "required" : "not allowed") + " for " + label);
  }
  if (clusters.has_value() != want_clusters) {
    throw ValidationError("scenario.clusters: " +
                          std::string(want_clusters ? "required" : "not allowed") + " for " +
                          label);
  }
  if (n < 1) throw ValidationError("scenario.n: must be >= 1");
  if (want_theta) {
    if (theta->size() != static_cast<std::size_t>(n)) {
      throw ValidationError("scenario.n: " + std::to_string(n) + " does not match theta length " +
                            std::to_string(theta->size()));
    }
    ParameterVector check(*theta);
  }
  if (want_clusters) {
    if (!(clusters->spacing > 0.0) || !std::isfinite(clusters->spacing)) {
      throw ValidationError("scenario.clusters.spacing: must be positive");
    }
    if (clusters->count < 1) throw ValidationError("scenario.clusters.count: must be >= 1");
  }
}

ScenarioDraw generate_scenario(const ScenarioSpec& spec, std::uint64_t trial_seed) {
  spec.validate();
  Engine rng = make_engine(trial_seed);
  const auto n = static_cast<std::size_t>(spec.n);
  std::vector<double> theta;
  theta.reserve(n);
  switch (spec.kind) {
    case ScenarioKind::iid_prior:
      for (std::size_t i = 0; i < n; ++i) theta.push_back(spec.prior->sample(rng));
      break;
    case ScenarioKind::fixed_theta:
      theta = *spec.theta;
      break;
    case ScenarioKind::clusters: {
      std::uniform_int_distribution<int> label(1, spec.clusters->count);
      for (std::size_t i = 0; i < n; ++i) {
        const double tau = spec.clusters->spacing * label(rng);
        theta.push_back(tau + standard_normal(rng));
      }
      break;
    }
  }
  std::vector<double> y(n);
  for (std::size_t i = 0; i < n; ++i) y[i] = theta[i] + spec.sigma * standard_normal(rng);
  return {ParameterVector(std::move(theta)), Sample(std::move(y), spec.sigma)};
}

std::vector<double> draw_theta(const NormalMixturePrior& prior, std::size_t n, std::uint64_t seed) {
  Engine rng = make_engine(seed);
  std::vector<double> theta(n);
  for (double& t : theta) t = prior.sample(rng);
  return theta;
}

NormalMixturePrior figure1_prior() { return NormalMixturePrior({0.8, 0.2}, {0.0, 3.0}, {3.0, 3.0}); }

}  // namespace ebcd::harness
