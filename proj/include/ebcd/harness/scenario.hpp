#pragma once

#include <cstdint>
#include <optional>
#include <string_view>
#include <vector>

#include "ebcd/compound.hpp"
#include "ebcd/mixture.hpp"
#include "ebcd/normal_mixture_prior.hpp"

namespace ebcd::harness {

enum class ScenarioKind { iid_prior, fixed_theta, clusters };

std::string_view to_string(ScenarioKind kind);
ScenarioKind parse_scenario_kind(std::string_view name);

// theta_i = tau_i + xi_i with tau_i / spacing uniform on {1..count} and
// xi_i ~ N(0, 1): `count` separated clusters of about n / count means each.
struct ClusterParams {
  double spacing = 10.0;  // c_n
  int count = 5;          // k_n
};

struct ScenarioSpec {
  ScenarioKind kind = ScenarioKind::iid_prior;
  std::optional<NormalMixturePrior> prior;  // iid-prior only
  std::optional<std::vector<double>> theta;  // fixed-theta only
  std::optional<ClusterParams> clusters;     // clusters only
  int n = 0;
  double sigma = 1.0;

  /// Throws ValidationError unless exactly the fields used by `kind` are set
  /// and n, sigma are valid (for fixed-theta, n must equal theta's length).
  void validate() const;
};

struct ScenarioDraw {
  ParameterVector theta;
  Sample sample;
};

/// One trial's parameters and observations, drawn from an engine seeded with
/// trial_seed. fixed-theta reuses the given theta and draws fresh noise.
ScenarioDraw generate_scenario(const ScenarioSpec& spec, std::uint64_t trial_seed);

/// n iid draws from the prior.
std::vector<double> draw_theta(const NormalMixturePrior& prior, std::size_t n, std::uint64_t seed);

/// 0.8 N(0, 9) + 0.2 N(3, 9).
NormalMixturePrior figure1_prior();

}  // namespace ebcd::harness
