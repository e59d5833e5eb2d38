#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "ebcd/mixture.hpp"

namespace ebcd {

/// Equally spaced support grid lo, lo + h, ..., hi with h = (hi - lo)/(m - 1).
struct GridSpec {
  double lo = 0.0;
  double hi = 1.0;
  int m = 2;

  /// Throws ValidationError unless lo < hi, both finite, and m >= 2.
  void validate() const;
  double spacing() const { return (hi - lo) / (m - 1); }
  std::vector<double> points() const;
};

inline constexpr int kMinDefaultGridSize = 300;
inline constexpr int kMaxDefaultGridSize = 10000;

/// min(max(ceil(n^{3/2}), 300), 10000). The n^{3/2} rate makes grid
/// rounding negligible for the likelihood; the cap keeps EM tractable.
int default_grid_size(std::size_t n);

/// True when the cap, not n^{3/2}, determined default_grid_size(n).
bool default_grid_capped(std::size_t n);

/// [min Y - sigma, max Y + sigma] with m points (default_grid_size when absent).
GridSpec default_grid(const Sample& s, std::optional<int> m = std::nullopt);

struct EMConfig {
  int max_iters = 5000;
  double rel_tol = 1e-9;
  double prune_eps = 1e-10;
  /// Optional hard stop after this many iterations; off by default.
  std::optional<int> early_stop_iters;

  /// Throws ValidationError unless max_iters >= 1, rel_tol > 0,
  /// prune_eps in [0, 1e-6] and early_stop_iters (if set) >= 1.
  void validate() const;
};

struct FitReport {
  MixingDistribution g_hat;
  GridSpec grid;
  /// Log-likelihood of the uniform start followed by one entry per
  /// iteration; size() == iterations_used + 1.
  std::vector<double> loglik_trace;
  double optimality_gap = 0.0;
  int iterations_used = 0;
  bool converged = false;  // stopped on rel_tol rather than an iteration limit
};

/// One EM update of grid weights:
///   w'_j = (1/n) sum_i w_j phi_sigma(Y_i - theta_j) / sum_k w_k phi_sigma(Y_i - theta_k).
std::vector<double> em_step(std::span<const double> weights, const Sample& s, const GridSpec& grid);

/// Fixed-grid NPMLE by EM from uniform weights. Each iteration is an EM update
/// followed by a line-search step toward the grid point of largest directional
/// derivative, so the log-likelihood never decreases. Stops when the relative
/// log-likelihood change falls below rel_tol, or at max_iters /
/// early_stop_iters; then drops weights < prune_eps and renormalizes.
FitReport fit_npmle(const Sample& s, const GridSpec& grid, const EMConfig& cfg = {});

/// max over grid points theta of
///   D(theta) = (1/n) sum_i phi_sigma(Y_i - theta) / f_g(Y_i) - 1.
/// Nonpositive at the exact NPMLE over the grid, zero on its support.
double optimality_gap(const MixingDistribution& g, const Sample& s, const GridSpec& grid);

/// Number of clusters of atoms (consecutive atoms more than 2 * spacing
/// apart start a new cluster) whose total weight exceeds eps.
int support_count(const MixingDistribution& g, double eps, double spacing);

}  // namespace ebcd
