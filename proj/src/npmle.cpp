#include "ebcd/npmle.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <string>

#include "ebcd/error.hpp"

namespace ebcd {

namespace {

// Above this many kernel entries rows are recomputed on every pass instead of
// being stored (2^24 doubles = 128 MiB).
constexpr std::size_t kMaxStoredKernel = std::size_t{1} << 24;

constexpr int kVertexPeriod = 8;

// Row-scaled Gaussian kernel K_ij = exp(L_ij - M_i) with
// L_ij = -(y_i - theta_j)^2 / (2 sigma^2) and M_i = max_j L_ij, so every row
// has maximum 1 and log f_i = M_i - log(sigma sqrt(2 pi)) + log sum_j w_j K_ij.
class ScaledKernel {
 public:
  ScaledKernel(const Sample& s, std::span<const double> grid)
      : y_(s.y()), grid_(grid), inv_two_var_(0.5 / (s.sigma() * s.sigma())),
        log_norm_(kLogSqrtTwoPi + std::log(s.sigma())), row_max_(s.size()) {
    for (std::size_t i = 0; i < y_.size(); ++i) {
      // The grid is sorted, so the nearest point maximizes L_ij.
      const auto it = std::lower_bound(grid_.begin(), grid_.end(), y_[i]);
      double best = std::numeric_limits<double>::infinity();
      if (it != grid_.end()) best = std::min(best, std::abs(*it - y_[i]));
      if (it != grid_.begin()) best = std::min(best, std::abs(*(it - 1) - y_[i]));
      row_max_[i] = -best * best * inv_two_var_;
    }
    if (y_.size() * grid_.size() <= kMaxStoredKernel) {
      stored_.resize(y_.size() * grid_.size());
      for (std::size_t i = 0; i < y_.size(); ++i) fill_row(i, &stored_[i * grid_.size()]);
    } else {
      scratch_.resize(grid_.size());
    }
  }

  std::size_t rows() const { return y_.size(); }
  std::size_t cols() const { return grid_.size(); }
  double row_max(std::size_t i) const { return row_max_[i]; }
  double log_norm() const { return log_norm_; }

  double at(std::size_t i, std::size_t j) const {
    const double d = y_[i] - grid_[j];
    return std::exp(-d * d * inv_two_var_ - row_max_[i]);
  }

  const double* row(std::size_t i) {
    if (!stored_.empty()) return &stored_[i * grid_.size()];
    fill_row(i, scratch_.data());
    return scratch_.data();
  }

 private:
  void fill_row(std::size_t i, double* out) const {
    for (std::size_t j = 0; j < grid_.size(); ++j) {
      const double d = y_[i] - grid_[j];
      out[j] = std::exp(-d * d * inv_two_var_ - row_max_[i]);
    }
  }

  std::span<const double> y_;
  std::span<const double> grid_;
  double inv_two_var_;
  double log_norm_;
  std::vector<double> row_max_;
  std::vector<double> stored_;
  std::vector<double> scratch_;
};

struct PassResult {
  double loglik;
  std::vector<double> responsibility_sums;  // r_j = sum_i K_ij / s_i
  std::vector<double> row_sums;             // s_i = sum_j w_j K_ij
};

// One sweep over the rows: log-likelihood of `weights` plus the column sums
// needed for the next EM update.
PassResult sweep(ScaledKernel& kernel, std::span<const double> weights) {
  const std::size_t m = kernel.cols();
  PassResult out{0.0, std::vector<double>(m, 0.0), std::vector<double>(kernel.rows())};
  for (std::size_t i = 0; i < kernel.rows(); ++i) {
    const double* k = kernel.row(i);
    double s = 0.0;
    for (std::size_t j = 0; j < m; ++j) s += weights[j] * k[j];
    if (!(s > 0.0)) {
      throw ValidationError("em: observation " + std::to_string(i) +
                            " has zero likelihood under the current weights");
    }
    out.row_sums[i] = s;
    out.loglik += kernel.row_max(i) + std::log(s);
    const double inv = 1.0 / s;
    double* r = out.responsibility_sums.data();
    for (std::size_t j = 0; j < m; ++j) r[j] += k[j] * inv;
  }
  out.loglik -= static_cast<double>(kernel.rows()) * kernel.log_norm();
  return out;
}

std::vector<double> update(std::span<const double> weights, std::span<const double> sums,
                           std::size_t n) {
  std::vector<double> next(weights.size());
  const double inv_n = 1.0 / static_cast<double>(n);
  double total = 0.0;
  for (std::size_t j = 0; j < weights.size(); ++j) {
    next[j] = weights[j] * sums[j] * inv_n;
    total += next[j];
  }
  for (double& w : next) w /= total;
  return next;
}

// Moves mass toward the grid point with the largest directional derivative
// D_j = r_j / n - 1, w <- (1 - lambda) w + lambda e_j, with lambda maximizing
// the (concave) log-likelihood along that segment. EM alone shrinks a weight
// it once drove near zero only by a factor 1 + D_j per step, so without this
// it can stop on rel_tol while D_j is still large.
bool vertex_step(const ScaledKernel& kernel, std::vector<double>& weights,
                 const PassResult& pass) {
  const auto& r = pass.responsibility_sums;
  const auto j = static_cast<std::size_t>(std::max_element(r.begin(), r.end()) - r.begin());
  if (!(r[j] > static_cast<double>(kernel.rows()))) return false;

  std::vector<double> ratio(kernel.rows());  // K_ij / s_i - 1
  for (std::size_t i = 0; i < kernel.rows(); ++i) {
    ratio[i] = kernel.at(i, j) / pass.row_sums[i] - 1.0;
  }
  // d/dlambda sum_i log(1 + lambda ratio_i), decreasing in lambda.
  const auto slope = [&](double lambda) {
    double acc = 0.0;
    for (double q : ratio) acc += q / (1.0 + lambda * q);
    return acc;
  };
  double lo = 0.0, hi = 1.0;
  if (slope(hi) >= 0.0) {
    lo = hi;
  } else {
    for (int it = 0; it < 60 && hi - lo > 1e-14; ++it) {
      const double mid = 0.5 * (lo + hi);
      (slope(mid) > 0.0 ? lo : hi) = mid;
    }
  }
  if (!(lo > 0.0)) return false;
  for (double& w : weights) w *= 1.0 - lo;
  weights[j] += lo;
  return true;
}

void check_weights(std::span<const double> weights, std::size_t m) {
  if (weights.size() != m) {
    throw ValidationError("em: expected " + std::to_string(m) + " weights, got " +
                          std::to_string(weights.size()));
  }
  double total = 0.0;
  for (double w : weights) {
    if (!(w >= 0.0) || !std::isfinite(w)) throw ValidationError("em: weights must be nonnegative");
    total += w;
  }
  if (std::abs(total - 1.0) > 1e-10) throw ValidationError("em: weights must sum to 1");
}

}  // namespace

void GridSpec::validate() const {
  if (!std::isfinite(lo) || !std::isfinite(hi) || !(lo < hi)) {
    throw ValidationError("grid: require finite lo < hi");
  }
  if (m < 2) throw ValidationError("grid: m must be at least 2");
}

std::vector<double> GridSpec::points() const {
  validate();
  std::vector<double> pts(static_cast<std::size_t>(m));
  const double h = spacing();
  for (int j = 0; j < m; ++j) pts[j] = lo + h * j;
  pts.back() = hi;
  return pts;
}

int default_grid_size(std::size_t n) {
  // ceil(n^{3/2}) exceeds the cap from n = 465 on; below that n^3 fits easily.
  if (n >= 465) return kMaxDefaultGridSize;
  const std::uint64_t cube = std::uint64_t{n} * n * n;
  auto root = static_cast<std::uint64_t>(std::sqrt(static_cast<double>(cube)));
  while (root * root < cube) ++root;
  while (root > 0 && (root - 1) * (root - 1) >= cube) --root;
  return std::clamp(static_cast<int>(root), kMinDefaultGridSize, kMaxDefaultGridSize);
}

bool default_grid_capped(std::size_t n) { return n >= 465; }

GridSpec default_grid(const Sample& s, std::optional<int> m) {
  const auto [lo, hi] = std::minmax_element(s.y().begin(), s.y().end());
  GridSpec grid{*lo - s.sigma(), *hi + s.sigma(), m.value_or(default_grid_size(s.size()))};
  grid.validate();
  return grid;
}

void EMConfig::validate() const {
  if (max_iters < 1) throw ValidationError("em config: max_iters must be >= 1");
  if (!(rel_tol > 0.0)) throw ValidationError("em config: rel_tol must be > 0");
  if (!(prune_eps >= 0.0 && prune_eps <= 1e-6)) {
    throw ValidationError("em config: prune_eps must lie in [0, 1e-6]");
  }
  if (early_stop_iters && *early_stop_iters < 1) {
    throw ValidationError("em config: early_stop_iters must be >= 1");
  }
}

std::vector<double> em_step(std::span<const double> weights, const Sample& s,
                            const GridSpec& grid) {
  const auto pts = grid.points();
  check_weights(weights, pts.size());
  ScaledKernel kernel(s, pts);
  const PassResult pass = sweep(kernel, weights);
  return update(weights, pass.responsibility_sums, s.size());
}

FitReport fit_npmle(const Sample& s, const GridSpec& grid, const EMConfig& cfg) {
  cfg.validate();
  const auto pts = grid.points();
  ScaledKernel kernel(s, pts);

  const int limit = cfg.early_stop_iters ? std::min(cfg.max_iters, *cfg.early_stop_iters)
                                         : cfg.max_iters;

  std::vector<double> weights(pts.size(), 1.0 / static_cast<double>(pts.size()));
  PassResult pass = sweep(kernel, weights);
  std::vector<double> trace{pass.loglik};
  trace.reserve(static_cast<std::size_t>(limit) + 1);

  int iterations = 0;
  bool converged = false;
  while (iterations < limit) {
    weights = update(weights, pass.responsibility_sums, s.size());
    PassResult next = sweep(kernel, weights);
    ++iterations;
    const auto stalled = [&] {
      return std::abs(next.loglik - pass.loglik) < cfg.rel_tol * std::abs(next.loglik);
    };
    // The vertex step costs a second sweep, so it runs periodically and before
    // any stop.
    if (iterations % kVertexPeriod == 0 || stalled()) {
      if (vertex_step(kernel, weights, next)) next = sweep(kernel, weights);
    }
    trace.push_back(next.loglik);
    const bool done = stalled();
    pass = std::move(next);
    if (done) {
      converged = true;
      break;
    }
  }

  auto g_hat = MixingDistribution::from_unnormalized(pts, weights, 0.0);
  if (cfg.prune_eps > 0.0) {
    // Pruning at the largest weight would leave nothing; keep at least that atom.
    const double top = *std::max_element(weights.begin(), weights.end());
    g_hat = MixingDistribution::from_unnormalized(pts, weights,
                                                  std::min(cfg.prune_eps, 0.5 * top));
  }
  const double gap = optimality_gap(g_hat, s, grid);
  return FitReport{std::move(g_hat), grid, std::move(trace), gap, iterations, converged};
}

double optimality_gap(const MixingDistribution& g, const Sample& s, const GridSpec& grid) {
  const auto pts = grid.points();
  const double sigma = s.sigma();
  std::vector<double> log_f(s.size());
  for (std::size_t i = 0; i < s.size(); ++i) log_f[i] = posterior(g, sigma, s.y()[i]).log_marginal;

  const double inv_n = 1.0 / static_cast<double>(s.size());
  double best = -std::numeric_limits<double>::infinity();
  for (double theta : pts) {
    double acc = 0.0;
    for (std::size_t i = 0; i < s.size(); ++i) {
      acc += std::exp(log_normal_density(s.y()[i] - theta, sigma) - log_f[i]);
    }
    best = std::max(best, acc * inv_n - 1.0);
  }
  return best;
}

int support_count(const MixingDistribution& g, double eps, double spacing) {
  if (!(eps >= 0.0)) throw ValidationError("support_count: eps must be nonnegative");
  if (!(spacing > 0.0)) throw ValidationError("support_count: spacing must be positive");
  const auto atoms = g.atoms();
  const auto weights = g.weights();
  const double split = 2.0 * spacing * (1.0 + 1e-9);
  int count = 0;
  double cluster = weights[0];
  for (std::size_t j = 1; j < atoms.size(); ++j) {
    if (atoms[j] - atoms[j - 1] > split) {
      if (cluster > eps) ++count;
      cluster = 0.0;
    }
    cluster += weights[j];
  }
  if (cluster > eps) ++count;
  return count;
}

}  // namespace ebcd
