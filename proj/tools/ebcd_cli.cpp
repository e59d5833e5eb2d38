// ebcd: command-line front end for NPMLE fitting, Tweedie denoising and the
// simulation harness. Errors go to stderr as a single JSON line.

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "CLI11.hpp"
#include "ebcd/decision_rule.hpp"
#include "ebcd/error.hpp"
#include "ebcd/harness/experiment.hpp"
#include "ebcd/harness/figure1.hpp"
#include "ebcd/harness/io.hpp"
#include "ebcd/harness/rate.hpp"
#include "ebcd/npmle.hpp"

namespace fs = std::filesystem;
using namespace ebcd;
using namespace ebcd::harness;

namespace {

// Writes to a temporary sibling first so a failed run never leaves a
// truncated file behind.
void write_file(const fs::path& path, const std::string& content) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  const fs::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary);
    if (!out) throw ValidationError("cannot write '" + path.string() + "'");
    out << content;
    if (!out) throw ValidationError("write failed for '" + path.string() + "'");
  }
  fs::rename(tmp, path);
}

void emit(const std::optional<std::string>& path, const std::string& content) {
  if (path) {
    write_file(*path, content);
  } else {
    std::cout << content;
  }
}

unsigned resolve_workers(int requested) {
  if (requested > 0) return static_cast<unsigned>(requested);
  const unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : hw;
}

struct Options {
  std::uint64_t seed = 0;
  bool seed_given = false;
  int workers = 1;

  std::string input;
  double sigma = 1.0;
  std::optional<int> grid_m;
  std::optional<std::string> out;
  std::optional<std::string> fit;

  std::string config;
  std::optional<std::string> losses;
  bool timing = false;

  std::optional<std::int64_t> perms;
  std::optional<int> samples;
  std::optional<int> trials;
  std::vector<int> n_grid;
};

int run_fit(const Options& o) {
  const Sample s(read_observations_csv(fs::path(o.input)), o.sigma);
  const EMConfig em;
  const FitReport fit = fit_npmle(s, default_grid(s, o.grid_m), em);
  emit(o.out, fit_to_json(fit, s, em).dump(2) + "\n");
  return 0;
}

int run_denoise(const Options& o) {
  const Sample s(read_observations_csv(fs::path(o.input)), o.sigma);
  std::optional<MixingDistribution> g;
  if (o.fit) {
    LoadedFit loaded = fit_from_json(read_json(*o.fit));
    if (loaded.sigma && *loaded.sigma != o.sigma) {
      throw ValidationError("--sigma " + format_double(o.sigma) + " differs from the fit's sigma " +
                            format_double(*loaded.sigma));
    }
    g = std::move(loaded.g);
  } else {
    g = fit_npmle(s, default_grid(s, o.grid_m)).g_hat;
  }
  const auto est = tweedie_rule(std::move(*g), s.sigma()).apply(s.y());
  std::ostringstream out;
  write_estimates_csv(out, s.y(), est);
  emit(o.out, out.str());
  return 0;
}

int run_simulate(const Options& o) {
  ExperimentConfig cfg = experiment_config_from_json(read_json(o.config));
  if (o.seed_given) cfg.seed = o.seed;
  const RiskReport report = run_experiment(cfg, resolve_workers(o.workers));
  emit(o.out, to_json(report, o.timing).dump(2) + "\n");
  if (o.losses) {
    std::ostringstream out;
    write_losses_csv(out, report);
    write_file(*o.losses, out.str());
  }
  return 0;
}

int run_figure1(const Options& o) {
  Figure1Config cfg = default_figure1_config();
  cfg.seed = o.seed;
  if (o.perms) cfg.perm.num_perms = *o.perms;
  if (o.samples) cfg.scatter_samples = *o.samples;
  if (o.trials) cfg.curve_trials = *o.trials;
  if (!o.n_grid.empty()) cfg.curve_n = o.n_grid;
  cfg.perm.validate();
  const unsigned workers = resolve_workers(o.workers);

  const fs::path dir = o.out.value_or(".");
  const auto pairs = loss_pairs(cfg.prior, cfg.sigma, cfg.scatter_n, cfg.scatter_samples, cfg.perm,
                                derive_seed(cfg.seed, 0), workers);
  std::ostringstream scatter;
  write_scatter_csv(scatter, pairs);
  write_file(dir / "figure1a_scatter.csv", scatter.str());

  const auto rows = efficiency_curve(cfg.prior, cfg.sigma, cfg.curve_n, cfg.curve_trials,
                                     cfg.perm, derive_seed(cfg.seed, 1), workers);
  std::ostringstream curve;
  write_efficiency_csv(curve, rows);
  write_file(dir / "figure1b_efficiency.csv", curve.str());
  return 0;
}

int run_rate(const Options& o) {
  RateConfig cfg = rate_config_from_json(read_json(o.config));
  if (o.seed_given) cfg.seed = o.seed;
  const auto rows = rate_check(cfg, resolve_workers(o.workers));
  std::ostringstream out;
  write_rate_csv(out, rows);
  emit(o.out, out.str());
  return 0;
}

void report_error(std::string_view kind, std::string_view message) {
  std::cerr << Json{{"error", kind}, {"message", message}}.dump() << '\n';
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Empirical Bayes and compound decision estimators for normal means"};
  app.require_subcommand(1);
  Options o;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option_function<std::uint64_t>(
        "--seed",
        [&](const std::uint64_t& v) {
          o.seed = v;
          o.seed_given = true;
        },
        "base random seed (default 0)");
    sub->add_option("--workers", o.workers, "worker threads, 0 = all cores (default 1)")
        ->check(CLI::NonNegativeNumber);
  };

  auto* fit = app.add_subcommand("fit", "fit the NPMLE of the mixing distribution");
  fit->add_option("--input", o.input, "CSV with a y column")->required();
  fit->add_option("--sigma", o.sigma, "noise standard deviation")->required();
  fit->add_option("--grid-m", o.grid_m, "number of grid points");
  fit->add_option("--out", o.out, "output JSON (default stdout)");
  add_common(fit);

  auto* denoise = app.add_subcommand("denoise", "Tweedie estimates for each observation");
  denoise->add_option("--input", o.input, "CSV with a y column")->required();
  denoise->add_option("--sigma", o.sigma, "noise standard deviation")->required();
  denoise->add_option("--fit", o.fit, "fit JSON from `ebcd fit` (fits the input otherwise)");
  denoise->add_option("--grid-m", o.grid_m, "number of grid points when fitting");
  denoise->add_option("--out", o.out, "output CSV (default stdout)");
  add_common(denoise);

  auto* simulate = app.add_subcommand("simulate", "run a risk comparison experiment");
  simulate->add_option("--config", o.config, "experiment JSON")->required();
  simulate->add_option("--out", o.out, "report JSON (default stdout)");
  simulate->add_option("--losses", o.losses, "per-trial losses CSV");
  simulate->add_flag("--timing", o.timing, "include wall-clock seconds in the report");
  add_common(simulate);

  auto* figure1 = app.add_subcommand("figure1", "scatter and efficiency-curve data as CSV");
  figure1->add_option("--out", o.out, "output directory")->required();
  figure1->add_option("--perms", o.perms, "permutation sampler budget (default 1000000)");
  figure1->add_option("--samples", o.samples, "scatter samples at n = 100 (default 1000)");
  figure1->add_option("--trials", o.trials, "trials per curve point (default 1000)");
  figure1->add_option("--n-grid", o.n_grid, "curve sample sizes")->delimiter(',');
  add_common(figure1);

  auto* rate = app.add_subcommand("rate", "regret of the NPMLE rule across sample sizes");
  rate->add_option("--config", o.config, "rate JSON")->required();
  rate->add_option("--out", o.out, "output CSV (default stdout)");
  add_common(rate);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    report_error("usage_error", e.what());
    return 2;
  }

  try {
    if (*fit) return run_fit(o);
    if (*denoise) return run_denoise(o);
    if (*simulate) return run_simulate(o);
    if (*figure1) return run_figure1(o);
    if (*rate) return run_rate(o);
  } catch (const ValidationError& e) {
    report_error("validation_error", e.what());
    return 1;
  } catch (const std::exception& e) {
    report_error("runtime_error", e.what());
    return 1;
  }
  return 1;
}
