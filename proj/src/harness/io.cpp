#include "ebcd/harness/io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <initializer_list>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>
#include <string_view>

#include "ebcd/error.hpp"

namespace ebcd::harness {

std::string format_double(double x) {
  if (!std::isfinite(x)) throw ValidationError("cannot format a non-finite number");
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, res.ptr);
}

// ---- CSV ------------------------------------------------------------------

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) {
    s.remove_suffix(1);
  }
  return s;
}

std::vector<std::string_view> split_fields(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  for (;;) {
    const std::size_t comma = line.find(',', start);
    out.push_back(trim(line.substr(start, comma - start)));
    if (comma == std::string_view::npos) return out;
    start = comma + 1;
  }
}

double parse_number(std::string_view text, const std::string& where) {
  double value = 0.0;
  const char* first = text.data();
  const char* last = text.data() + text.size();
  if (!text.empty() && text.front() == '+') ++first;
  const auto res = std::from_chars(first, last, value);
  if (text.empty() || res.ec != std::errc() || res.ptr != last || !std::isfinite(value)) {
    throw ValidationError(where + ": cannot parse '" + std::string(text) + "' as a finite number");
  }
  return value;
}

template <typename Row>
void write_rows(std::ostream& out, std::string_view header, const std::vector<Row>& rows,
                auto&& fields) {
  out << header << '\n';
  for (const Row& row : rows) {
    bool first = true;
    for (const std::string& field : fields(row)) {
      if (!first) out << ',';
      out << field;
      first = false;
    }
    out << '\n';
  }
}

std::string fmt_int(long long v) { return std::to_string(v); }

}  // namespace

std::vector<double> read_observations_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw ValidationError("csv: empty input, expected a header row");
  if (line.rfind("\xEF\xBB\xBF", 0) == 0) line.erase(0, 3);
  const auto header = split_fields(line);
  std::size_t column = header.size();
  for (std::size_t c = 0; c < header.size(); ++c) {
    if (header[c] == "y") {
      column = c;
      break;
    }
  }
  if (column == header.size()) throw ValidationError("csv: header has no 'y' column");

  std::vector<double> y;
  std::size_t row = 0;
  while (std::getline(in, line)) {
    ++row;
    if (trim(line).empty()) continue;
    const auto fields = split_fields(line);
    const std::string where = "csv data row " + std::to_string(row) + ", field 'y'";
    if (fields.size() != header.size()) {
      throw ValidationError("csv data row " + std::to_string(row) + ": expected " +
                            std::to_string(header.size()) + " fields, found " +
                            std::to_string(fields.size()));
    }
    y.push_back(parse_number(fields[column], where));
  }
  if (y.empty()) throw ValidationError("csv: no data rows");
  return y;
}

std::vector<double> read_observations_csv(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("cannot open '" + path.string() + "'");
  return read_observations_csv(in);
}

void write_estimates_csv(std::ostream& out, std::span<const double> y,
                         std::span<const double> theta_hat) {
  if (y.size() != theta_hat.size()) throw ValidationError("estimates: length mismatch");
  out << "y,theta_hat\n";
  for (std::size_t i = 0; i < y.size(); ++i) {
    out << format_double(y[i]) << ',' << format_double(theta_hat[i]) << '\n';
  }
}

void write_losses_csv(std::ostream& out, const RiskReport& report) {
  out << "trial,estimator,loss\n";
  const auto trials = static_cast<std::size_t>(report.config.trials);
  for (std::size_t t = 0; t < trials; ++t) {
    for (std::size_t e = 0; e < report.summaries.size(); ++e) {
      out << t << ',' << to_string(report.summaries[e].estimator) << ','
          << format_double(report.losses[e][t]) << '\n';
    }
  }
}

void write_rate_csv(std::ostream& out, const std::vector<RateRow>& rows) {
  write_rows(out,
             "n,trials,bayes_risk,regret,regret_se,normalized,normalized_se,paired_regret,"
             "paired_regret_se",
             rows, [](const RateRow& r) {
               return std::vector<std::string>{
                   fmt_int(r.n),           fmt_int(r.trials),
                   format_double(r.bayes_risk), format_double(r.regret),
                   format_double(r.regret_se), format_double(r.normalized),
                   format_double(r.normalized_se), format_double(r.paired_regret),
                   format_double(r.paired_regret_se)};
             });
}

void write_scatter_csv(std::ostream& out, const std::vector<LossPair>& pairs) {
  out << "sample,loss_simple,loss_perm\n";
  for (std::size_t t = 0; t < pairs.size(); ++t) {
    out << t << ',' << format_double(pairs[t].simple) << ',' << format_double(pairs[t].perm)
        << '\n';
  }
}

void write_efficiency_csv(std::ostream& out, const std::vector<EfficiencyRow>& rows) {
  write_rows(out,
             "n,trials,mean_loss_simple,mean_loss_perm,ratio_of_means,ratio_of_means_se,"
             "mean_of_ratios,mean_of_ratios_se,paired_diff,paired_diff_se",
             rows, [](const EfficiencyRow& r) {
               return std::vector<std::string>{
                   fmt_int(r.n),
                   fmt_int(r.trials),
                   format_double(r.mean_loss_simple),
                   format_double(r.mean_loss_perm),
                   format_double(r.ratio_of_means),
                   format_double(r.ratio_of_means_se),
                   format_double(r.mean_of_ratios),
                   format_double(r.mean_of_ratios_se),
                   format_double(r.paired_diff),
                   format_double(r.paired_diff_se)};
             });
}

// ---- JSON -----------------------------------------------------------------

namespace {

std::string join(const std::string& where, std::string_view key) {
  return where.empty() ? std::string(key) : where + "." + std::string(key);
}

void require_object(const Json& j, const std::string& where,
                    std::initializer_list<std::string_view> allowed) {
  if (!j.is_object()) {
    throw ValidationError((where.empty() ? std::string("config") : where) +
                          ": expected a JSON object");
  }
  for (const auto& [key, value] : j.items()) {
    bool known = false;
    for (std::string_view a : allowed) known = known || key == a;
    if (!known) throw ValidationError(join(where, key) + ": unknown field");
  }
}

const Json& field(const Json& j, std::string_view key, const std::string& where) {
  const auto it = j.find(std::string(key));
  if (it == j.end() || it->is_null()) throw ValidationError(join(where, key) + ": required");
  return *it;
}

bool has(const Json& j, std::string_view key) {
  const auto it = j.find(std::string(key));
  return it != j.end() && !it->is_null();
}

double as_double(const Json& v, const std::string& where) {
  if (!v.is_number()) throw ValidationError(where + ": expected a number");
  const double x = v.get<double>();
  if (!std::isfinite(x)) throw ValidationError(where + ": must be finite");
  return x;
}

long long as_integer(const Json& v, const std::string& where) {
  if (!v.is_number_integer()) throw ValidationError(where + ": expected an integer");
  return v.get<long long>();
}

int as_int(const Json& v, const std::string& where) {
  const long long x = as_integer(v, where);
  if (x < std::numeric_limits<int>::min() || x > std::numeric_limits<int>::max()) {
    throw ValidationError(where + ": out of range");
  }
  return static_cast<int>(x);
}

std::uint64_t as_seed(const Json& v, const std::string& where) {
  if (v.is_number_unsigned()) return v.get<std::uint64_t>();
  if (v.is_number_integer() && v.get<long long>() >= 0) {
    return static_cast<std::uint64_t>(v.get<long long>());
  }
  throw ValidationError(where + ": expected a nonnegative integer");
}

bool as_bool(const Json& v, const std::string& where) {
  if (!v.is_boolean()) throw ValidationError(where + ": expected true or false");
  return v.get<bool>();
}

std::string as_string(const Json& v, const std::string& where) {
  if (!v.is_string()) throw ValidationError(where + ": expected a string");
  return v.get<std::string>();
}

std::vector<double> as_doubles(const Json& v, const std::string& where) {
  if (!v.is_array()) throw ValidationError(where + ": expected an array of numbers");
  std::vector<double> out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    out.push_back(as_double(v[i], where + "[" + std::to_string(i) + "]"));
  }
  return out;
}

std::vector<int> as_ints(const Json& v, const std::string& where) {
  if (!v.is_array()) throw ValidationError(where + ": expected an array of integers");
  std::vector<int> out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    out.push_back(as_int(v[i], where + "[" + std::to_string(i) + "]"));
  }
  return out;
}

Json to_json(const EMConfig& em) {
  Json j = {{"max_iters", em.max_iters}, {"rel_tol", em.rel_tol}, {"prune_eps", em.prune_eps}};
  j["early_stop_iters"] = em.early_stop_iters ? Json(*em.early_stop_iters) : Json(nullptr);
  return j;
}

Json to_json(const NpmleSettings& s) {
  Json j = to_json(s.em);
  j["grid_m"] = s.grid_m ? Json(*s.grid_m) : Json(nullptr);
  return j;
}

NpmleSettings npmle_from_json(const Json& j, const std::string& where) {
  require_object(j, where, {"grid_m", "max_iters", "rel_tol", "prune_eps", "early_stop_iters"});
  NpmleSettings s;
  if (has(j, "grid_m")) s.grid_m = as_int(j["grid_m"], join(where, "grid_m"));
  if (has(j, "max_iters")) s.em.max_iters = as_int(j["max_iters"], join(where, "max_iters"));
  if (has(j, "rel_tol")) s.em.rel_tol = as_double(j["rel_tol"], join(where, "rel_tol"));
  if (has(j, "prune_eps")) s.em.prune_eps = as_double(j["prune_eps"], join(where, "prune_eps"));
  if (has(j, "early_stop_iters")) {
    s.em.early_stop_iters = as_int(j["early_stop_iters"], join(where, "early_stop_iters"));
  }
  try {
    s.em.validate();
  } catch (const ValidationError& e) {
    throw ValidationError(where + ": " + e.what());
  }
  return s;
}

}  // namespace

Json read_json(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("cannot open '" + path.string() + "'");
  try {
    return Json::parse(in);
  } catch (const Json::parse_error& e) {
    throw ValidationError(path.string() + ": malformed JSON (" + e.what() + ")");
  }
}

Json to_json(const NormalMixturePrior& prior) {
  return {{"weights", std::vector<double>(prior.weights().begin(), prior.weights().end())},
          {"means", std::vector<double>(prior.means().begin(), prior.means().end())},
          {"sds", std::vector<double>(prior.sds().begin(), prior.sds().end())}};
}

NormalMixturePrior prior_from_json(const Json& j, const std::string& where) {
  require_object(j, where, {"weights", "means", "sds"});
  auto weights = as_doubles(field(j, "weights", where), join(where, "weights"));
  auto means = as_doubles(field(j, "means", where), join(where, "means"));
  auto sds = has(j, "sds") ? as_doubles(j["sds"], join(where, "sds"))
                           : std::vector<double>(means.size(), 0.0);
  try {
    return NormalMixturePrior(std::move(weights), std::move(means), std::move(sds));
  } catch (const ValidationError& e) {
    throw ValidationError(where + ": " + e.what());
  }
}

Json to_json(const ScenarioSpec& spec) {
  Json j = {{"kind", std::string(to_string(spec.kind))}, {"n", spec.n}, {"sigma", spec.sigma}};
  if (spec.prior) j["prior"] = to_json(*spec.prior);
  if (spec.theta) j["theta"] = *spec.theta;
  if (spec.clusters) {
    j["clusters"] = {{"spacing", spec.clusters->spacing}, {"count", spec.clusters->count}};
  }
  return j;
}

ScenarioSpec scenario_from_json(const Json& j) {
  const std::string where = "scenario";
  require_object(j, where, {"kind", "n", "sigma", "prior", "theta", "clusters"});
  ScenarioSpec spec;
  spec.kind = parse_scenario_kind(as_string(field(j, "kind", where), join(where, "kind")));
  spec.sigma = has(j, "sigma") ? as_double(j["sigma"], join(where, "sigma")) : 1.0;
  if (has(j, "prior")) spec.prior = prior_from_json(j["prior"], join(where, "prior"));
  if (has(j, "theta")) spec.theta = as_doubles(j["theta"], join(where, "theta"));
  if (has(j, "clusters")) {
    const std::string cw = join(where, "clusters");
    const Json& c = j["clusters"];
    require_object(c, cw, {"spacing", "count"});
    spec.clusters = ClusterParams{as_double(field(c, "spacing", cw), join(cw, "spacing")),
                                  as_int(field(c, "count", cw), join(cw, "count"))};
  }
  if (has(j, "n")) {
    spec.n = as_int(j["n"], join(where, "n"));
  } else if (spec.theta) {
    spec.n = static_cast<int>(spec.theta->size());
  } else {
    throw ValidationError("scenario.n: required");
  }
  spec.validate();
  return spec;
}

Json to_json(const ExperimentConfig& cfg) {
  Json estimators = Json::array();
  for (Estimator e : cfg.estimators) estimators.push_back(std::string(to_string(e)));
  return {{"scenario", to_json(cfg.scenario)},
          {"estimators", estimators},
          {"trials", cfg.trials},
          {"seed", cfg.seed},
          {"npmle", to_json(cfg.npmle)},
          {"perm_mc",
           {{"num_perms", cfg.perm.num_perms}, {"sampler", std::string(to_string(cfg.perm.sampler))}}},
          {"keep_losses", cfg.keep_losses}};
}

ExperimentConfig experiment_config_from_json(const Json& j) {
  require_object(j, "", {"scenario", "estimators", "trials", "seed", "npmle", "perm_mc",
                         "keep_losses"});
  ExperimentConfig cfg;
  cfg.scenario = scenario_from_json(field(j, "scenario", ""));
  const Json& est = field(j, "estimators", "");
  if (!est.is_array()) throw ValidationError("estimators: expected an array of names");
  for (std::size_t i = 0; i < est.size(); ++i) {
    cfg.estimators.push_back(
        parse_estimator(as_string(est[i], "estimators[" + std::to_string(i) + "]")));
  }
  cfg.trials = as_int(field(j, "trials", ""), "trials");
  if (has(j, "seed")) cfg.seed = as_seed(j["seed"], "seed");
  if (has(j, "npmle")) cfg.npmle = npmle_from_json(j["npmle"], "npmle");
  if (has(j, "perm_mc")) {
    const Json& p = j["perm_mc"];
    require_object(p, "perm_mc", {"num_perms", "sampler"});
    if (has(p, "num_perms")) cfg.perm.num_perms = as_integer(p["num_perms"], "perm_mc.num_perms");
    if (has(p, "sampler")) {
      cfg.perm.sampler = parse_perm_sampler(as_string(p["sampler"], "perm_mc.sampler"));
    }
  }
  if (has(j, "keep_losses")) cfg.keep_losses = as_bool(j["keep_losses"], "keep_losses");
  cfg.validate();
  return cfg;
}

Json to_json(const RiskReport& report, bool include_timing) {
  Json summaries = Json::array();
  for (const auto& s : report.summaries) {
    summaries.push_back({{"name", std::string(to_string(s.estimator))},
                         {"mean_loss", s.mean_loss},
                         {"standard_error", s.standard_error},
                         {"trials", report.config.trials}});
  }
  Json paired = Json::array();
  for (const auto& p : report.paired) {
    paired.push_back({{"a", std::string(to_string(p.a))},
                      {"b", std::string(to_string(p.b))},
                      {"mean_diff", p.mean},
                      {"standard_error", p.standard_error}});
  }
  Json j = {{"config", to_json(report.config)},
            {"estimators", summaries},
            {"paired_differences", paired},
            {"degenerate_perm_trials", report.degenerate_perm_trials}};
  if (report.config.keep_losses) {
    Json losses = Json::object();
    for (std::size_t e = 0; e < report.summaries.size(); ++e) {
      losses[std::string(to_string(report.summaries[e].estimator))] = report.losses[e];
    }
    j["losses"] = losses;
  }
  if (include_timing) {
    Json timing = Json::object();
    for (const auto& s : report.summaries) {
      timing[std::string(to_string(s.estimator))] = s.wall_seconds;
    }
    j["wall_seconds"] = timing;
  }
  return j;
}

RateConfig rate_config_from_json(const Json& j) {
  require_object(j, "", {"prior", "sigma", "n_grid", "trials", "seed", "npmle"});
  RateConfig cfg(prior_from_json(field(j, "prior", ""), "prior"));
  if (has(j, "sigma")) cfg.sigma = as_double(j["sigma"], "sigma");
  cfg.n_grid = as_ints(field(j, "n_grid", ""), "n_grid");
  if (has(j, "trials")) cfg.trials = as_int(j["trials"], "trials");
  if (has(j, "seed")) cfg.seed = as_seed(j["seed"], "seed");
  if (has(j, "npmle")) cfg.npmle = npmle_from_json(j["npmle"], "npmle");
  cfg.validate();
  return cfg;
}

Json fit_to_json(const FitReport& fit, const Sample& s, const EMConfig& em) {
  const auto atoms = fit.g_hat.atoms();
  const auto weights = fit.g_hat.weights();
  const bool capped = fit.grid.m == kMaxDefaultGridSize && default_grid_capped(s.size());
  return {{"sigma", s.sigma()},
          {"n", s.size()},
          {"grid",
           {{"lo", fit.grid.lo},
            {"hi", fit.grid.hi},
            {"m", fit.grid.m},
            {"spacing", fit.grid.spacing()},
            {"capped", capped}}},
          {"em", to_json(em)},
          {"atoms", std::vector<double>(atoms.begin(), atoms.end())},
          {"weights", std::vector<double>(weights.begin(), weights.end())},
          {"loglik", fit.loglik_trace.back()},
          {"loglik_trace", fit.loglik_trace},
          {"iterations", fit.iterations_used},
          {"converged", fit.converged},
          {"optimality_gap", fit.optimality_gap},
          {"support_clusters", support_count(fit.g_hat, 1e-8, fit.grid.spacing())}};
}

LoadedFit fit_from_json(const Json& j) {
  if (!j.is_object()) throw ValidationError("fit: expected a JSON object");
  auto atoms = as_doubles(field(j, "atoms", "fit"), "fit.atoms");
  auto weights = as_doubles(field(j, "weights", "fit"), "fit.weights");
  std::optional<double> sigma;
  if (has(j, "sigma")) sigma = as_double(j["sigma"], "fit.sigma");
  try {
    return {MixingDistribution::from_unnormalized(atoms, weights), sigma};
  } catch (const ValidationError& e) {
    throw ValidationError(std::string("fit: ") + e.what());
  }
}

}  // namespace ebcd::harness
