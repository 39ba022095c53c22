#include "mobaudit/pipeline.hpp"

#include <algorithm>
#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <set>

#include "mobaudit/audit.hpp"
#include "mobaudit/baseline.hpp"
#include "mobaudit/csv.hpp"
#include "mobaudit/ingest.hpp"
#include "mobaudit/linkage.hpp"
#include "mobaudit/policy.hpp"
#include "mobaudit/stats.hpp"
#include "mobaudit/synth.hpp"

#ifndef MOBAUDIT_VERSION
#define MOBAUDIT_VERSION "0.0.0"
#endif

namespace mobaudit {

namespace {

using nlohmann::json;
namespace fs = std::filesystem;

const std::set<std::string>& allowed_keys() {
  static const std::set<std::string> keys = {
      // common
      "out", "data", "traffic", "admin", "crosswalk", "directory", "election-date",
      "exclude-dates", "baseline", "window", "demographic", "exclude-categories",
      "exclude-negative-marginal", "bootstrap", "seed", "threshold", "folds", "repeats",
      // synthetic scenarios
      "pois", "days", "election-index", "start-date", "lambda-min", "lambda-max",
      "turnout-median", "turnout-sigma", "age-alpha", "age-beta", "race-alpha", "race-beta",
      "copula-rho", "capture-base", "beta-age", "beta-race", "jitter", "inject",
  };
  return keys;
}

class Options {
 public:
  explicit Options(const std::map<std::string, std::string>& kv) : kv_(kv) {
    for (const auto& [key, value] : kv_) {
      if (allowed_keys().count(key) == 0) {
        throw ValidationError("unknown option '" + key + "'");
      }
      (void)value;
    }
  }

  const std::map<std::string, std::string>& raw() const { return kv_; }

  bool has(const std::string& key) const { return kv_.count(key) != 0; }

  std::string get(const std::string& key, const std::string& fallback = "") const {
    auto it = kv_.find(key);
    return it == kv_.end() ? fallback : it->second;
  }

  std::string require(const std::string& key) const {
    auto it = kv_.find(key);
    if (it == kv_.end() || it->second.empty()) {
      throw ValidationError("missing required option '" + key + "'");
    }
    return it->second;
  }

  std::int64_t get_int(const std::string& key, std::int64_t fallback) const {
    auto it = kv_.find(key);
    if (it == kv_.end()) return fallback;
    auto value = parse_int(it->second);
    if (!value) {
      throw ValidationError("option '" + key + "' is not an integer: '" + it->second + "'");
    }
    return *value;
  }

  double get_real(const std::string& key, double fallback) const {
    auto it = kv_.find(key);
    if (it == kv_.end()) return fallback;
    auto value = parse_real(it->second);
    if (!value) {
      throw ValidationError("option '" + key + "' is not a number: '" + it->second + "'");
    }
    return *value;
  }

  bool get_bool(const std::string& key, bool fallback) const {
    auto it = kv_.find(key);
    if (it == kv_.end()) return fallback;
    const std::string& v = it->second;
    if (v == "true" || v == "1" || v == "yes") return true;
    if (v == "false" || v == "0" || v == "no") return false;
    throw ValidationError("option '" + key + "' is not a boolean: '" + v + "'");
  }

  Date get_date(const std::string& key) const { return Date::parse(require(key)); }

  std::set<Date> get_date_set(const std::string& key) const {
    std::set<Date> out;
    for (const std::string& token : split_list(get(key))) out.insert(Date::parse(token));
    return out;
  }

  static std::vector<std::string> split_list(const std::string& value) {
    std::vector<std::string> out;
    std::string current;
    for (char c : value) {
      if (c == ',') {
        if (!current.empty()) out.push_back(current);
        current.clear();
      } else if (c != ' ') {
        current.push_back(c);
      }
    }
    if (!current.empty()) out.push_back(current);
    return out;
  }

 private:
  std::map<std::string, std::string> kv_;
};

// Collects output files and their checksums for the manifest.
class OutputWriter {
 public:
  explicit OutputWriter(const std::string& dir) : dir_(dir) {
    if (dir.empty()) throw ValidationError("missing required option 'out'");
    std::error_code ec;
    fs::create_directories(dir_, ec);
    if (ec) throw ValidationError("cannot create output directory '" + dir + "': " + ec.message());
  }

  void write(const std::string& name, const std::string& content) {
    write_file((dir_ / name).string(), content);
    checksums_[name] = fnv1a_hex(content);
  }

  const fs::path& dir() const { return dir_; }
  const std::map<std::string, std::string>& checksums() const { return checksums_; }

 private:
  fs::path dir_;
  std::map<std::string, std::string> checksums_;
};

std::string iso_timestamp() {
  std::time_t t = 0;
  if (const char* epoch = std::getenv("SOURCE_DATE_EPOCH")) {
    t = static_cast<std::time_t>(std::strtoll(epoch, nullptr, 10));
  } else {
    t = std::time(nullptr);
  }
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

void write_manifest(OutputWriter& writer, const std::string& command, const Options& options,
                    const std::map<std::string, std::string>& input_checksums) {
  json manifest;
  manifest["tool"] = "mobaudit";
  manifest["version"] = MOBAUDIT_VERSION;
  manifest["command"] = command;
  manifest["options"] = options.raw();
  manifest["inputs"] = input_checksums;
  manifest["outputs"] = writer.checksums();
  manifest["generated_at"] = iso_timestamp();
  write_file((writer.dir() / "manifest.json").string(), manifest.dump(2) + "\n");
}

// ---------------------------------------------------------------------------
// input resolution and shared loading

struct InputPaths {
  std::string traffic;
  std::string admin;
  std::string crosswalk;
  std::string directory;
};

std::string resolve_one(const Options& o, const std::string& key, const std::string& data_name,
                        bool required) {
  if (o.has(key)) return o.get(key);
  if (o.has("data")) return (fs::path(o.get("data")) / data_name).string();
  if (required) {
    throw ValidationError("missing input: provide --" + key + " or --data");
  }
  return "";
}

PoiCategory strict_category(const std::string& token) {
  static const std::set<std::string> valid = {"school", "fire-station", "church",
                                              "community-center", "other"};
  if (valid.count(token) == 0) {
    throw ValidationError("unknown POI category '" + token + "'");
  }
  return parse_category(token);
}

MatchOptions match_options(const Options& o) {
  MatchOptions mo;
  mo.token_threshold = static_cast<int>(o.get_int("threshold", 3));
  for (const std::string& token : Options::split_list(o.get("exclude-categories"))) {
    mo.excluded_categories.push_back(strict_category(token));
  }
  return mo;
}

std::string checksum_of(const std::string& path) { return fnv1a_hex(read_file(path)); }

// Everything the audit and policy commands share: the dense panel, the
// linked admin profiles aligned to the panel, and the placebo configuration.
struct AuditInputs {
  TrafficPanel panel;
  MatchResult match;
  SummarizedProfiles profiles;
  AuditFrame frame;
  Date election;
  std::set<Date> excluded;
  AuditConfig config;
  std::size_t n_records = 0;
  std::size_t off_date_records = 0;
  std::map<std::string, std::string> input_checksums;
};

AuditInputs load_audit_inputs(const Options& o, OutputWriter& writer,
                              std::vector<std::string>& warnings, bool need_placebo_days) {
  InputPaths paths;
  paths.traffic = resolve_one(o, "traffic", "traffic.csv", true);
  paths.admin = resolve_one(o, "admin", "admin_visits.csv", true);
  paths.crosswalk = resolve_one(o, "crosswalk", "crosswalk.csv", true);
  paths.directory = resolve_one(o, "directory", "poi_directory.csv", true);

  AuditInputs in;
  in.input_checksums[paths.traffic] = checksum_of(paths.traffic);
  in.input_checksums[paths.admin] = checksum_of(paths.admin);
  in.input_checksums[paths.crosswalk] = checksum_of(paths.crosswalk);
  in.input_checksums[paths.directory] = checksum_of(paths.directory);

  in.panel = load_traffic_panel(paths.traffic);
  AdminLoadResult admin = load_admin_records(paths.admin);
  CrosswalkLoadResult crosswalk = load_crosswalk(paths.crosswalk);
  DirectoryLoadResult directory = load_poi_directory(paths.directory);

  for (const auto& w : admin.warnings) warnings.push_back(w);
  if (!admin.rejects.empty()) {
    writer.write("admin_rejects.csv", render_rejects_csv(admin.rejects));
    warnings.push_back(std::to_string(admin.rejects.size()) +
                       " admin rows rejected (see admin_rejects.csv)");
  }
  if (!crosswalk.rejects.empty()) {
    writer.write("crosswalk_rejects.csv", render_rejects_csv(crosswalk.rejects));
    warnings.push_back(std::to_string(crosswalk.rejects.size()) +
                       " crosswalk rows rejected (see crosswalk_rejects.csv)");
  }
  if (!directory.rejects.empty()) {
    writer.write("directory_rejects.csv", render_rejects_csv(directory.rejects));
    warnings.push_back(std::to_string(directory.rejects.size()) +
                       " directory rows rejected (see directory_rejects.csv)");
  }

  in.match = match_pois(crosswalk.entries, directory.directory, match_options(o));
  in.election = o.get_date("election-date");
  in.excluded = o.get_date_set("exclude-dates");
  if (in.excluded.count(in.election) != 0) {
    throw ValidationError("election date " + in.election.to_string() + " is excluded");
  }

  std::vector<AdminVisitRecord> focal_records;
  focal_records.reserve(admin.records.size());
  for (auto& rec : admin.records) {
    if (rec.date == in.election) {
      focal_records.push_back(std::move(rec));
    } else {
      in.off_date_records += 1;
    }
  }
  if (in.off_date_records > 0) {
    warnings.push_back(std::to_string(in.off_date_records) +
                       " admin records are not on the focal date and were ignored");
  }
  in.n_records = focal_records.size();

  in.profiles = summarize_profiles(focal_records, in.match.resolved.resolver(), in.election);
  if (in.profiles.unmatched_records > 0) {
    warnings.push_back(std::to_string(in.profiles.unmatched_records) +
                       " admin records fell in precincts with no resolved POI");
  }
  in.frame = align_profiles(in.panel, in.profiles.profiles);
  if (in.frame.pois.size() < in.profiles.profiles.size()) {
    warnings.push_back(std::to_string(in.profiles.profiles.size() - in.frame.pois.size()) +
                       " profiled POIs are absent from the traffic panel");
  }

  in.config.election_date = in.election;
  in.config.method = parse_method(o.get("baseline", "mean"));
  in.config.window = static_cast<int>(o.get_int("window", 1));
  in.config.exclude_negative_marginal = o.get_bool("exclude-negative-marginal", false);
  if (need_placebo_days) {
    in.config.placebo_days =
        make_placebo_days(in.panel, in.election, in.config.window, in.excluded);
  } else {
    in.config.placebo_days = {in.election};
  }
  return in;
}

json baseline_json(const AuditConfig& config) {
  return json{{"method", to_string(config.method)}, {"window", config.window}};
}

json placebo_json(const PlaceboResult& r) {
  return json{{"name", r.statistic_name},
              {"focal_value", r.focal_value},
              {"p_value", r.p_value},
              {"n_placebo", r.n()},
              {"direction", r.direction == TailDirection::kLowerTail ? "lower" : "upper"}};
}

json fit_json(const std::string& name, const RegressionFit& fit) {
  json terms = json::array();
  for (std::size_t i = 0; i < fit.names.size(); ++i) {
    terms.push_back({{"term", fit.names[i]},
                     {"coefficient", fit.coefficients[i]},
                     {"std_error", fit.std_errors[i]},
                     {"p_value", fit.p_values[i]}});
  }
  return json{{"name", name},
              {"terms", terms},
              {"r_squared", fit.r_squared},
              {"n", fit.n_obs}};
}

// Focal-day coverage frame for the regression/report/policy commands.
struct FocalSlice {
  std::vector<PoiId> pois;
  std::vector<double> marginal;
  std::vector<double> turnout;
  std::vector<double> age;       // proportions in [0, 1]
  std::vector<double> race;
  std::vector<double> age_pct;   // percentage points
  std::vector<double> race_pct;
  CoverageVector cov;
};

FocalSlice focal_slice(const AuditInputs& in) {
  DayMarginal dm = day_marginal(in.panel, in.frame, in.config, in.election);
  FocalSlice fs;
  for (std::size_t k = 0; k < dm.kept.size(); ++k) {
    std::size_t i = dm.kept[k];
    fs.pois.push_back(in.frame.pois[i]);
    fs.marginal.push_back(dm.marginal[k]);
    fs.turnout.push_back(in.frame.turnout[i]);
    fs.age.push_back(in.frame.prop_over_65[i]);
    fs.race.push_back(in.frame.prop_non_white[i]);
    fs.age_pct.push_back(in.frame.prop_over_65[i] * 100.0);
    fs.race_pct.push_back(in.frame.prop_non_white[i] * 100.0);
  }
  fs.cov = coverage(fs.pois, fs.marginal, fs.turnout);
  return fs;
}

json audit_report_base(const std::string& command, const AuditInputs& in,
                       const std::vector<std::string>& warnings) {
  json report;
  report["command"] = command;
  report["election_date"] = in.election.to_string();
  report["baseline"] = baseline_json(in.config);
  report["exclude_negative_marginal"] = in.config.exclude_negative_marginal;
  report["n_pois_audited"] = in.frame.pois.size();
  report["n_records"] = in.n_records;
  report["unmatched_records"] = in.profiles.unmatched_records;
  report["warnings"] = warnings;
  return report;
}

// ---------------------------------------------------------------------------
// command handlers

RunOutcome run_synth(const Options& o, OutputWriter& writer) {
  ScenarioSpec spec;
  spec.n_pois = static_cast<std::size_t>(o.get_int("pois", 558));
  spec.n_days = static_cast<std::size_t>(o.get_int("days", 45));
  spec.election_index = static_cast<std::size_t>(o.get_int("election-index", 26));
  if (o.has("start-date")) spec.start_date = Date::parse(o.get("start-date"));
  spec.lambda_min = o.get_real("lambda-min", spec.lambda_min);
  spec.lambda_max = o.get_real("lambda-max", spec.lambda_max);
  spec.turnout_median = o.get_real("turnout-median", spec.turnout_median);
  spec.turnout_sigma = o.get_real("turnout-sigma", spec.turnout_sigma);
  spec.age_alpha = o.get_real("age-alpha", spec.age_alpha);
  spec.age_beta = o.get_real("age-beta", spec.age_beta);
  spec.race_alpha = o.get_real("race-alpha", spec.race_alpha);
  spec.race_beta = o.get_real("race-beta", spec.race_beta);
  spec.copula_rho = o.get_real("copula-rho", spec.copula_rho);
  spec.capture_base = o.get_real("capture-base", spec.capture_base);
  spec.capture_beta_age = o.get_real("beta-age", spec.capture_beta_age);
  spec.capture_beta_race = o.get_real("beta-race", spec.capture_beta_race);
  spec.jitter_sigma = o.get_real("jitter", spec.jitter_sigma);
  spec.inject_election_voters = o.get_bool("inject", true);
  spec.seed = static_cast<std::uint64_t>(o.get_int("seed", 42));

  SyntheticWorld world = generate(spec);
  writer.write("traffic.csv", render_traffic_csv(world.panel));
  writer.write("admin_visits.csv", render_admin_csv(world.records));
  writer.write("crosswalk.csv", render_crosswalk_csv(world.crosswalk));
  writer.write("poi_directory.csv", render_directory_csv(world.directory));
  writer.write("ground_truth.csv", render_ground_truth_csv(world));

  RunOutcome out;
  out.summary = {{"command", "synth"},
                 {"n_pois", spec.n_pois},
                 {"n_days", spec.n_days},
                 {"election_date", world.election_date.to_string()},
                 {"n_records", world.records.size()},
                 {"seed", spec.seed}};
  return out;
}

RunOutcome run_link(const Options& o, OutputWriter& writer) {
  std::string crosswalk_path = resolve_one(o, "crosswalk", "crosswalk.csv", true);
  std::string directory_path = resolve_one(o, "directory", "poi_directory.csv", true);

  RunOutcome out;
  std::map<std::string, std::string> inputs;
  inputs[crosswalk_path] = checksum_of(crosswalk_path);
  inputs[directory_path] = checksum_of(directory_path);

  CrosswalkLoadResult crosswalk = load_crosswalk(crosswalk_path);
  DirectoryLoadResult directory = load_poi_directory(directory_path);
  if (!crosswalk.rejects.empty()) {
    writer.write("crosswalk_rejects.csv", render_rejects_csv(crosswalk.rejects));
    out.warnings.push_back(std::to_string(crosswalk.rejects.size()) +
                           " crosswalk rows rejected (see crosswalk_rejects.csv)");
  }
  if (!directory.rejects.empty()) {
    writer.write("directory_rejects.csv", render_rejects_csv(directory.rejects));
    out.warnings.push_back(std::to_string(directory.rejects.size()) +
                           " directory rows rejected (see directory_rejects.csv)");
  }

  MatchResult match = match_pois(crosswalk.entries, directory.directory, match_options(o));
  writer.write("resolved_crosswalk.csv", render_resolved_csv(match.resolved));
  writer.write("linkage_funnel.csv", render_funnel_csv(match.funnel));

  json funnel = json::array();
  for (std::size_t i = 0; i < match.funnel.stages.size(); ++i) {
    funnel.push_back({{"stage", match.funnel.stages[i]},
                      {"count", match.funnel.counts[i]},
                      {"rate", match.funnel.rates[i]}});
  }
  out.summary = {{"command", "link"},
                 {"matched", match.resolved.pairs.size()},
                 {"funnel", funnel}};
  write_manifest(writer, "link", o, inputs);
  return out;
}

RunOutcome run_impute(const Options& o, OutputWriter& writer) {
  std::string traffic_path = resolve_one(o, "traffic", "traffic.csv", true);
  std::map<std::string, std::string> inputs;
  inputs[traffic_path] = checksum_of(traffic_path);

  TrafficPanel panel = load_traffic_panel(traffic_path);
  Date election = o.get_date("election-date");
  std::set<Date> excluded = o.get_date_set("exclude-dates");

  std::vector<ImputationMethod> methods = {ImputationMethod::kMean,
                                           ImputationMethod::kRegression};
  if (o.has("baseline")) methods = {parse_method(o.get("baseline"))};
  std::vector<int> windows = {1, 2, 3, 4};
  if (o.has("window")) windows = {static_cast<int>(o.get_int("window", 1))};

  int max_window = *std::max_element(windows.begin(), windows.end());
  std::set<Date> barred = excluded;
  barred.insert(election);

  // Evaluation cells: ordinary weekdays whose adjacency window at the widest
  // setting avoids the event day, so every method/window row scores the same
  // points.
  std::vector<Date> eval_days;
  for (Date d : panel.days) {
    if (d.is_weekend() || d == election || excluded.count(d) != 0) continue;
    if (!has_adjacency_window(panel, d, max_window, barred)) continue;
    eval_days.push_back(d);
  }
  if (eval_days.empty()) {
    throw ValidationError("no evaluation days with a full adjacency window at window " +
                          std::to_string(max_window));
  }

  int folds = static_cast<int>(o.get_int("folds", 10));
  int repeats = static_cast<int>(o.get_int("repeats", 3));
  std::uint64_t seed = static_cast<std::uint64_t>(o.get_int("seed", 42));

  std::vector<ImputationMetrics> rows;
  for (ImputationMethod method : methods) {
    for (int window : windows) {
      rows.push_back(
          evaluate_imputation(panel, method, window, eval_days, folds, repeats, seed, barred));
    }
  }
  writer.write("imputation_eval.csv", render_imputation_csv(rows));

  const ImputationMetrics* best = &rows.front();
  for (const auto& r : rows) {
    if (r.rmse < best->rmse) best = &r;
  }

  json rows_json = json::array();
  for (const auto& r : rows) {
    rows_json.push_back({{"method", r.method},
                         {"window", r.window},
                         {"rmse", r.rmse},
                         {"r2", r.r2},
                         {"mae", r.mae},
                         {"n_points", r.n_points}});
  }
  RunOutcome out;
  out.summary = {{"command", "impute"},
                 {"n_eval_days", eval_days.size()},
                 {"rows", rows_json},
                 {"best", {{"method", best->method}, {"window", best->window},
                           {"rmse", best->rmse}}}};
  write_manifest(writer, "impute", o, inputs);
  return out;
}

RunOutcome run_audit_measurement(const Options& o, OutputWriter& writer) {
  RunOutcome out;
  AuditInputs in = load_audit_inputs(o, writer, out.warnings, true);
  PlaceboRun run = placebo_measurement(in.panel, in.frame, in.config);
  for (const auto& w : run.warnings) out.warnings.push_back(w);

  writer.write("placebo_distribution.csv", render_placebo_csv(run.result));
  json report = audit_report_base("audit:measurement", in, out.warnings);
  report["statistics"] = json::array({placebo_json(run.result)});
  writer.write("audit_report.json", report.dump(2) + "\n");
  out.summary = report;
  write_manifest(writer, "audit:measurement", o, in.input_checksums);
  return out;
}

RunOutcome run_audit_disparate(const Options& o, OutputWriter& writer) {
  RunOutcome out;
  AuditInputs in = load_audit_inputs(o, writer, out.warnings, true);
  Demographic demographic = parse_demographic(o.get("demographic", "age"));
  PlaceboRun run = placebo_disparate(in.panel, in.frame, in.config, demographic);
  for (const auto& w : run.warnings) out.warnings.push_back(w);

  writer.write("placebo_distribution.csv", render_placebo_csv(run.result));
  json report = audit_report_base("audit:disparate", in, out.warnings);
  report["demographic"] = to_string(demographic);
  report["statistics"] = json::array({placebo_json(run.result)});
  writer.write("audit_report.json", report.dump(2) + "\n");
  out.summary = report;
  write_manifest(writer, "audit:disparate", o, in.input_checksums);
  return out;
}

RunOutcome run_audit_joint(const Options& o, OutputWriter& writer) {
  RunOutcome out;
  AuditInputs in = load_audit_inputs(o, writer, out.warnings, true);
  JointPlaceboRun run = placebo_joint(in.panel, in.frame, in.config);
  for (const auto& w : run.warnings) out.warnings.push_back(w);

  writer.write("placebo_distribution_age.csv", render_placebo_csv(run.age));
  writer.write("placebo_distribution_race.csv", render_placebo_csv(run.race));
  json report = audit_report_base("audit:joint", in, out.warnings);
  report["statistics"] = json::array({placebo_json(run.age), placebo_json(run.race)});
  writer.write("audit_report.json", report.dump(2) + "\n");
  out.summary = report;
  write_manifest(writer, "audit:joint", o, in.input_checksums);
  return out;
}

RunOutcome run_audit_interaction(const Options& o, OutputWriter& writer) {
  RunOutcome out;
  AuditInputs in = load_audit_inputs(o, writer, out.warnings, false);
  FocalSlice fs = focal_slice(in);
  InteractionModels models = interaction_regression(fs.cov, fs.age_pct, fs.race_pct);

  json report = audit_report_base("audit:interaction", in, out.warnings);
  report["models"] = json::array({fit_json("age_only", models.age_only),
                                  fit_json("additive", models.additive),
                                  fit_json("interacted", models.interacted)});
  writer.write("audit_report.json", report.dump(2) + "\n");
  out.summary = report;
  write_manifest(writer, "audit:interaction", o, in.input_checksums);
  return out;
}

RunOutcome run_policy_rank(const Options& o, OutputWriter& writer) {
  RunOutcome out;
  AuditInputs in = load_audit_inputs(o, writer, out.warnings, false);
  FocalSlice fs = focal_slice(in);
  RegressionFit fit = rank_regression(fs.turnout, fs.marginal, fs.age_pct, fs.race_pct);
  writer.write("rank_regression.csv", render_rank_regression_csv(fit));

  out.summary = {{"command", "policy:rank"},
                 {"election_date", in.election.to_string()},
                 {"baseline", baseline_json(in.config)},
                 {"n_pois", fs.pois.size()},
                 {"fit", fit_json("rank_regression", fit)},
                 {"warnings", out.warnings}};
  write_manifest(writer, "policy:rank", o, in.input_checksums);
  return out;
}

RunOutcome run_policy_allocate(const Options& o, OutputWriter& writer) {
  RunOutcome out;
  AuditInputs in = load_audit_inputs(o, writer, out.warnings, false);
  FocalSlice fs = focal_slice(in);
  int n_resamples = static_cast<int>(o.get_int("bootstrap", 1000));
  std::uint64_t seed = static_cast<std::uint64_t>(o.get_int("seed", 42));
  AllocationComparison comparison =
      compare_allocations(fs.marginal, fs.turnout, fs.age, fs.race, n_resamples, seed);
  writer.write("allocation.csv", render_allocation_csv(comparison));

  json groups = json::array();
  for (const auto& g : comparison.groups) {
    groups.push_back({{"group", g.group},
                      {"observed_share", g.observed_share},
                      {"optimal_share", g.optimal_share},
                      {"observed_se", g.observed_se},
                      {"optimal_se", g.optimal_se},
                      {"diff_se", g.diff_se},
                      {"percent_difference", g.percent_difference},
                      {"significant", g.significant}});
  }
  out.summary = {{"command", "policy:allocate"},
                 {"election_date", in.election.to_string()},
                 {"baseline", baseline_json(in.config)},
                 {"n_pois", fs.pois.size()},
                 {"bootstrap", n_resamples},
                 {"seed", seed},
                 {"groups", groups},
                 {"warnings", out.warnings}};
  write_manifest(writer, "policy:allocate", o, in.input_checksums);
  return out;
}

RunOutcome run_report(const Options& o, OutputWriter& writer) {
  RunOutcome out;
  AuditInputs in = load_audit_inputs(o, writer, out.warnings, false);
  FocalSlice fs = focal_slice(in);

  std::vector<BinSummaryRow> rows;
  for (BinScheme scheme : {BinScheme::kVentileAge, BinScheme::kVentileRace,
                           BinScheme::kQuartileGrid, BinScheme::kMedianSplit}) {
    std::vector<BinSummaryRow> part = bin_summaries(fs.cov, fs.age_pct, fs.race_pct, scheme);
    rows.insert(rows.end(), part.begin(), part.end());
  }
  writer.write("figure_bins.csv", render_bins_csv(rows));

  SpearmanResult measurement = measurement_signal(fs.marginal, fs.turnout);
  SpearmanResult age = preliminary_disparity(fs.cov, fs.age);
  SpearmanResult race = preliminary_disparity(fs.cov, fs.race);

  json summary = {
      {"command", "report"},
      {"election_date", in.election.to_string()},
      {"baseline", baseline_json(in.config)},
      {"n_pois", fs.pois.size()},
      {"measurement", {{"rho", measurement.rho}, {"p_value", measurement.p_value}}},
      {"disparity_age", {{"rho", age.rho}, {"p_value", age.p_value}}},
      {"disparity_race", {{"rho", race.rho}, {"p_value", race.p_value}}},
      {"warnings", out.warnings}};
  writer.write("report_summary.json", summary.dump(2) + "\n");
  out.summary = summary;
  write_manifest(writer, "report", o, in.input_checksums);
  return out;
}

}  // namespace

const std::vector<std::string>& known_option_keys() {
  static const std::vector<std::string> keys(allowed_keys().begin(), allowed_keys().end());
  return keys;
}

RunOutcome run_command(const std::string& command,
                       const std::map<std::string, std::string>& options) {
  Options o(options);
  OutputWriter writer(o.require("out"));

  if (command == "synth") {
    RunOutcome out = run_synth(o, writer);
    write_manifest(writer, command, o, {});
    return out;
  }
  if (command == "link") return run_link(o, writer);
  if (command == "impute") return run_impute(o, writer);
  if (command == "audit:measurement") return run_audit_measurement(o, writer);
  if (command == "audit:disparate") {
    if (o.get("demographic") == "joint") return run_audit_joint(o, writer);
    return run_audit_disparate(o, writer);
  }
  if (command == "audit:joint") return run_audit_joint(o, writer);
  if (command == "audit:interaction") return run_audit_interaction(o, writer);
  if (command == "policy:rank") return run_policy_rank(o, writer);
  if (command == "policy:allocate") return run_policy_allocate(o, writer);
  if (command == "report") return run_report(o, writer);
  throw ValidationError("unknown command '" + command + "'");
}

}  // namespace mobaudit
