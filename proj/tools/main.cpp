// Command-line front end. Parsing happens here; all real work goes through
// the C API so the CLI exercises the same surface as any other client.

#include <cstdio>
#include <map>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include <mobaudit.h>

namespace {

using OptionMap = std::map<std::string, std::string>;

// Binds a pass-through string option: the value lands in the map under the
// pipeline's key (the long flag name without dashes).
CLI::Option* pass_option(CLI::App* cmd, OptionMap& kv, const std::string& flag,
                         const std::string& key, const std::string& help) {
  return cmd->add_option_function<std::string>(
      flag, [&kv, key](const std::string& value) { kv[key] = value; }, help);
}

CLI::Option* pass_flag(CLI::App* cmd, OptionMap& kv, const std::string& flag,
                       const std::string& key, const std::string& help) {
  return cmd->add_flag_callback(
      flag, [&kv, key]() { kv[key] = "true"; }, help);
}

void add_input_options(CLI::App* cmd, OptionMap& kv) {
  pass_option(cmd, kv, "--data", "data", "Directory holding the standard input files");
  pass_option(cmd, kv, "--traffic", "traffic", "Traffic panel CSV (poi_id,date,visits)");
  pass_option(cmd, kv, "--admin", "admin", "Admin visit records CSV");
  pass_option(cmd, kv, "--crosswalk", "crosswalk", "Precinct-to-location crosswalk CSV");
  pass_option(cmd, kv, "--directory", "directory", "POI directory CSV");
}

void add_linkage_options(CLI::App* cmd, OptionMap& kv) {
  pass_option(cmd, kv, "--threshold", "threshold",
              "Address token distance at or above which a candidate is dropped (default 3)");
  pass_option(cmd, kv, "--exclude-categories", "exclude-categories",
              "Comma-separated POI categories to drop from matching");
}

void add_audit_options(CLI::App* cmd, OptionMap& kv) {
  pass_option(cmd, kv, "--election-date", "election-date", "Focal event date (YYYY-MM-DD)")
      ->required();
  pass_option(cmd, kv, "--exclude-dates", "exclude-dates",
              "Comma-separated dates to drop from the placebo set");
  pass_option(cmd, kv, "--baseline", "baseline", "Baseline method: mean or regression");
  pass_option(cmd, kv, "--window", "window", "Adjacent weekdays per side, 1-4 (default 1)");
  pass_flag(cmd, kv, "--exclude-negative-marginal", "exclude-negative-marginal",
            "Drop POIs whose marginal traffic is negative");
}

void add_out_option(CLI::App* cmd, OptionMap& kv) {
  pass_option(cmd, kv, "--out", "out", "Output directory")->required();
}

int run(const std::string& command, const OptionMap& kv) {
  mobaudit_session* session = mobaudit_session_new();
  if (session == nullptr) {
    std::fprintf(stderr, "error: out of memory\n");
    return 1;
  }
  int rc = 0;
  for (const auto& [key, value] : kv) {
    mobaudit_status st = mobaudit_set_option(session, key.c_str(), value.c_str());
    if (st != MOBAUDIT_OK) {
      std::fprintf(stderr, "error: %s\n", mobaudit_last_error(session));
      mobaudit_session_free(session);
      return static_cast<int>(st);
    }
  }
  mobaudit_status st = mobaudit_run(session, command.c_str());
  if (st != MOBAUDIT_OK) {
    std::fprintf(stderr, "error: %s\n", mobaudit_last_error(session));
    rc = static_cast<int>(st);
  } else {
    nlohmann::json result = nlohmann::json::parse(mobaudit_result_json(session));
    for (const auto& warning : result["warnings"]) {
      std::fprintf(stderr, "warning: %s\n", warning.get<std::string>().c_str());
    }
    std::printf("%s\n", result["summary"].dump(2).c_str());
  }
  mobaudit_session_free(session);
  return rc;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Audit POI mobility panels for demographic coverage bias"};
  app.set_version_flag("--version", std::string(mobaudit_version()));
  app.set_config("--config");
  app.require_subcommand(1);

  OptionMap kv;
  std::string command;

  // synth -----------------------------------------------------------------
  CLI::App* synth = app.add_subcommand("synth", "Generate a synthetic world with ground truth");
  add_out_option(synth, kv);
  pass_option(synth, kv, "--pois", "pois", "Number of POIs (default 558)");
  pass_option(synth, kv, "--days", "days", "Number of panel weekdays (default 45)");
  pass_option(synth, kv, "--election-index", "election-index",
              "0-based weekday index of the election (default 26)");
  pass_option(synth, kv, "--start-date", "start-date", "First panel date (default 2018-10-01)");
  pass_option(synth, kv, "--lambda-min", "lambda-min", "Min baseline Poisson rate");
  pass_option(synth, kv, "--lambda-max", "lambda-max", "Max baseline Poisson rate");
  pass_option(synth, kv, "--turnout-median", "turnout-median", "Median turnout per POI");
  pass_option(synth, kv, "--turnout-sigma", "turnout-sigma", "Lognormal sigma of turnout");
  pass_option(synth, kv, "--age-alpha", "age-alpha", "Beta alpha for proportion over 65");
  pass_option(synth, kv, "--age-beta", "age-beta", "Beta beta for proportion over 65");
  pass_option(synth, kv, "--race-alpha", "race-alpha", "Beta alpha for proportion non-white");
  pass_option(synth, kv, "--race-beta", "race-beta", "Beta beta for proportion non-white");
  pass_option(synth, kv, "--copula-rho", "copula-rho", "Gaussian copula correlation of A and R");
  pass_option(synth, kv, "--capture-base", "capture-base", "Baseline capture rate (default 0.02)");
  pass_option(synth, kv, "--beta-age", "beta-age", "Log-capture slope on proportion over 65");
  pass_option(synth, kv, "--beta-race", "beta-race", "Log-capture slope on proportion non-white");
  pass_option(synth, kv, "--jitter", "jitter", "Day-level lognormal rate jitter sigma");
  pass_option(synth, kv, "--inject", "inject", "Inject election voters into the panel (true/false)");
  pass_option(synth, kv, "--seed", "seed", "Generator seed (default 42)");
  synth->callback([&command]() { command = "synth"; });

  // link ------------------------------------------------------------------
  CLI::App* link = app.add_subcommand("link", "Match precinct locations to POI directory entries");
  add_out_option(link, kv);
  pass_option(link, kv, "--data", "data", "Directory holding the standard input files");
  pass_option(link, kv, "--crosswalk", "crosswalk", "Precinct-to-location crosswalk CSV");
  pass_option(link, kv, "--directory", "directory", "POI directory CSV");
  add_linkage_options(link, kv);
  link->callback([&command]() { command = "link"; });

  // impute ----------------------------------------------------------------
  CLI::App* impute =
      app.add_subcommand("impute", "Cross-validate baseline imputation methods and windows");
  add_out_option(impute, kv);
  pass_option(impute, kv, "--data", "data", "Directory holding the standard input files");
  pass_option(impute, kv, "--traffic", "traffic", "Traffic panel CSV");
  pass_option(impute, kv, "--election-date", "election-date", "Event date to hold out")
      ->required();
  pass_option(impute, kv, "--exclude-dates", "exclude-dates", "Dates to exclude from evaluation");
  pass_option(impute, kv, "--baseline", "baseline", "Evaluate one method only");
  pass_option(impute, kv, "--window", "window", "Evaluate one window only");
  pass_option(impute, kv, "--folds", "folds", "Cross-validation folds (default 10)");
  pass_option(impute, kv, "--repeats", "repeats", "Cross-validation repeats (default 3)");
  pass_option(impute, kv, "--seed", "seed", "Fold-shuffle seed (default 42)");
  impute->callback([&command]() { command = "impute"; });

  // audit -----------------------------------------------------------------
  CLI::App* audit = app.add_subcommand("audit", "Placebo audits of the panel's coverage");
  audit->require_subcommand(1);

  CLI::App* measurement = audit->add_subcommand(
      "measurement", "Does marginal traffic track ground-truth visits at all?");
  CLI::App* disparate = audit->add_subcommand(
      "disparate", "Does coverage correlate with demographic composition?");
  CLI::App* joint =
      audit->add_subcommand("joint", "Age and race coverage effects, estimated jointly");
  CLI::App* interaction =
      audit->add_subcommand("interaction", "Interacted coverage regression on the event day");
  for (CLI::App* cmd : {measurement, disparate, joint, interaction}) {
    add_out_option(cmd, kv);
    add_input_options(cmd, kv);
    add_audit_options(cmd, kv);
    add_linkage_options(cmd, kv);
  }
  pass_option(disparate, kv, "--demographic", "demographic",
              "Demographic to test: age, race, or joint (default age)");
  measurement->callback([&command]() { command = "audit:measurement"; });
  disparate->callback([&command]() { command = "audit:disparate"; });
  joint->callback([&command]() { command = "audit:joint"; });
  interaction->callback([&command]() { command = "audit:interaction"; });

  // policy ----------------------------------------------------------------
  CLI::App* policy = app.add_subcommand("policy", "Policy-distortion analyses");
  policy->require_subcommand(1);
  CLI::App* rank =
      policy->add_subcommand("rank", "Regress ground-truth site ranks on panel ranks");
  CLI::App* allocate = policy->add_subcommand(
      "allocate", "Compare panel-derived and ground-truth resource shares");
  for (CLI::App* cmd : {rank, allocate}) {
    add_out_option(cmd, kv);
    add_input_options(cmd, kv);
    add_audit_options(cmd, kv);
    add_linkage_options(cmd, kv);
  }
  pass_option(allocate, kv, "--bootstrap", "bootstrap", "Bootstrap resamples (default 1000)");
  pass_option(allocate, kv, "--seed", "seed", "Bootstrap seed (default 42)");
  rank->callback([&command]() { command = "policy:rank"; });
  allocate->callback([&command]() { command = "policy:allocate"; });

  // report ----------------------------------------------------------------
  CLI::App* report =
      app.add_subcommand("report", "Binned coverage summaries and headline correlations");
  add_out_option(report, kv);
  add_input_options(report, kv);
  add_audit_options(report, kv);
  add_linkage_options(report, kv);
  report->callback([&command]() { command = "report"; });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  return run(command, kv);
}
