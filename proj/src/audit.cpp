#include "mobaudit/audit.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>

#include "mobaudit/csv.hpp"

namespace mobaudit {

namespace {

bool is_constant(const std::vector<double>& x) {
  for (double v : x) {
    if (v != x.front()) return false;
  }
  return true;
}

std::vector<double> take(const std::vector<double>& x, const std::vector<std::size_t>& idx) {
  std::vector<double> out;
  out.reserve(idx.size());
  for (std::size_t i : idx) out.push_back(x[i]);
  return out;
}

// Tail count over the placebo values. With include_focal the focal day is a
// member of its own comparison set, so the p-value cannot fall below 1/n.
double tail_p(const std::vector<PlaceboDayValue>& values, double focal, TailDirection direction,
              bool include_focal) {
  std::size_t in_tail = 0, total = 0;
  for (const auto& v : values) {
    if (v.is_focal && !include_focal) continue;
    total += 1;
    bool hit = (direction == TailDirection::kLowerTail) ? (v.value <= focal) : (v.value >= focal);
    if (hit) in_tail += 1;
  }
  if (total == 0) {
    throw NumericError("placebo set is empty after exclusions");
  }
  return static_cast<double>(in_tail) / static_cast<double>(total);
}

// Baseline for one day under the audit configuration. The focal day (and
// any other barred dates) never contribute features or training targets.
BaselineEstimate day_baseline(const TrafficPanel& panel, Date day, const AuditConfig& config) {
  std::set<Date> excluded = config.baseline_excluded;
  excluded.insert(config.election_date);
  if (config.method == ImputationMethod::kMean) {
    return mean_baseline(panel, day, config.window, excluded);
  }
  std::set<Date> train_excluded = excluded;
  train_excluded.insert(day);
  std::vector<Date> training;
  for (Date d : panel.days) {
    if (d == day || train_excluded.count(d) != 0 || d.is_weekend()) continue;
    if (has_adjacency_window(panel, d, config.window, train_excluded)) training.push_back(d);
  }
  return regression_baseline(panel, day, config.window, training, excluded);
}

}  // namespace

DayMarginal day_marginal(const TrafficPanel& panel, const AuditFrame& frame,
                         const AuditConfig& config, Date day) {
  if (!panel.day_index(day)) {
    throw ValidationError("day " + day.to_string() + " not in panel");
  }
  BaselineEstimate baseline = day_baseline(panel, day, config);
  std::size_t day_idx = *panel.day_index(day);
  DayMarginal slice;
  slice.day = day;
  for (std::size_t i = 0; i < frame.rows.size(); ++i) {
    std::size_t row = frame.rows[i];
    double m = static_cast<double>(panel.count(row, day_idx)) - baseline.values[row];
    if (config.exclude_negative_marginal && m < 0.0) continue;
    slice.kept.push_back(i);
    slice.marginal.push_back(m);
  }
  return slice;
}

namespace {

void check_config(const TrafficPanel& panel, const AuditConfig& config) {
  if (!panel.day_index(config.election_date)) {
    throw ValidationError("focal day " + config.election_date.to_string() + " not in panel");
  }
  if (config.placebo_days.empty()) {
    throw ValidationError("placebo set is empty");
  }
  bool has_focal = false;
  for (Date d : config.placebo_days) {
    if (d == config.election_date) has_focal = true;
    if (!panel.day_index(d)) {
      throw ValidationError("placebo day " + d.to_string() + " not in panel");
    }
  }
  if (!has_focal) {
    throw ValidationError("placebo set does not contain the focal day");
  }
}

// Shared placebo loop: runs `statistic` on every placebo day, skipping
// degenerate days with a warning unless the degenerate day is focal.
PlaceboResult run_placebo(const TrafficPanel& panel, const AuditFrame& frame,
                          const AuditConfig& config, const std::string& name,
                          TailDirection direction,
                          const std::function<double(const DayMarginal&)>& statistic,
                          std::vector<std::string>* warnings) {
  PlaceboResult result;
  result.focal_day = config.election_date;
  result.statistic_name = name;
  result.direction = direction;

  bool focal_seen = false;
  for (Date day : config.placebo_days) {
    DayMarginal slice = day_marginal(panel, frame, config, day);
    bool focal = (day == config.election_date);
    double value = 0.0;
    try {
      if (slice.kept.size() < 3) {
        throw NumericError("fewer than 3 POIs remain");
      }
      value = statistic(slice);
    } catch (const NumericError& e) {
      if (focal) {
        throw NumericError("focal day " + day.to_string() + " is degenerate: " + e.what());
      }
      warnings->push_back("placebo day " + day.to_string() + " dropped: " + e.what());
      continue;
    }
    result.placebo_values.push_back({day, value, focal});
    if (focal) {
      result.focal_value = value;
      focal_seen = true;
    }
  }
  if (!focal_seen) {
    throw ValidationError("placebo set does not contain the focal day");
  }
  result.p_value =
      tail_p(result.placebo_values, result.focal_value, direction, config.include_focal_in_count);
  return result;
}

}  // namespace

Demographic parse_demographic(const std::string& token) {
  if (token == "age") return Demographic::kAge;
  if (token == "race") return Demographic::kRace;
  throw ValidationError("unknown demographic '" + token + "' (expected age or race)");
}

std::string to_string(Demographic d) {
  return d == Demographic::kAge ? "age" : "race";
}

CoverageVector coverage(const std::vector<PoiId>& pois, const std::vector<double>& numerator,
                        const std::vector<double>& denominator) {
  if (pois.size() != numerator.size() || pois.size() != denominator.size()) {
    throw ValidationError("coverage inputs have mismatched lengths");
  }
  CoverageVector out;
  out.pois = pois;
  out.values.resize(pois.size());
  for (std::size_t i = 0; i < pois.size(); ++i) {
    if (denominator[i] <= 0.0) {
      throw ValidationError("non-positive coverage denominator for POI " + pois[i]);
    }
    out.values[i] = numerator[i] / denominator[i];
  }
  return out;
}

AuditFrame align_profiles(const TrafficPanel& panel, const std::vector<PoiProfile>& profiles) {
  std::map<std::size_t, const PoiProfile*> by_row;
  for (const auto& profile : profiles) {
    auto row = panel.poi_index(profile.poi_id);
    if (row) by_row.emplace(*row, &profile);
  }
  if (by_row.size() < 3) {
    throw ValidationError("only " + std::to_string(by_row.size()) +
                          " profiled POIs appear in the panel; need at least 3");
  }
  AuditFrame frame;
  for (const auto& [row, profile] : by_row) {
    frame.rows.push_back(row);
    frame.pois.push_back(profile->poi_id);
    frame.turnout.push_back(static_cast<double>(profile->turnout));
    frame.prop_over_65.push_back(profile->prop_over_65);
    frame.prop_non_white.push_back(profile->prop_non_white);
  }
  return frame;
}

std::vector<Date> make_placebo_days(const TrafficPanel& panel, Date election_date, int window,
                                    const std::set<Date>& excluded_dates) {
  if (!panel.day_index(election_date)) {
    throw ValidationError("focal day " + election_date.to_string() + " not in panel");
  }
  if (excluded_dates.count(election_date) != 0) {
    throw ValidationError("focal day " + election_date.to_string() + " is excluded");
  }
  std::set<Date> barred = {election_date};
  if (!has_adjacency_window(panel, election_date, window, barred)) {
    // Reuse the throwing path for a precise message.
    adjacency_window(panel, election_date, window, barred);
  }
  std::vector<Date> days;
  for (Date d : panel.days) {
    if (d.is_weekend()) continue;
    if (d != election_date) {
      if (excluded_dates.count(d) != 0) continue;
      if (!has_adjacency_window(panel, d, window, barred)) continue;
    }
    days.push_back(d);
  }
  return days;
}

PlaceboRun placebo_disparate(const TrafficPanel& panel, const AuditFrame& frame,
                             const AuditConfig& config, Demographic demographic) {
  check_config(panel, config);
  const std::vector<double>& demo =
      demographic == Demographic::kAge ? frame.prop_over_65 : frame.prop_non_white;
  if (is_constant(demo)) {
    throw NumericError("demographic '" + to_string(demographic) + "' is constant across POIs");
  }

  PlaceboRun run;
  run.result = run_placebo(
      panel, frame, config, "disparate_coverage_" + to_string(demographic),
      TailDirection::kLowerTail,
      [&](const DayMarginal& slice) {
        std::vector<double> turnout = take(frame.turnout, slice.kept);
        std::vector<double> cov(slice.marginal.size());
        for (std::size_t i = 0; i < cov.size(); ++i) cov[i] = slice.marginal[i] / turnout[i];
        return spearman(cov, take(demo, slice.kept));
      },
      &run.warnings);
  return run;
}

JointPlaceboRun placebo_joint(const TrafficPanel& panel, const AuditFrame& frame,
                              const AuditConfig& config) {
  check_config(panel, config);
  if (is_constant(frame.prop_over_65)) {
    throw NumericError("demographic 'age' is constant across POIs");
  }
  if (is_constant(frame.prop_non_white)) {
    throw NumericError("demographic 'race' is constant across POIs");
  }
  if (std::abs(pearson(frame.prop_over_65, frame.prop_non_white)) > 1.0 - 1e-12) {
    throw NumericError("age and race compositions are collinear");
  }

  auto fit_day = [&](const DayMarginal& slice) {
    if (slice.kept.size() < 4) {
      throw NumericError("fewer than 4 POIs remain for the joint fit");
    }
    Eigen::MatrixXd design(slice.kept.size(), 3);
    Eigen::VectorXd y(slice.kept.size());
    for (std::size_t i = 0; i < slice.kept.size(); ++i) {
      design(i, 0) = 1.0;
      design(i, 1) = frame.prop_over_65[slice.kept[i]] * 100.0;
      design(i, 2) = frame.prop_non_white[slice.kept[i]] * 100.0;
      y(i) = slice.marginal[i] / frame.turnout[slice.kept[i]];
    }
    return ols_fit(design, y, {"constant", "pct_over_65", "pct_non_white"});
  };

  JointPlaceboRun run;
  run.age.focal_day = config.election_date;
  run.age.statistic_name = "joint_coefficient_age";
  run.age.direction = TailDirection::kLowerTail;
  run.race = run.age;
  run.race.statistic_name = "joint_coefficient_race";

  for (Date day : config.placebo_days) {
    DayMarginal slice = day_marginal(panel, frame, config, day);
    bool focal = (day == config.election_date);
    RegressionFit fit;
    try {
      fit = fit_day(slice);
    } catch (const NumericError& e) {
      if (focal) {
        throw NumericError("focal day " + day.to_string() + " is degenerate: " + e.what());
      }
      run.warnings.push_back("placebo day " + day.to_string() + " dropped: " + e.what());
      continue;
    }
    run.age.placebo_values.push_back({day, fit.coefficients[1], focal});
    run.race.placebo_values.push_back({day, fit.coefficients[2], focal});
    if (focal) {
      run.age.focal_value = fit.coefficients[1];
      run.race.focal_value = fit.coefficients[2];
    }
  }
  run.age.p_value = tail_p(run.age.placebo_values, run.age.focal_value,
                           TailDirection::kLowerTail, config.include_focal_in_count);
  run.race.p_value = tail_p(run.race.placebo_values, run.race.focal_value,
                            TailDirection::kLowerTail, config.include_focal_in_count);
  return run;
}

PlaceboRun placebo_measurement(const TrafficPanel& panel, const AuditFrame& frame,
                               const AuditConfig& config) {
  check_config(panel, config);
  if (is_constant(frame.turnout)) {
    throw NumericError("turnout is constant across POIs");
  }
  PlaceboRun run;
  run.result = run_placebo(
      panel, frame, config, "measurement_validity", TailDirection::kUpperTail,
      [&](const DayMarginal& slice) {
        return spearman(slice.marginal, take(frame.turnout, slice.kept));
      },
      &run.warnings);
  return run;
}

SpearmanResult measurement_signal(const std::vector<double>& marginal,
                                  const std::vector<double>& turnout) {
  return spearman_pvalue(marginal, turnout);
}

SpearmanResult preliminary_disparity(const CoverageVector& cov,
                                     const std::vector<double>& demographic) {
  return spearman_pvalue(cov.values, demographic);
}

InteractionModels interaction_regression(const CoverageVector& cov,
                                         const std::vector<double>& age,
                                         const std::vector<double>& race) {
  const std::size_t n = cov.values.size();
  if (age.size() != n || race.size() != n) {
    throw ValidationError("interaction regression inputs have mismatched lengths");
  }
  if (n < 5) {
    throw ValidationError("interaction regression needs at least 5 POIs");
  }
  Eigen::VectorXd y(n);
  Eigen::MatrixXd x1(n, 2), x2(n, 3), x3(n, 4);
  for (std::size_t i = 0; i < n; ++i) {
    y(i) = cov.values[i];
    x1(i, 0) = 1.0;
    x1(i, 1) = age[i];
    x2(i, 0) = 1.0;
    x2(i, 1) = age[i];
    x2(i, 2) = race[i];
    x3(i, 0) = 1.0;
    x3(i, 1) = age[i];
    x3(i, 2) = race[i];
    x3(i, 3) = age[i] * race[i];
  }
  InteractionModels models;
  models.age_only = ols_fit(x1, y, {"constant", "pct_over_65"});
  models.additive = ols_fit(x2, y, {"constant", "pct_over_65", "pct_non_white"});
  models.interacted =
      ols_fit(x3, y, {"constant", "pct_over_65", "pct_non_white", "pct_over_65:pct_non_white"});
  return models;
}

namespace {

// Equal-count quantile assignment: position among the sorted values (stable
// on ties by original index) divided into K consecutive blocks.
std::vector<int> quantile_bins(const std::vector<double>& values, int k) {
  const std::size_t n = values.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
  std::vector<int> bins(n, 0);
  for (std::size_t pos = 0; pos < n; ++pos) {
    bins[order[pos]] = static_cast<int>((pos * static_cast<std::size_t>(k)) / n);
  }
  return bins;
}

std::vector<BinSummaryRow> quantile_rows(const std::string& scheme,
                                         const std::vector<double>& coverage,
                                         const std::vector<double>& covariate, int k) {
  std::vector<int> bins = quantile_bins(covariate, k);
  std::vector<BinSummaryRow> rows(k);
  std::vector<double> lo(k, std::numeric_limits<double>::infinity());
  std::vector<double> hi(k, -std::numeric_limits<double>::infinity());
  std::vector<double> sum(k, 0.0);
  std::vector<std::size_t> count(k, 0);
  for (std::size_t i = 0; i < coverage.size(); ++i) {
    int b = bins[i];
    lo[b] = std::min(lo[b], covariate[i]);
    hi[b] = std::max(hi[b], covariate[i]);
    sum[b] += coverage[i];
    count[b] += 1;
  }
  for (int b = 0; b < k; ++b) {
    rows[b].scheme = scheme;
    rows[b].bin_index = b;
    rows[b].bin_lower = lo[b];
    rows[b].bin_upper = hi[b];
    rows[b].n_pois = count[b];
    rows[b].mean_coverage = count[b] > 0 ? sum[b] / static_cast<double>(count[b])
                                         : std::numeric_limits<double>::quiet_NaN();
  }
  return rows;
}

double median_of(std::vector<double> x) {
  std::sort(x.begin(), x.end());
  std::size_t n = x.size();
  return (n % 2 == 1) ? x[n / 2] : 0.5 * (x[n / 2 - 1] + x[n / 2]);
}

}  // namespace

std::vector<BinSummaryRow> bin_summaries(const CoverageVector& cov,
                                         const std::vector<double>& age,
                                         const std::vector<double>& race, BinScheme scheme) {
  const std::size_t n = cov.values.size();
  if (age.size() != n || race.size() != n) {
    throw ValidationError("bin summary inputs have mismatched lengths");
  }

  switch (scheme) {
    case BinScheme::kVentileAge:
      if (n < 20) throw ValidationError("ventile bins need at least 20 POIs");
      return quantile_rows("ventile-age", cov.values, age, 20);
    case BinScheme::kVentileRace:
      if (n < 20) throw ValidationError("ventile bins need at least 20 POIs");
      return quantile_rows("ventile-race", cov.values, race, 20);
    case BinScheme::kQuartileGrid: {
      if (n < 16) throw ValidationError("quartile grid needs at least 16 POIs");
      std::vector<int> aq = quantile_bins(age, 4);
      std::vector<int> rq = quantile_bins(race, 4);
      std::vector<BinSummaryRow> rows(16);
      std::vector<double> sum(16, 0.0);
      std::vector<std::size_t> count(16, 0);
      for (std::size_t i = 0; i < n; ++i) {
        int cell = aq[i] * 4 + rq[i];
        sum[cell] += cov.values[i];
        count[cell] += 1;
      }
      for (int a = 0; a < 4; ++a) {
        for (int r = 0; r < 4; ++r) {
          int cell = a * 4 + r;
          rows[cell].scheme = "quartile-grid";
          rows[cell].bin_index = cell;
          rows[cell].bin_lower = a;  // age quartile of the cell
          rows[cell].bin_upper = r;  // race quartile of the cell
          rows[cell].n_pois = count[cell];
          rows[cell].mean_coverage = count[cell] > 0
                                         ? sum[cell] / static_cast<double>(count[cell])
                                         : std::numeric_limits<double>::quiet_NaN();
        }
      }
      return rows;
    }
    case BinScheme::kMedianSplit: {
      double med = median_of(age);
      std::vector<std::size_t> young, old;
      for (std::size_t i = 0; i < n; ++i) {
        (age[i] <= med ? young : old).push_back(i);
      }
      if (young.size() < 20 || old.size() < 20) {
        throw ValidationError("median-split groups need at least 20 POIs each");
      }
      auto subset_rows = [&](const std::vector<std::size_t>& idx, const std::string& name) {
        std::vector<double> c, r;
        for (std::size_t i : idx) {
          c.push_back(cov.values[i]);
          r.push_back(race[i]);
        }
        return quantile_rows(name, c, r, 20);
      };
      std::vector<BinSummaryRow> rows = subset_rows(young, "median-split-younger");
      std::vector<BinSummaryRow> older = subset_rows(old, "median-split-older");
      rows.insert(rows.end(), older.begin(), older.end());
      return rows;
    }
  }
  throw ValidationError("unknown bin scheme");
}

std::string render_placebo_csv(const PlaceboResult& result) {
  std::string out = "day,value,is_focal\n";
  for (const auto& v : result.placebo_values) {
    out += csv_join({v.day.to_string(), format_double(v.value), v.is_focal ? "1" : "0"});
  }
  return out;
}

std::string render_bins_csv(const std::vector<BinSummaryRow>& rows) {
  std::string out = "scheme,bin_index,bin_lower,bin_upper,mean_coverage,n_pois\n";
  for (const auto& r : rows) {
    out += csv_join({r.scheme, std::to_string(r.bin_index), format_double(r.bin_lower),
                     format_double(r.bin_upper), format_double(r.mean_coverage),
                     std::to_string(r.n_pois)});
  }
  return out;
}

}  // namespace mobaudit
