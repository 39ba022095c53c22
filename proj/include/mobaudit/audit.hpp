#pragma once

#include <set>
#include <string>
#include <vector>

#include "mobaudit/baseline.hpp"
#include "mobaudit/stats.hpp"
#include "mobaudit/types.hpp"

// Coverage construction and placebo inference. The placebo design treats
// every ordinary day in the panel as a fake event day, recomputes the focal
// statistic there, and locates the real event day within that distribution;
// empirical p-values are tail counts over the placebo set (which includes
// the focal day itself, so p >= 1/n).

namespace mobaudit {

enum class Demographic { kAge, kRace };

Demographic parse_demographic(const std::string& token);
std::string to_string(Demographic d);

// Elementwise ratio numerator/denominator. Denominators must be positive.
CoverageVector coverage(const std::vector<PoiId>& pois, const std::vector<double>& numerator,
                        const std::vector<double>& denominator);

// Panel columns restricted to the POIs with admin profiles, with the
// profile vectors aligned to the panel's POI order.
struct AuditFrame {
  std::vector<std::size_t> rows;         // indices into panel.pois
  std::vector<PoiId> pois;
  std::vector<double> turnout;           // V
  std::vector<double> prop_over_65;      // A, in [0, 1]
  std::vector<double> prop_non_white;    // R, in [0, 1]
};

// Intersects the panel with the profiles. Profiles whose POI is absent from
// the panel are dropped; fewer than 3 shared POIs is an error.
AuditFrame align_profiles(const TrafficPanel& panel, const std::vector<PoiProfile>& profiles);

struct AuditConfig {
  Date election_date;
  std::vector<Date> placebo_days;        // includes the focal day
  ImputationMethod method = ImputationMethod::kMean;
  int window = 1;
  bool exclude_negative_marginal = false;
  bool include_focal_in_count = true;    // focal day counts toward its own tail
  std::set<Date> baseline_excluded;      // days barred from baseline windows
};

// Ordinary days usable as placebo events: weekdays in the panel with a full
// adjacency window that avoids the focal day, minus user-excluded dates.
// Days whose window would touch the focal day are therefore dropped. The
// result is chronological and always contains the focal day, which must
// have a full window of its own.
std::vector<Date> make_placebo_days(const TrafficPanel& panel, Date election_date, int window,
                                    const std::set<Date>& excluded_dates);

// Marginal traffic on one day restricted to the audited POIs, after the
// configured baseline and the optional negative-marginal filter.
struct DayMarginal {
  Date day;
  std::vector<std::size_t> kept;   // indices into the frame's vectors
  std::vector<double> marginal;    // aligned with kept
};

DayMarginal day_marginal(const TrafficPanel& panel, const AuditFrame& frame,
                         const AuditConfig& config, Date day);

struct PlaceboRun {
  PlaceboResult result;
  std::vector<std::string> warnings;
};

// Algorithm: for each placebo day j, impute the baseline, form marginal
// traffic, divide by turnout to get coverage, and rank-correlate coverage
// with the demographic. Lower tail: the event day should look unusually
// negative if the panel under-covers that group.
PlaceboRun placebo_disparate(const TrafficPanel& panel, const AuditFrame& frame,
                             const AuditConfig& config, Demographic demographic);

struct JointPlaceboRun {
  PlaceboResult age;
  PlaceboResult race;
  std::vector<std::string> warnings;
};

// Per-day OLS of coverage on both demographics jointly (percentage-point
// units); the placebo statistics are the two slope coefficients.
JointPlaceboRun placebo_joint(const TrafficPanel& panel, const AuditFrame& frame,
                              const AuditConfig& config);

// Upper-tail check that marginal traffic tracks ground-truth turnout at all:
// the statistic is the rank correlation of marginal traffic with turnout.
PlaceboRun placebo_measurement(const TrafficPanel& panel, const AuditFrame& frame,
                               const AuditConfig& config);

// Single-day diagnostics used by the report command.
SpearmanResult measurement_signal(const std::vector<double>& marginal,
                                  const std::vector<double>& turnout);
SpearmanResult preliminary_disparity(const CoverageVector& cov,
                                     const std::vector<double>& demographic);

struct InteractionModels {
  RegressionFit age_only;      // coverage ~ A
  RegressionFit additive;      // coverage ~ A + R
  RegressionFit interacted;    // coverage ~ A + R + A:R
};

// A and R are taken in the units supplied by the caller (the pipeline uses
// percentage points, 0-100).
InteractionModels interaction_regression(const CoverageVector& cov,
                                         const std::vector<double>& age,
                                         const std::vector<double>& race);

enum class BinScheme { kVentileAge, kVentileRace, kQuartileGrid, kMedianSplit };

struct BinSummaryRow {
  std::string scheme;
  int bin_index = 0;
  double bin_lower = 0.0;
  double bin_upper = 0.0;
  double mean_coverage = 0.0;
  std::size_t n_pois = 0;
};

// Equal-count quantile bins of coverage against the demographics. For the
// quartile grid, bin_lower/bin_upper carry the age and race quartile indices
// of the cell; for the ventile and median-split schemes they are the
// covariate range of the bin.
std::vector<BinSummaryRow> bin_summaries(const CoverageVector& cov,
                                         const std::vector<double>& age,
                                         const std::vector<double>& race, BinScheme scheme);

std::string render_placebo_csv(const PlaceboResult& result);
std::string render_bins_csv(const std::vector<BinSummaryRow>& rows);

}  // namespace mobaudit
