#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

// Domain types shared by every module of the toolkit. All types here are
// immutable value types once constructed; operations on them are pure.

namespace mobaudit {

// Input or configuration problems: bad files, broken invariants, impossible
// requests. Maps to exit code 1 at the tool boundary.
class ValidationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Numerical failures: degenerate vectors, rank-deficient designs, saturated
// models. Maps to exit code 2 at the tool boundary.
class NumericError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Calendar date at day resolution, stored as days since 1970-01-01.
class Date {
 public:
  Date() = default;

  static Date parse(const std::string& iso);  // strict "YYYY-MM-DD"
  static Date from_ymd(int year, unsigned month, unsigned day);
  static Date from_serial(std::int32_t days) { return Date(days); }

  std::string to_string() const;
  std::int32_t serial() const { return days_; }

  // 0 = Sunday ... 6 = Saturday
  unsigned weekday() const;
  bool is_weekend() const;
  Date plus_days(int n) const { return Date(days_ + n); }
  Date next_weekday() const;
  Date prev_weekday() const;

  auto operator<=>(const Date&) const = default;

 private:
  explicit Date(std::int32_t days) : days_(days) {}
  std::int32_t days_ = 0;
};

using PoiId = std::string;

enum class Race { kWhite, kBlack, kHispanic, kOtherNonWhite, kUnknown };

enum class PoiCategory { kSchool, kFireStation, kChurch, kCommunityCenter, kOther };

// Maps a raw token onto the closed race set. Unrecognized tokens become
// kUnknown; `recognized` reports whether the token was a known spelling.
Race parse_race(const std::string& token, bool* recognized = nullptr);
std::string to_string(Race race);

PoiCategory parse_category(const std::string& token);
std::string to_string(PoiCategory category);

struct DirectoryEntry {
  PoiId poi_id;
  std::string name;
  std::string street_address;
  std::string city;
  std::string state;
  std::string zip;
  PoiCategory category = PoiCategory::kOther;
};

struct PoiDirectory {
  std::vector<DirectoryEntry> entries;

  const DirectoryEntry* find(const PoiId& id) const;
  void validate() const;  // ids unique and non-empty
};

// Dense per-POI, per-day visit counts. Every (poi, day) cell is present;
// loaders reject sparse input rather than imputing zeros.
struct TrafficPanel {
  std::vector<PoiId> pois;
  std::vector<Date> days;                // strictly increasing
  std::vector<std::int64_t> counts;      // row-major [poi][day]

  std::int64_t count(std::size_t poi, std::size_t day) const {
    return counts[poi * days.size() + day];
  }
  std::int64_t& cell(std::size_t poi, std::size_t day) {
    return counts[poi * days.size() + day];
  }

  std::optional<std::size_t> poi_index(const PoiId& id) const;
  std::optional<std::size_t> day_index(Date day) const;  // binary search

  std::size_t n_pois() const { return pois.size(); }
  std::size_t n_days() const { return days.size(); }

  // Builds the POI lookup and checks invariants. Call after filling fields.
  void finalize();

 private:
  std::unordered_map<PoiId, std::size_t> poi_lookup_;
};

struct AdminVisitRecord {
  std::string person_id;
  std::string precinct_id;
  Date date;
  int age = 0;
  Race race = Race::kUnknown;
};

// Per-POI ground truth aggregated from admin records: turnout V_i and the
// demographic composition measures A_i (proportion over the age threshold)
// and R_i (proportion non-white among records with known race).
struct PoiProfile {
  PoiId poi_id;
  std::int64_t turnout = 0;
  double prop_over_65 = 0.0;
  double prop_non_white = 0.0;
};

// Per-POI dimensionless ratio of observed to ground-truth visits. Values may
// be negative when the numerator is a negative marginal-traffic estimate.
struct CoverageVector {
  std::vector<PoiId> pois;
  std::vector<double> values;
};

enum class TailDirection { kLowerTail, kUpperTail };

struct PlaceboDayValue {
  Date day;
  double value = 0.0;
  bool is_focal = false;
};

// Outcome of a placebo-inference procedure: the focal-day statistic compared
// against the same statistic on every day of the placebo set. The focal day
// is a member of its own placebo set, so p >= 1/n in the default setup.
struct PlaceboResult {
  Date focal_day;
  std::string statistic_name;
  double focal_value = 0.0;
  std::vector<PlaceboDayValue> placebo_values;
  double p_value = 1.0;
  TailDirection direction = TailDirection::kLowerTail;

  std::size_t n() const { return placebo_values.size(); }
};

struct RegressionFit {
  std::vector<std::string> names;
  std::vector<double> coefficients;
  std::vector<double> std_errors;
  std::vector<double> p_values;  // two-sided t tests on dof
  double residual_std_error = 0.0;
  double r_squared = 0.0;
  std::size_t n_obs = 0;
  std::size_t dof = 0;

  double coef(const std::string& name) const;
};

// Resolves an admin record's precinct id to a POI, or nullopt when the
// precinct has no confident match. Produced by the linkage module.
using PrecinctResolver = std::function<std::optional<PoiId>(const std::string&)>;

struct SummarizedProfiles {
  std::vector<PoiProfile> profiles;  // sorted by poi_id
  std::int64_t unmatched_records = 0;
};

// Aggregates individual visit records into per-POI profiles for the focal
// day. Every record must carry the focal date; records whose precinct does
// not resolve are counted in unmatched_records.
SummarizedProfiles summarize_profiles(const std::vector<AdminVisitRecord>& records,
                                      const PrecinctResolver& resolver, Date focal_day,
                                      int age_threshold = 65);

}  // namespace mobaudit
