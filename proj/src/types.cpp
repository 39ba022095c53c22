#include "mobaudit/types.hpp"

#include <algorithm>
#include <cctype>
#include <chrono>
#include <cstdio>
#include <map>

namespace mobaudit {

namespace {

std::chrono::year_month_day to_ymd(std::int32_t serial) {
  return std::chrono::year_month_day{
      std::chrono::sys_days{std::chrono::days{serial}}};
}

}  // namespace

Date Date::parse(const std::string& iso) {
  int y = 0;
  unsigned m = 0, d = 0;
  char tail = 0;
  if (iso.size() != 10 || std::sscanf(iso.c_str(), "%4d-%2u-%2u%c", &y, &m, &d, &tail) != 3) {
    throw ValidationError("unparseable date '" + iso + "' (expected YYYY-MM-DD)");
  }
  return from_ymd(y, m, d);
}

Date Date::from_ymd(int year, unsigned month, unsigned day) {
  std::chrono::year_month_day ymd{std::chrono::year{year}, std::chrono::month{month},
                                  std::chrono::day{day}};
  if (!ymd.ok()) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%04d-%02u-%02u", year, month, day);
    throw ValidationError(std::string("invalid calendar date '") + buf + "'");
  }
  return Date(static_cast<std::int32_t>(
      std::chrono::sys_days{ymd}.time_since_epoch().count()));
}

std::string Date::to_string() const {
  auto ymd = to_ymd(days_);
  char buf[16];
  std::snprintf(buf, sizeof buf, "%04d-%02u-%02u", static_cast<int>(ymd.year()),
                static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()));
  return buf;
}

unsigned Date::weekday() const {
  return std::chrono::weekday{std::chrono::sys_days{std::chrono::days{days_}}}.c_encoding();
}

bool Date::is_weekend() const {
  unsigned wd = weekday();
  return wd == 0 || wd == 6;
}

Date Date::next_weekday() const {
  Date d = plus_days(1);
  while (d.is_weekend()) d = d.plus_days(1);
  return d;
}

Date Date::prev_weekday() const {
  Date d = plus_days(-1);
  while (d.is_weekend()) d = d.plus_days(-1);
  return d;
}

Race parse_race(const std::string& token, bool* recognized) {
  std::string t;
  t.reserve(token.size());
  for (char c : token) t.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
  if (recognized) *recognized = true;
  if (t == "white") return Race::kWhite;
  if (t == "black" || t == "african-american") return Race::kBlack;
  if (t == "hispanic" || t == "latino" || t == "latinx") return Race::kHispanic;
  if (t == "asian" || t == "native-american" || t == "pacific-islander" ||
      t == "multiracial" || t == "other" || t == "other-nonwhite") {
    return Race::kOtherNonWhite;
  }
  if (t.empty() || t == "unknown" || t == "na") return Race::kUnknown;
  if (recognized) *recognized = false;
  return Race::kUnknown;
}

std::string to_string(Race race) {
  switch (race) {
    case Race::kWhite: return "white";
    case Race::kBlack: return "black";
    case Race::kHispanic: return "hispanic";
    case Race::kOtherNonWhite: return "other-nonwhite";
    case Race::kUnknown: return "unknown";
  }
  return "unknown";
}

PoiCategory parse_category(const std::string& token) {
  std::string t;
  t.reserve(token.size());
  for (char c : token) t.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
  if (t == "school") return PoiCategory::kSchool;
  if (t == "fire-station") return PoiCategory::kFireStation;
  if (t == "church") return PoiCategory::kChurch;
  if (t == "community-center") return PoiCategory::kCommunityCenter;
  return PoiCategory::kOther;
}

std::string to_string(PoiCategory category) {
  switch (category) {
    case PoiCategory::kSchool: return "school";
    case PoiCategory::kFireStation: return "fire-station";
    case PoiCategory::kChurch: return "church";
    case PoiCategory::kCommunityCenter: return "community-center";
    case PoiCategory::kOther: return "other";
  }
  return "other";
}

const DirectoryEntry* PoiDirectory::find(const PoiId& id) const {
  for (const auto& e : entries) {
    if (e.poi_id == id) return &e;
  }
  return nullptr;
}

void PoiDirectory::validate() const {
  std::unordered_map<PoiId, int> seen;
  for (const auto& e : entries) {
    if (e.poi_id.empty()) throw ValidationError("directory entry with empty poi_id");
    if (++seen[e.poi_id] > 1) {
      throw ValidationError("duplicate poi_id '" + e.poi_id + "' in directory");
    }
  }
}

std::optional<std::size_t> TrafficPanel::poi_index(const PoiId& id) const {
  auto it = poi_lookup_.find(id);
  if (it == poi_lookup_.end()) return std::nullopt;
  return it->second;
}

std::optional<std::size_t> TrafficPanel::day_index(Date day) const {
  auto it = std::lower_bound(days.begin(), days.end(), day);
  if (it == days.end() || *it != day) return std::nullopt;
  return static_cast<std::size_t>(it - days.begin());
}

void TrafficPanel::finalize() {
  if (counts.size() != pois.size() * days.size()) {
    throw ValidationError("traffic panel counts do not cover every (poi, day) cell");
  }
  for (std::size_t i = 1; i < days.size(); ++i) {
    if (!(days[i - 1] < days[i])) {
      throw ValidationError("traffic panel days not strictly increasing at " +
                            days[i].to_string());
    }
  }
  for (std::int64_t c : counts) {
    if (c < 0) throw ValidationError("negative count in traffic panel");
  }
  poi_lookup_.clear();
  poi_lookup_.reserve(pois.size());
  for (std::size_t i = 0; i < pois.size(); ++i) {
    if (!poi_lookup_.emplace(pois[i], i).second) {
      throw ValidationError("duplicate poi_id '" + pois[i] + "' in traffic panel");
    }
  }
}

double RegressionFit::coef(const std::string& name) const {
  for (std::size_t i = 0; i < names.size(); ++i) {
    if (names[i] == name) return coefficients[i];
  }
  throw ValidationError("no coefficient named '" + name + "'");
}

SummarizedProfiles summarize_profiles(const std::vector<AdminVisitRecord>& records,
                                      const PrecinctResolver& resolver, Date focal_day,
                                      int age_threshold) {
  if (records.empty()) throw ValidationError("no records");

  struct Tally {
    std::int64_t turnout = 0;
    std::int64_t over_threshold = 0;
    std::int64_t non_white = 0;
    std::int64_t unknown_race = 0;
  };
  // std::map keeps profiles ordered by poi_id, so the output is independent
  // of the input record order.
  std::map<PoiId, Tally> tallies;
  std::int64_t unmatched = 0;

  for (const auto& rec : records) {
    if (rec.date != focal_day) {
      throw ValidationError("record " + rec.person_id + " dated " + rec.date.to_string() +
                            " does not match focal day " + focal_day.to_string());
    }
    auto poi = resolver(rec.precinct_id);
    if (!poi) {
      ++unmatched;
      continue;
    }
    Tally& t = tallies[*poi];
    ++t.turnout;
    if (rec.age >= age_threshold) ++t.over_threshold;
    if (rec.race == Race::kUnknown) {
      ++t.unknown_race;
    } else if (rec.race != Race::kWhite) {
      ++t.non_white;
    }
  }

  if (tallies.empty()) throw ValidationError("all records unmatched");

  SummarizedProfiles out;
  out.unmatched_records = unmatched;
  out.profiles.reserve(tallies.size());
  for (const auto& [poi, t] : tallies) {
    PoiProfile p;
    p.poi_id = poi;
    p.turnout = t.turnout;
    p.prop_over_65 = static_cast<double>(t.over_threshold) / static_cast<double>(t.turnout);
    std::int64_t known = t.turnout - t.unknown_race;
    p.prop_non_white =
        known > 0 ? static_cast<double>(t.non_white) / static_cast<double>(known) : 0.0;
    out.profiles.push_back(std::move(p));
  }
  return out;
}

}  // namespace mobaudit
