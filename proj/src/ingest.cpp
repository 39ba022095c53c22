#include "mobaudit/ingest.hpp"

#include <algorithm>
#include <map>
#include <set>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

#include "mobaudit/csv.hpp"

namespace mobaudit {

namespace {

// Reads and checks the header row against the schema.
CsvReader open_csv(std::istream& in, const std::string& path,
                   const std::vector<std::string>& expected_header) {
  CsvReader reader(in);
  auto header = reader.next();
  if (!header) {
    throw ValidationError(path + ": empty file, expected header row");
  }
  if (header->fields != expected_header) {
    throw ValidationError(path + ": unexpected header, expected '" +
                          csv_join(expected_header) + "' got '" + csv_join(header->fields) + "'");
  }
  return reader;
}

std::string line_tag(std::size_t line_no) {
  return "line " + std::to_string(line_no);
}

}  // namespace

void DatasetManifest::validate() const {
  if (excluded_dates.count(election_date) != 0) {
    throw ValidationError("election date " + election_date.to_string() +
                          " is in the excluded-date list");
  }
  std::set<std::string> paths{traffic_path, admin_path, crosswalk_path, poi_directory_path};
  if (paths.size() != 4) {
    throw ValidationError("dataset paths must be four distinct files");
  }
}

TrafficPanel load_traffic_panel(const std::string& path) {
  std::istringstream in(read_file(path));
  CsvReader reader = open_csv(in, path, {"poi_id", "date", "visits"});

  std::vector<PoiId> pois;                          // first-appearance order
  std::unordered_map<PoiId, std::size_t> poi_of;
  std::set<Date> day_set;
  std::map<std::pair<std::size_t, Date>, std::int64_t> cells;

  while (auto row = reader.next()) {
    if (row->fields.size() != 3) {
      throw ValidationError(path + " " + line_tag(row->line_no) + ": expected 3 fields, got " +
                            std::to_string(row->fields.size()));
    }
    const PoiId& poi = row->fields[0];
    if (poi.empty()) {
      throw ValidationError(path + " " + line_tag(row->line_no) + ": empty poi_id");
    }
    Date day;
    try {
      day = Date::parse(row->fields[1]);
    } catch (const ValidationError& e) {
      throw ValidationError(path + " " + line_tag(row->line_no) + ": " + e.what());
    }
    auto visits_opt = parse_int(row->fields[2]);
    if (!visits_opt) {
      throw ValidationError(path + " " + line_tag(row->line_no) + ": visits is not an integer: '" +
                            row->fields[2] + "'");
    }
    std::int64_t visits = *visits_opt;
    if (visits < 0) {
      throw ValidationError(path + " " + line_tag(row->line_no) + ": negative visit count " +
                            std::to_string(visits) + " for " + poi + " on " + day.to_string());
    }

    auto [it, inserted] = poi_of.emplace(poi, pois.size());
    if (inserted) pois.push_back(poi);
    day_set.insert(day);
    auto [cell_it, fresh] = cells.emplace(std::make_pair(it->second, day), visits);
    if (!fresh) {
      throw ValidationError(path + " " + line_tag(row->line_no) + ": duplicate cell for " + poi +
                            " on " + day.to_string());
    }
  }

  if (pois.empty()) {
    throw ValidationError(path + ": no data rows");
  }

  TrafficPanel panel;
  panel.pois = std::move(pois);
  panel.days.assign(day_set.begin(), day_set.end());
  panel.counts.assign(panel.pois.size() * panel.days.size(), 0);

  std::vector<std::string> missing;
  for (std::size_t p = 0; p < panel.pois.size(); ++p) {
    for (std::size_t d = 0; d < panel.days.size(); ++d) {
      auto it = cells.find({p, panel.days[d]});
      if (it == cells.end()) {
        if (missing.size() < 5) {
          missing.push_back(panel.pois[p] + "@" + panel.days[d].to_string());
        } else {
          missing.push_back("");  // counted below
        }
      } else {
        panel.counts[p * panel.days.size() + d] = it->second;
      }
    }
  }
  if (!missing.empty()) {
    std::string msg = path + ": panel is not dense; missing cells: ";
    std::size_t shown = std::min<std::size_t>(missing.size(), 5);
    for (std::size_t i = 0; i < shown; ++i) {
      if (i) msg += ", ";
      msg += missing[i];
    }
    if (missing.size() > shown) {
      msg += " (and " + std::to_string(missing.size() - shown) + " more)";
    }
    throw ValidationError(msg);
  }

  panel.finalize();
  return panel;
}

AdminLoadResult load_admin_records(const std::string& path) {
  std::istringstream in(read_file(path));
  CsvReader reader = open_csv(in, path, {"person_id", "precinct_id", "date", "age", "race"});

  AdminLoadResult result;
  std::set<std::string> unknown_tokens;
  while (auto row = reader.next()) {
    if (row->fields.size() != 5) {
      result.rejects.push_back({row->line_no, "expected 5 fields, got " +
                                                  std::to_string(row->fields.size())});
      continue;
    }
    AdminVisitRecord rec;
    rec.person_id = row->fields[0];
    rec.precinct_id = row->fields[1];
    if (rec.person_id.empty()) {
      result.rejects.push_back({row->line_no, "empty person_id"});
      continue;
    }
    if (rec.precinct_id.empty()) {
      result.rejects.push_back({row->line_no, "empty precinct_id"});
      continue;
    }
    try {
      rec.date = Date::parse(row->fields[2]);
    } catch (const ValidationError&) {
      result.rejects.push_back({row->line_no, "unparseable date '" + row->fields[2] + "'"});
      continue;
    }
    auto age_opt = parse_int(row->fields[3]);
    if (!age_opt) {
      result.rejects.push_back({row->line_no, "age is not an integer: '" + row->fields[3] + "'"});
      continue;
    }
    std::int64_t age = *age_opt;
    if (age < 17 || age > 120) {
      result.rejects.push_back({row->line_no, "age out of range: " + std::to_string(age)});
      continue;
    }
    rec.age = static_cast<int>(age);
    bool recognized = false;
    rec.race = parse_race(row->fields[4], &recognized);
    if (!recognized && unknown_tokens.insert(row->fields[4]).second) {
      result.warnings.push_back(path + " " + line_tag(row->line_no) + ": unrecognized race token '" +
                                row->fields[4] + "' mapped to unknown");
    }
    result.records.push_back(std::move(rec));
  }
  return result;
}

CrosswalkLoadResult load_crosswalk(const std::string& path) {
  std::istringstream in(read_file(path));
  CsvReader reader =
      open_csv(in, path, {"precinct_id", "location_name", "street_address", "city", "state", "zip"});

  CrosswalkLoadResult result;
  std::unordered_set<std::string> seen;
  while (auto row = reader.next()) {
    if (row->fields.size() != 6) {
      result.rejects.push_back({row->line_no, "expected 6 fields, got " +
                                                  std::to_string(row->fields.size())});
      continue;
    }
    CrosswalkEntry entry;
    entry.precinct_id = row->fields[0];
    entry.location_name = row->fields[1];
    entry.street_address = row->fields[2];
    entry.city = row->fields[3];
    entry.state = row->fields[4];
    entry.zip = row->fields[5];
    if (entry.precinct_id.empty()) {
      result.rejects.push_back({row->line_no, "empty precinct_id"});
      continue;
    }
    if (entry.location_name.empty()) {
      result.rejects.push_back({row->line_no, "empty location_name"});
      continue;
    }
    if (entry.street_address.empty()) {
      result.rejects.push_back({row->line_no, "empty street_address"});
      continue;
    }
    if (!seen.insert(entry.precinct_id).second) {
      throw ValidationError(path + " " + line_tag(row->line_no) + ": ambiguous precinct '" +
                            entry.precinct_id + "' maps to more than one location");
    }
    result.entries.push_back(std::move(entry));
  }
  return result;
}

DirectoryLoadResult load_poi_directory(const std::string& path) {
  std::istringstream in(read_file(path));
  CsvReader reader = open_csv(
      in, path,
      {"poi_id", "location_name", "street_address", "city", "state", "zip", "category"});

  DirectoryLoadResult result;
  std::unordered_set<PoiId> seen;
  while (auto row = reader.next()) {
    if (row->fields.size() != 7) {
      result.rejects.push_back({row->line_no, "expected 7 fields, got " +
                                                  std::to_string(row->fields.size())});
      continue;
    }
    DirectoryEntry entry;
    entry.poi_id = row->fields[0];
    entry.name = row->fields[1];
    entry.street_address = row->fields[2];
    entry.city = row->fields[3];
    entry.state = row->fields[4];
    entry.zip = row->fields[5];
    entry.category = parse_category(row->fields[6]);
    if (entry.poi_id.empty()) {
      result.rejects.push_back({row->line_no, "empty poi_id"});
      continue;
    }
    if (entry.name.empty()) {
      result.rejects.push_back({row->line_no, "empty location_name"});
      continue;
    }
    if (!seen.insert(entry.poi_id).second) {
      throw ValidationError(path + " " + line_tag(row->line_no) + ": duplicate poi_id '" +
                            entry.poi_id + "'");
    }
    result.directory.entries.push_back(std::move(entry));
  }
  result.directory.validate();
  return result;
}

std::string render_traffic_csv(const TrafficPanel& panel) {
  std::string out = "poi_id,date,visits\n";
  for (std::size_t p = 0; p < panel.n_pois(); ++p) {
    for (std::size_t d = 0; d < panel.n_days(); ++d) {
      out += csv_join({panel.pois[p], panel.days[d].to_string(),
                       std::to_string(panel.count(p, d))});
    }
  }
  return out;
}

std::string render_admin_csv(const std::vector<AdminVisitRecord>& records) {
  std::string out = "person_id,precinct_id,date,age,race\n";
  for (const auto& rec : records) {
    out += csv_join({rec.person_id, rec.precinct_id, rec.date.to_string(),
                     std::to_string(rec.age), to_string(rec.race)});
  }
  return out;
}

std::string render_crosswalk_csv(const std::vector<CrosswalkEntry>& entries) {
  std::string out = "precinct_id,location_name,street_address,city,state,zip\n";
  for (const auto& e : entries) {
    out += csv_join({e.precinct_id, e.location_name, e.street_address, e.city, e.state, e.zip});
  }
  return out;
}

std::string render_directory_csv(const PoiDirectory& directory) {
  std::string out = "poi_id,location_name,street_address,city,state,zip,category\n";
  for (const auto& e : directory.entries) {
    out += csv_join(
        {e.poi_id, e.name, e.street_address, e.city, e.state, e.zip, to_string(e.category)});
  }
  return out;
}

std::string render_rejects_csv(const std::vector<RejectedRow>& rejects) {
  std::string out = "line,reason\n";
  for (const auto& r : rejects) {
    out += csv_join({std::to_string(r.line_no), r.reason});
  }
  return out;
}

}  // namespace mobaudit
