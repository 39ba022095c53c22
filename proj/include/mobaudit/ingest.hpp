#pragma once

#include <set>
#include <string>
#include <vector>

#include "mobaudit/types.hpp"

// Readers and canonical writers for the four input CSV schemas. Loaders
// validate against the core-model invariants; recoverable row problems are
// collected into a rejects report instead of being dropped silently.

namespace mobaudit {

struct RejectedRow {
  std::size_t line_no = 0;
  std::string reason;
};

struct CrosswalkEntry {
  std::string precinct_id;
  std::string location_name;
  std::string street_address;
  std::string city;
  std::string state;
  std::string zip;
};

struct DatasetManifest {
  std::string traffic_path;
  std::string admin_path;
  std::string crosswalk_path;
  std::string poi_directory_path;
  Date election_date;
  std::set<Date> excluded_dates;

  void validate() const;  // election_date not excluded; paths distinct
};

// traffic.csv: poi_id,date,visits. The loaded panel is fully dense; gaps or
// duplicate (poi, date) cells are errors, not imputed.
TrafficPanel load_traffic_panel(const std::string& path);

struct AdminLoadResult {
  std::vector<AdminVisitRecord> records;
  std::vector<RejectedRow> rejects;
  std::vector<std::string> warnings;
};

// admin_visits.csv: person_id,precinct_id,date,age,race
AdminLoadResult load_admin_records(const std::string& path);

struct CrosswalkLoadResult {
  std::vector<CrosswalkEntry> entries;
  std::vector<RejectedRow> rejects;
};

// crosswalk.csv: precinct_id,location_name,street_address,city,state,zip
CrosswalkLoadResult load_crosswalk(const std::string& path);

struct DirectoryLoadResult {
  PoiDirectory directory;
  std::vector<RejectedRow> rejects;
};

// poi_directory.csv: poi_id,location_name,street_address,city,state,zip,category
DirectoryLoadResult load_poi_directory(const std::string& path);

// Canonical renderings: POI-major / input order, ISO dates, shortest
// round-trip numerics. load(render(x)) == x and render is idempotent under
// reload, which is what the round-trip tests pin down.
std::string render_traffic_csv(const TrafficPanel& panel);
std::string render_admin_csv(const std::vector<AdminVisitRecord>& records);
std::string render_crosswalk_csv(const std::vector<CrosswalkEntry>& entries);
std::string render_directory_csv(const PoiDirectory& directory);
std::string render_rejects_csv(const std::vector<RejectedRow>& rejects);

}  // namespace mobaudit
