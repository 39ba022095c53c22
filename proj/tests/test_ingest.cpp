#include <doctest.h>

#include <unistd.h>

#include <filesystem>
#include <string>
#include <vector>

#include "mobaudit/csv.hpp"
#include "mobaudit/ingest.hpp"

using namespace mobaudit;

namespace {

namespace fs = std::filesystem;

struct TempDir {
  fs::path path;
  TempDir() {
    path = fs::temp_directory_path() / ("mobaudit_ingest_" + std::to_string(::getpid()));
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
  std::string file(const std::string& name, const std::string& content) const {
    std::string p = (path / name).string();
    write_file(p, content);
    return p;
  }
};

const std::string kTrafficHeader = "poi_id,date,visits\n";
const std::string kAdminHeader = "person_id,precinct_id,date,age,race\n";
const std::string kCrosswalkHeader = "precinct_id,location_name,street_address,city,state,zip\n";
const std::string kDirectoryHeader =
    "poi_id,location_name,street_address,city,state,zip,category\n";

}  // namespace

TEST_CASE("load_traffic_panel: dense 2x3 panel") {
  TempDir tmp;
  std::string path = tmp.file("traffic.csv", kTrafficHeader +
                                                 "P1,2018-11-05,10\n"
                                                 "P1,2018-11-06,11\n"
                                                 "P1,2018-11-07,12\n"
                                                 "P2,2018-11-05,20\n"
                                                 "P2,2018-11-06,21\n"
                                                 "P2,2018-11-07,22\n");
  TrafficPanel panel = load_traffic_panel(path);
  CHECK(panel.n_pois() == 2);
  CHECK(panel.n_days() == 3);
  CHECK(panel.pois == std::vector<PoiId>{"P1", "P2"});  // first-appearance order
  CHECK(panel.count(0, 1) == 11);
  CHECK(panel.count(1, 2) == 22);
  CHECK(panel.days.front() == Date::parse("2018-11-05"));
}

TEST_CASE("load_traffic_panel: rows may arrive in any order") {
  TempDir tmp;
  std::string path = tmp.file("traffic.csv", kTrafficHeader +
                                                 "P2,2018-11-07,22\n"
                                                 "P1,2018-11-06,11\n"
                                                 "P2,2018-11-05,20\n"
                                                 "P1,2018-11-07,12\n"
                                                 "P2,2018-11-06,21\n"
                                                 "P1,2018-11-05,10\n");
  TrafficPanel panel = load_traffic_panel(path);
  CHECK(panel.pois == std::vector<PoiId>{"P2", "P1"});
  CHECK(panel.count(*panel.poi_index("P1"), *panel.day_index(Date::parse("2018-11-06"))) == 11);
  // Days are sorted regardless of row order.
  CHECK(panel.days == std::vector<Date>{Date::parse("2018-11-05"), Date::parse("2018-11-06"),
                                        Date::parse("2018-11-07")});
}

TEST_CASE("load_traffic_panel: hard errors") {
  TempDir tmp;

  CHECK_THROWS_WITH_AS(
      load_traffic_panel(tmp.file("dup.csv", kTrafficHeader + "P1,2018-11-06,5\n"
                                                              "P1,2018-11-06,6\n")),
      doctest::Contains("duplicate cell"), ValidationError);

  CHECK_THROWS_WITH_AS(
      load_traffic_panel(tmp.file("neg.csv", kTrafficHeader + "P1,2018-11-06,-3\n")),
      doctest::Contains("negative visit count"), ValidationError);

  CHECK_THROWS_WITH_AS(
      load_traffic_panel(tmp.file("sparse.csv", kTrafficHeader + "P1,2018-11-05,1\n"
                                                                 "P1,2018-11-06,2\n"
                                                                 "P2,2018-11-05,3\n")),
      doctest::Contains("not dense"), ValidationError);

  CHECK_THROWS_WITH_AS(
      load_traffic_panel(tmp.file("badhdr.csv", "poi,when,how_many\nP1,2018-11-06,5\n")),
      doctest::Contains("unexpected header"), ValidationError);

  CHECK_THROWS_WITH_AS(
      load_traffic_panel(tmp.file("badint.csv", kTrafficHeader + "P1,2018-11-06,many\n")),
      doctest::Contains("not an integer"), ValidationError);

  CHECK_THROWS_WITH_AS(
      load_traffic_panel(tmp.file("baddate.csv", kTrafficHeader + "P1,06/11/2018,5\n")),
      doctest::Contains("unparseable date"), ValidationError);

  CHECK_THROWS_WITH_AS(load_traffic_panel(tmp.file("empty.csv", "")),
                       doctest::Contains("empty file"), ValidationError);

  CHECK_THROWS_WITH_AS(load_traffic_panel(tmp.file("headeronly.csv", kTrafficHeader)),
                       doctest::Contains("no data rows"), ValidationError);

  CHECK_THROWS_WITH_AS(
      load_traffic_panel(tmp.file("short.csv", kTrafficHeader + "P1,2018-11-06\n")),
      doctest::Contains("expected 3 fields"), ValidationError);
}

TEST_CASE("load_traffic_panel: sparse error lists at most five missing cells") {
  TempDir tmp;
  // 3 POIs x 4 days with only one cell filled per POI: 9 cells missing.
  std::string body;
  body += "P1,2018-11-05,1\n";
  body += "P2,2018-11-06,1\n";
  body += "P3,2018-11-07,1\n";
  body += "P1,2018-11-08,1\n";
  try {
    load_traffic_panel(tmp.file("sparse.csv", kTrafficHeader + body));
    FAIL("expected ValidationError");
  } catch (const ValidationError& e) {
    std::string msg = e.what();
    CHECK(msg.find("(and 3 more)") != std::string::npos);
  }
}

TEST_CASE("load_admin_records: clean rows with recoverable rejects") {
  TempDir tmp;
  std::string path = tmp.file("admin.csv", kAdminHeader +
                                               "v1,PR-03,2018-11-06,72,white\n"
                                               "v2,PR-03,2018-11-06,150,black\n"
                                               "v3,PR-04,2018-11-06,30,asian\n"
                                               "v4,,2018-11-06,40,white\n"
                                               ",PR-05,2018-11-06,40,white\n"
                                               "v6,PR-05,someday,40,white\n"
                                               "v7,PR-05,2018-11-06,forty,white\n"
                                               "v8,PR-05,2018-11-06,16,white\n"
                                               "v9,PR-05,2018-11-06,40\n");
  AdminLoadResult got = load_admin_records(path);
  REQUIRE(got.records.size() == 2);
  CHECK(got.records[0].person_id == "v1");
  CHECK(got.records[0].age == 72);
  CHECK(got.records[0].race == Race::kWhite);
  CHECK(got.records[1].race == Race::kOtherNonWhite);  // "asian" folds in

  REQUIRE(got.rejects.size() == 7);
  CHECK(got.rejects[0].reason == "age out of range: 150");
  CHECK(got.rejects[0].line_no == 3);
  CHECK(got.rejects[1].reason == "empty precinct_id");
  CHECK(got.rejects[2].reason == "empty person_id");
  CHECK(got.rejects[3].reason == "unparseable date 'someday'");
  CHECK(got.rejects[4].reason == "age is not an integer: 'forty'");
  CHECK(got.rejects[5].reason == "age out of range: 16");
  CHECK(got.rejects[6].reason == "expected 5 fields, got 4");
  CHECK(got.warnings.empty());
}

TEST_CASE("load_admin_records: one warning per unrecognized race token") {
  TempDir tmp;
  std::string path = tmp.file("admin.csv", kAdminHeader +
                                               "v1,PR-01,2018-11-06,40,martian\n"
                                               "v2,PR-01,2018-11-06,41,martian\n"
                                               "v3,PR-01,2018-11-06,42,venusian\n");
  AdminLoadResult got = load_admin_records(path);
  CHECK(got.records.size() == 3);
  for (const auto& rec : got.records) CHECK(rec.race == Race::kUnknown);
  REQUIRE(got.warnings.size() == 2);
  CHECK(got.warnings[0].find("martian") != std::string::npos);
  CHECK(got.warnings[1].find("venusian") != std::string::npos);
}

TEST_CASE("load_crosswalk: entries, rejects, ambiguity") {
  TempDir tmp;
  std::string path = tmp.file("crosswalk.csv", kCrosswalkHeader +
                                                   "PR-01,Town Hall,1 Main St,Town,NC,27001\n"
                                                   ",No Precinct,2 Oak St,Town,NC,27001\n"
                                                   "PR-02,,3 Elm St,Town,NC,27001\n"
                                                   "PR-04,No Address,,Town,NC,27001\n"
                                                   "PR-03,Fire House,4 Pine St,Town,NC,27001\n");
  CrosswalkLoadResult got = load_crosswalk(path);
  REQUIRE(got.entries.size() == 2);
  CHECK(got.entries[0].precinct_id == "PR-01");
  CHECK(got.entries[0].location_name == "Town Hall");
  CHECK(got.entries[1].precinct_id == "PR-03");
  REQUIRE(got.rejects.size() == 3);
  CHECK(got.rejects[0].reason == "empty precinct_id");
  CHECK(got.rejects[1].reason == "empty location_name");
  CHECK(got.rejects[2].reason == "empty street_address");

  CHECK_THROWS_WITH_AS(
      load_crosswalk(tmp.file("ambig.csv", kCrosswalkHeader +
                                               "PR-01,Town Hall,1 Main St,Town,NC,27001\n"
                                               "PR-01,Library,9 Book Rd,Town,NC,27001\n")),
      doctest::Contains("ambiguous precinct"), ValidationError);
}

TEST_CASE("load_poi_directory: entries, category parsing, duplicate ids") {
  TempDir tmp;
  std::string path = tmp.file("dir.csv", kDirectoryHeader +
                                             "POI-1,Town Hall,1 Main St,Town,NC,27001,community-center\n"
                                             "POI-2,Oak School,2 Oak St,Town,NC,27001,school\n"
                                             "POI-3,Some Shop,3 Elm St,Town,NC,27001,retail\n"
                                             ",Anon,4 Pine St,Town,NC,27001,other\n");
  DirectoryLoadResult got = load_poi_directory(path);
  REQUIRE(got.directory.entries.size() == 3);
  CHECK(got.directory.entries[0].category == PoiCategory::kCommunityCenter);
  CHECK(got.directory.entries[1].category == PoiCategory::kSchool);
  CHECK(got.directory.entries[2].category == PoiCategory::kOther);  // unknown token folds
  REQUIRE(got.rejects.size() == 1);
  CHECK(got.rejects[0].reason == "empty poi_id");

  CHECK_THROWS_WITH_AS(
      load_poi_directory(tmp.file("dup.csv", kDirectoryHeader +
                                                 "POI-1,A,1 Main St,Town,NC,27001,other\n"
                                                 "POI-1,B,2 Oak St,Town,NC,27001,other\n")),
      doctest::Contains("duplicate poi_id"), ValidationError);
}

TEST_CASE("DatasetManifest: validation") {
  DatasetManifest manifest;
  manifest.traffic_path = "a.csv";
  manifest.admin_path = "b.csv";
  manifest.crosswalk_path = "c.csv";
  manifest.poi_directory_path = "d.csv";
  manifest.election_date = Date::parse("2018-11-06");
  CHECK_NOTHROW(manifest.validate());

  manifest.excluded_dates.insert(Date::parse("2018-11-06"));
  CHECK_THROWS_WITH_AS(manifest.validate(), doctest::Contains("excluded"), ValidationError);

  manifest.excluded_dates.clear();
  manifest.admin_path = "a.csv";
  CHECK_THROWS_WITH_AS(manifest.validate(), doctest::Contains("distinct"), ValidationError);
}

TEST_CASE("render/load round-trip: traffic") {
  TempDir tmp;
  TrafficPanel panel;
  panel.pois = {"B", "A"};  // not sorted: canonical form preserves panel order
  panel.days = {Date::parse("2018-11-05"), Date::parse("2018-11-06")};
  panel.counts = {5, 6, 7, 8};
  panel.finalize();

  std::string rendered = render_traffic_csv(panel);
  TrafficPanel back = load_traffic_panel(tmp.file("t.csv", rendered));
  CHECK(back.pois == panel.pois);
  CHECK(back.days == panel.days);
  CHECK(back.counts == panel.counts);
  // Rendering is canonical: a second render reproduces the same bytes.
  CHECK(render_traffic_csv(back) == rendered);
}

TEST_CASE("render/load round-trip: admin records") {
  TempDir tmp;
  std::vector<AdminVisitRecord> records;
  AdminVisitRecord rec;
  rec.person_id = "P 001,x";  // exercises quoting
  rec.precinct_id = "WASHINGTON \"WARD\" 1";
  rec.date = Date::parse("2018-11-06");
  rec.age = 71;
  rec.race = Race::kHispanic;
  records.push_back(rec);
  rec.person_id = "P002";
  rec.precinct_id = "PR-02";
  rec.age = 18;
  rec.race = Race::kUnknown;
  records.push_back(rec);

  std::string rendered = render_admin_csv(records);
  AdminLoadResult back = load_admin_records(tmp.file("a.csv", rendered));
  CHECK(back.rejects.empty());
  CHECK(back.warnings.empty());
  REQUIRE(back.records.size() == records.size());
  for (std::size_t i = 0; i < records.size(); ++i) {
    CHECK(back.records[i].person_id == records[i].person_id);
    CHECK(back.records[i].precinct_id == records[i].precinct_id);
    CHECK(back.records[i].date == records[i].date);
    CHECK(back.records[i].age == records[i].age);
    CHECK(back.records[i].race == records[i].race);
  }
  CHECK(render_admin_csv(back.records) == rendered);
}

TEST_CASE("render/load round-trip: crosswalk and directory") {
  TempDir tmp;
  std::vector<CrosswalkEntry> entries{
      {"PR-01", "Town Hall, Annex", "1 Main St", "Town", "NC", "27001"},
      {"PR-02", "Oak School", "2 Oak St", "Town", "NC", "27002"},
  };
  std::string rendered = render_crosswalk_csv(entries);
  CrosswalkLoadResult back = load_crosswalk(tmp.file("c.csv", rendered));
  CHECK(back.rejects.empty());
  REQUIRE(back.entries.size() == 2);
  CHECK(back.entries[0].location_name == "Town Hall, Annex");
  CHECK(render_crosswalk_csv(back.entries) == rendered);

  PoiDirectory dir;
  dir.entries.push_back({"POI-1", "Town Hall", "1 Main St", "Town", "NC", "27001",
                         PoiCategory::kCommunityCenter});
  dir.entries.push_back({"POI-2", "St. Mary's, Parish", "2 Oak St", "Town", "NC", "27002",
                         PoiCategory::kChurch});
  std::string dir_rendered = render_directory_csv(dir);
  DirectoryLoadResult dir_back = load_poi_directory(tmp.file("d.csv", dir_rendered));
  CHECK(dir_back.rejects.empty());
  REQUIRE(dir_back.directory.entries.size() == 2);
  CHECK(dir_back.directory.entries[1].name == "St. Mary's, Parish");
  CHECK(dir_back.directory.entries[1].category == PoiCategory::kChurch);
  CHECK(render_directory_csv(dir_back.directory) == dir_rendered);
}

TEST_CASE("render_rejects_csv: schema") {
  std::vector<RejectedRow> rejects{{4, "age out of range: 150"}, {9, "empty person_id"}};
  CHECK(render_rejects_csv(rejects) ==
        "line,reason\n"
        "4,age out of range: 150\n"
        "9,empty person_id\n");
  CHECK(render_rejects_csv({}) == "line,reason\n");
}
