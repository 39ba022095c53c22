#pragma once

#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "mobaudit/ingest.hpp"
#include "mobaudit/types.hpp"

// Deterministic record linkage between precinct polling locations and POI
// directory entries. Matching is conservative: any ambiguity drops the
// precinct rather than guessing, and every drop is accounted for in the
// funnel so reported match rates are auditable.

namespace mobaudit {

// Uppercases, strips punctuation, splits on whitespace, and expands common
// street-type abbreviations (ST -> STREET, AVE -> AVENUE, ...). Numeric
// tokens are kept verbatim: "1100 Auto Center Circle" has four tokens.
std::vector<std::string> normalize_address(const std::string& raw);

// Size of the symmetric difference between two token multisets, counted as
// the larger of the two unmatched sides. Zero iff the multisets are equal.
int token_distance(const std::vector<std::string>& a, const std::vector<std::string>& b);

// Canonical form of a precinct identifier: uppercased, whitespace collapsed,
// numeric tokens stripped of leading zeros, WARD designators removed
// ("washington ward 1" -> "WASHINGTON 1", "0003" -> "3").
std::string normalize_precinct(const std::string& raw);

struct MatchCandidate {
  std::string precinct_id;
  PoiId poi_id;
  double name_similarity = 0.0;      // Jaccard over name token sets
  int address_distance = 0;          // token_distance over street addresses
};

struct LinkageFunnel {
  std::vector<std::string> stages;
  std::vector<std::size_t> counts;
  std::vector<double> rates;  // counts[i] / counts[0]
};

// One-to-one precinct -> POI map keyed by normalized precinct id. `pairs`
// preserves crosswalk input order for canonical output.
struct ResolvedCrosswalk {
  std::vector<std::pair<std::string, PoiId>> pairs;  // original precinct id, poi
  std::unordered_map<std::string, PoiId> by_normalized;

  std::optional<PoiId> resolve(const std::string& raw_precinct) const;
  PrecinctResolver resolver() const;
};

struct MatchOptions {
  int token_threshold = 3;  // drop candidates with address distance >= this
  std::vector<PoiCategory> excluded_categories;
};

struct MatchResult {
  ResolvedCrosswalk resolved;
  LinkageFunnel funnel;
  std::vector<MatchCandidate> matches;  // the surviving one-per-precinct candidates
};

// Stages, in order: input rows, name-candidate found, address filter passed,
// unique candidate, normalized id usable, category filter passed.
MatchResult match_pois(const std::vector<CrosswalkEntry>& crosswalk,
                       const PoiDirectory& directory, const MatchOptions& options = {});

std::string render_funnel_csv(const LinkageFunnel& funnel);
std::string render_resolved_csv(const ResolvedCrosswalk& resolved);

}  // namespace mobaudit
