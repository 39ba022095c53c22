#include "mobaudit/linkage.hpp"

#include <algorithm>
#include <cctype>
#include <map>
#include <set>
#include <unordered_set>

#include "mobaudit/csv.hpp"

namespace mobaudit {

namespace {

const std::unordered_map<std::string, std::string>& street_synonyms() {
  static const std::unordered_map<std::string, std::string> table = {
      {"ST", "STREET"},    {"AVE", "AVENUE"},  {"RD", "ROAD"},     {"DR", "DRIVE"},
      {"CIR", "CIRCLE"},   {"BLVD", "BOULEVARD"}, {"LN", "LANE"},  {"CT", "COURT"},
      {"HWY", "HIGHWAY"},  {"PKWY", "PARKWAY"},   {"PL", "PLACE"}, {"SQ", "SQUARE"},
      {"TER", "TERRACE"},  {"TRL", "TRAIL"},
  };
  return table;
}

std::vector<std::string> tokenize_upper(const std::string& raw) {
  std::vector<std::string> tokens;
  std::string current;
  for (char c : raw) {
    unsigned char uc = static_cast<unsigned char>(c);
    if (std::isalnum(uc)) {
      current.push_back(static_cast<char>(std::toupper(uc)));
    } else if (!current.empty()) {
      tokens.push_back(std::move(current));
      current.clear();
    }
  }
  if (!current.empty()) tokens.push_back(std::move(current));
  return tokens;
}

bool all_digits(const std::string& token) {
  return !token.empty() &&
         std::all_of(token.begin(), token.end(),
                     [](unsigned char c) { return std::isdigit(c) != 0; });
}

// Exact comparison of two Jaccard ratios inter/uni without floating point.
int compare_ratio(std::size_t inter_a, std::size_t uni_a, std::size_t inter_b, std::size_t uni_b) {
  // uni is never zero for non-empty token sets
  unsigned long long lhs = static_cast<unsigned long long>(inter_a) * uni_b;
  unsigned long long rhs = static_cast<unsigned long long>(inter_b) * uni_a;
  if (lhs < rhs) return -1;
  if (lhs > rhs) return 1;
  return 0;
}

}  // namespace

std::vector<std::string> normalize_address(const std::string& raw) {
  std::vector<std::string> tokens = tokenize_upper(raw);
  const auto& synonyms = street_synonyms();
  for (auto& token : tokens) {
    auto it = synonyms.find(token);
    if (it != synonyms.end()) token = it->second;
  }
  return tokens;
}

int token_distance(const std::vector<std::string>& a, const std::vector<std::string>& b) {
  std::map<std::string, int> counts;
  for (const auto& t : a) counts[t] += 1;
  int matched = 0;
  std::map<std::string, int> remaining = counts;
  for (const auto& t : b) {
    auto it = remaining.find(t);
    if (it != remaining.end() && it->second > 0) {
      it->second -= 1;
      matched += 1;
    }
  }
  int unmatched_a = static_cast<int>(a.size()) - matched;
  int unmatched_b = static_cast<int>(b.size()) - matched;
  return std::max(unmatched_a, unmatched_b);
}

std::string normalize_precinct(const std::string& raw) {
  std::vector<std::string> tokens = tokenize_upper(raw);
  std::string out;
  for (auto& token : tokens) {
    if (token == "WARD") continue;
    if (all_digits(token)) {
      std::size_t first = token.find_first_not_of('0');
      token = (first == std::string::npos) ? "0" : token.substr(first);
    }
    if (!out.empty()) out += ' ';
    out += token;
  }
  return out;
}

std::optional<PoiId> ResolvedCrosswalk::resolve(const std::string& raw_precinct) const {
  auto it = by_normalized.find(normalize_precinct(raw_precinct));
  if (it == by_normalized.end()) return std::nullopt;
  return it->second;
}

PrecinctResolver ResolvedCrosswalk::resolver() const {
  // Copy the map so the resolver stays valid past this object's lifetime.
  auto map = by_normalized;
  return [map = std::move(map)](const std::string& raw) -> std::optional<PoiId> {
    auto it = map.find(normalize_precinct(raw));
    if (it == map.end()) return std::nullopt;
    return it->second;
  };
}

MatchResult match_pois(const std::vector<CrosswalkEntry>& crosswalk,
                       const PoiDirectory& directory, const MatchOptions& options) {
  if (directory.entries.empty()) {
    throw ValidationError("POI directory is empty");
  }
  if (options.token_threshold < 1) {
    throw ValidationError("token threshold must be at least 1");
  }
  directory.validate();

  struct DirTokens {
    std::vector<std::string> name_set;  // sorted unique name tokens
    std::vector<std::string> address;
  };
  std::vector<DirTokens> dir_tokens(directory.entries.size());
  for (std::size_t i = 0; i < directory.entries.size(); ++i) {
    auto name = normalize_address(directory.entries[i].name);
    std::sort(name.begin(), name.end());
    name.erase(std::unique(name.begin(), name.end()), name.end());
    dir_tokens[i].name_set = std::move(name);
    dir_tokens[i].address = normalize_address(directory.entries[i].street_address);
  }

  // Per-precinct candidate lists surviving each stage.
  struct PrecinctState {
    const CrosswalkEntry* entry = nullptr;
    std::vector<MatchCandidate> candidates;
  };
  std::vector<PrecinctState> states;
  states.reserve(crosswalk.size());

  std::size_t with_candidates = 0;
  for (const auto& cw : crosswalk) {
    PrecinctState state;
    state.entry = &cw;

    auto name = normalize_address(cw.location_name);
    std::sort(name.begin(), name.end());
    name.erase(std::unique(name.begin(), name.end()), name.end());
    auto address = normalize_address(cw.street_address);

    // Best name similarity, compared exactly as rationals.
    std::size_t best_inter = 0, best_uni = 1;
    std::vector<std::size_t> best;
    for (std::size_t i = 0; i < directory.entries.size(); ++i) {
      const auto& dname = dir_tokens[i].name_set;
      std::vector<std::string> inter;
      std::set_intersection(name.begin(), name.end(), dname.begin(), dname.end(),
                            std::back_inserter(inter));
      std::size_t inter_n = inter.size();
      std::size_t uni_n = name.size() + dname.size() - inter_n;
      if (inter_n == 0 || uni_n == 0) continue;
      int cmp = best.empty() ? 1 : compare_ratio(inter_n, uni_n, best_inter, best_uni);
      if (cmp > 0) {
        best.clear();
        best_inter = inter_n;
        best_uni = uni_n;
        best.push_back(i);
      } else if (cmp == 0) {
        best.push_back(i);
      }
    }

    if (!best.empty()) {
      // Tie-break equal name scores by address distance; keep all that tie.
      int best_dist = 0;
      std::vector<std::size_t> kept;
      for (std::size_t i : best) {
        int dist = token_distance(address, dir_tokens[i].address);
        if (kept.empty() || dist < best_dist) {
          kept.assign(1, i);
          best_dist = dist;
        } else if (dist == best_dist) {
          kept.push_back(i);
        }
      }
      double similarity =
          static_cast<double>(best_inter) / static_cast<double>(best_uni);
      for (std::size_t i : kept) {
        state.candidates.push_back(
            {cw.precinct_id, directory.entries[i].poi_id, similarity, best_dist});
      }
      with_candidates += 1;
    }
    states.push_back(std::move(state));
  }

  // Address filter: candidate survives if its distance is under threshold.
  std::size_t after_address = 0;
  for (auto& state : states) {
    std::erase_if(state.candidates, [&](const MatchCandidate& c) {
      return c.address_distance >= options.token_threshold;
    });
    if (!state.candidates.empty()) after_address += 1;
  }

  // Uniqueness: exactly one surviving candidate per precinct.
  std::size_t after_unique = 0;
  for (auto& state : states) {
    if (state.candidates.size() != 1) {
      state.candidates.clear();
    } else {
      after_unique += 1;
    }
  }

  // Normalized precinct ids must be non-empty and collision-free.
  std::map<std::string, int> norm_counts;
  for (const auto& state : states) {
    if (state.candidates.empty()) continue;
    std::string norm = normalize_precinct(state.entry->precinct_id);
    if (!norm.empty()) norm_counts[norm] += 1;
  }
  std::size_t after_norm = 0;
  for (auto& state : states) {
    if (state.candidates.empty()) continue;
    std::string norm = normalize_precinct(state.entry->precinct_id);
    if (norm.empty() || norm_counts[norm] != 1) {
      state.candidates.clear();
    } else {
      after_norm += 1;
    }
  }

  // Category exclusions.
  std::set<PoiCategory> excluded(options.excluded_categories.begin(),
                                 options.excluded_categories.end());
  std::size_t after_category = 0;
  MatchResult result;
  for (auto& state : states) {
    if (state.candidates.empty()) continue;
    const MatchCandidate& c = state.candidates.front();
    const DirectoryEntry* entry = directory.find(c.poi_id);
    if (entry != nullptr && excluded.count(entry->category) != 0) continue;
    after_category += 1;
    result.matches.push_back(c);
    result.resolved.pairs.emplace_back(state.entry->precinct_id, c.poi_id);
    result.resolved.by_normalized.emplace(normalize_precinct(state.entry->precinct_id), c.poi_id);
  }

  result.funnel.stages = {"input",  "name-candidate",      "address-filter",
                          "unique", "normalized-precinct", "category-filter"};
  result.funnel.counts = {crosswalk.size(), with_candidates, after_address,
                          after_unique,     after_norm,      after_category};
  result.funnel.rates.resize(result.funnel.counts.size(), 0.0);
  if (!crosswalk.empty()) {
    for (std::size_t i = 0; i < result.funnel.counts.size(); ++i) {
      result.funnel.rates[i] = static_cast<double>(result.funnel.counts[i]) /
                               static_cast<double>(crosswalk.size());
    }
  }
  return result;
}

std::string render_funnel_csv(const LinkageFunnel& funnel) {
  std::string out = "stage,count,rate\n";
  for (std::size_t i = 0; i < funnel.stages.size(); ++i) {
    out += csv_join({funnel.stages[i], std::to_string(funnel.counts[i]),
                     format_double(funnel.rates[i])});
  }
  return out;
}

std::string render_resolved_csv(const ResolvedCrosswalk& resolved) {
  std::string out = "precinct_id,poi_id\n";
  for (const auto& [precinct, poi] : resolved.pairs) {
    out += csv_join({precinct, poi});
  }
  return out;
}

}  // namespace mobaudit
