#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "mobaudit/ingest.hpp"
#include "mobaudit/types.hpp"

// Synthetic-world generator with known ground truth. A world is built in two
// stages: a fixed structure (per-POI baseline rates, turnout, demographic
// composition, capture rates) and a stochastic realization (daily counts,
// individual visit records). Splitting the stages lets tests average the
// realization noise away while holding the structure fixed.

namespace mobaudit {

struct ScenarioSpec {
  std::size_t n_pois = 558;
  std::size_t n_days = 45;           // panel weekdays; 45 gives a 41-day placebo set
  std::size_t election_index = 26;   // 0-based position among the panel weekdays
  Date start_date = Date::from_ymd(2018, 10, 1);

  double lambda_min = 20.0;          // baseline Poisson rate, log-uniform
  double lambda_max = 200.0;
  double turnout_median = 1000.0;    // lognormal turnout
  double turnout_sigma = 0.5;

  double age_alpha = 2.0;            // Beta parameters for A (proportion over 65)
  double age_beta = 5.5;
  double race_alpha = 1.6;           // Beta parameters for R (proportion non-white)
  double race_beta = 3.4;
  double copula_rho = -0.3;          // Gaussian copula between A and R

  double capture_base = 0.02;        // c_i = clamp(base * exp(ba*A + br*R), 0, 1)
  double capture_beta_age = 0.0;
  double capture_beta_race = 0.0;

  double jitter_sigma = 0.05;        // mean-one lognormal day-level rate jitter
  bool inject_election_voters = true;

  std::uint64_t seed = 1;

  void validate() const;
};

struct PoiStructure {
  std::vector<double> lambda;
  std::vector<std::int64_t> turnout;
  std::vector<double> prop_over_65;    // A_i
  std::vector<double> prop_non_white;  // R_i
  std::vector<double> capture;         // c_i
};

struct SyntheticWorld {
  TrafficPanel panel;
  std::vector<AdminVisitRecord> records;
  std::vector<CrosswalkEntry> crosswalk;
  PoiDirectory directory;
  PoiStructure truth;
  Date election_date;
};

// The panel's weekday dates: n_days weekdays starting at the first weekday
// on or after start_date.
std::vector<Date> panel_dates(const ScenarioSpec& spec);

// Draws the world structure from the scenario's seed. Errors if more than
// 10% of the capture rates hit the [0, 1] clamp (a saturated design has no
// usable demographic gradient).
PoiStructure build_structure(const ScenarioSpec& spec);

// One stochastic realization of the daily panel given a structure: counts
// are Poisson(lambda_i * jitter) plus, on the election day, a
// Binomial(turnout_i, capture_i) voter injection.
TrafficPanel realize_panel(const ScenarioSpec& spec, const PoiStructure& truth,
                           std::uint64_t noise_seed);

// One realization of the individual admin visit records (all dated on the
// election day; ages and races drawn from the POI's composition).
std::vector<AdminVisitRecord> realize_records(const ScenarioSpec& spec,
                                              const PoiStructure& truth,
                                              std::uint64_t noise_seed);

// Full world: structure, panel, records, and a clean one-to-one crosswalk
// and POI directory whose names link exactly.
SyntheticWorld generate(const ScenarioSpec& spec);

// ground_truth.csv: poi_id,capture_rate,lambda
std::string render_ground_truth_csv(const SyntheticWorld& world);

}  // namespace mobaudit
