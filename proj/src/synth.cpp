#include "mobaudit/synth.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <random>

#include <boost/math/distributions/beta.hpp>

#include "mobaudit/csv.hpp"
#include "mobaudit/stats.hpp"

namespace mobaudit {

namespace {

// Seed-stream tags so each component of the generator draws independently.
constexpr std::uint64_t kStreamLambda = 101;
constexpr std::uint64_t kStreamTurnout = 102;
constexpr std::uint64_t kStreamDemo = 103;
constexpr std::uint64_t kStreamPanel = 201;
constexpr std::uint64_t kStreamRecords = 202;

double standard_normal_cdf(double z) {
  return 0.5 * std::erfc(-z / std::sqrt(2.0));
}

double clamp01_open(double u) {
  return std::clamp(u, 1e-12, 1.0 - 1e-12);
}

std::string zero_padded(const char* prefix, std::size_t i, int width) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%s%0*zu", prefix, width, i);
  return std::string(buf);
}

const std::vector<std::string>& town_words() {
  static const std::vector<std::string> words = {
      "LAKESIDE", "RIVERBEND", "OAKDALE",  "MAPLEWOOD", "HILLCREST", "BROOKSIDE",
      "FAIRVIEW", "WESTGATE",  "EASTVIEW", "NORTHGATE", "SOUTHPORT", "CEDARVALE",
      "ELMWOOD",  "PINEHURST", "GLENVIEW", "STONEGATE", "MEADOWBROOK", "CLEARWATER",
  };
  return words;
}

const std::vector<std::string>& street_words() {
  static const std::vector<std::string> words = {
      "MAIN",   "OAK",    "ELM",    "CHURCH", "MAPLE",  "CEDAR", "WALNUT", "PARK",
      "SPRING", "RIDGE",  "SUNSET", "FOREST", "RIVER",  "LAKE",  "HILL",   "MILL",
      "FRANKLIN", "JACKSON", "MADISON", "HARRISON",
  };
  return words;
}

}  // namespace

void ScenarioSpec::validate() const {
  if (n_pois == 0) throw ValidationError("scenario needs at least one POI");
  if (n_days == 0) throw ValidationError("scenario needs at least one day");
  if (election_index >= n_days) {
    throw ValidationError("election index " + std::to_string(election_index) +
                          " out of range for " + std::to_string(n_days) + " days");
  }
  if (!(lambda_min > 0.0) || lambda_max < lambda_min) {
    throw ValidationError("lambda range must satisfy 0 < min <= max");
  }
  if (!(turnout_median > 0.0) || !(turnout_sigma >= 0.0)) {
    throw ValidationError("turnout parameters must be positive");
  }
  for (double b : {age_alpha, age_beta, race_alpha, race_beta}) {
    if (!(b > 0.0)) throw ValidationError("Beta shape parameters must be positive");
  }
  if (!(copula_rho > -1.0 && copula_rho < 1.0)) {
    throw ValidationError("copula correlation must be in (-1, 1)");
  }
  if (!(capture_base > 0.0) || capture_base > 1.0) {
    throw ValidationError("capture base must be in (0, 1]");
  }
  if (!(jitter_sigma >= 0.0)) throw ValidationError("jitter sigma must be non-negative");
}

std::vector<Date> panel_dates(const ScenarioSpec& spec) {
  std::vector<Date> dates;
  dates.reserve(spec.n_days);
  Date d = spec.start_date;
  while (d.is_weekend()) d = d.plus_days(1);
  while (dates.size() < spec.n_days) {
    dates.push_back(d);
    d = d.next_weekday();
  }
  return dates;
}

PoiStructure build_structure(const ScenarioSpec& spec) {
  spec.validate();
  const std::size_t n = spec.n_pois;
  PoiStructure truth;
  truth.lambda.resize(n);
  truth.turnout.resize(n);
  truth.prop_over_65.resize(n);
  truth.prop_non_white.resize(n);
  truth.capture.resize(n);

  {
    std::mt19937_64 rng(derive_seed(spec.seed, kStreamLambda));
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    double log_min = std::log(spec.lambda_min);
    double log_max = std::log(spec.lambda_max);
    for (std::size_t i = 0; i < n; ++i) {
      truth.lambda[i] = std::exp(log_min + (log_max - log_min) * unif(rng));
    }
  }
  {
    std::mt19937_64 rng(derive_seed(spec.seed, kStreamTurnout));
    std::normal_distribution<double> normal(0.0, 1.0);
    double mu = std::log(spec.turnout_median);
    for (std::size_t i = 0; i < n; ++i) {
      double v = std::exp(mu + spec.turnout_sigma * normal(rng));
      truth.turnout[i] = std::max<std::int64_t>(1, std::llround(v));
    }
  }
  {
    // Gaussian copula: correlated uniforms pushed through Beta quantiles.
    std::mt19937_64 rng(derive_seed(spec.seed, kStreamDemo));
    std::normal_distribution<double> normal(0.0, 1.0);
    boost::math::beta_distribution<double> age_dist(spec.age_alpha, spec.age_beta);
    boost::math::beta_distribution<double> race_dist(spec.race_alpha, spec.race_beta);
    double rho = spec.copula_rho;
    double tail = std::sqrt(1.0 - rho * rho);
    for (std::size_t i = 0; i < n; ++i) {
      double z1 = normal(rng);
      double z2 = normal(rng);
      double w = rho * z1 + tail * z2;
      truth.prop_over_65[i] =
          boost::math::quantile(age_dist, clamp01_open(standard_normal_cdf(z1)));
      truth.prop_non_white[i] =
          boost::math::quantile(race_dist, clamp01_open(standard_normal_cdf(w)));
    }
  }

  std::size_t clamped = 0;
  for (std::size_t i = 0; i < n; ++i) {
    double raw = spec.capture_base * std::exp(spec.capture_beta_age * truth.prop_over_65[i] +
                                              spec.capture_beta_race * truth.prop_non_white[i]);
    if (raw > 1.0) {
      clamped += 1;
      raw = 1.0;
    }
    truth.capture[i] = raw;
  }
  if (clamped * 10 > n) {
    throw NumericError("capture model saturated: " + std::to_string(clamped) + " of " +
                       std::to_string(n) + " rates hit 1.0");
  }
  return truth;
}

TrafficPanel realize_panel(const ScenarioSpec& spec, const PoiStructure& truth,
                           std::uint64_t noise_seed) {
  spec.validate();
  if (truth.lambda.size() != spec.n_pois) {
    throw ValidationError("structure size does not match the scenario");
  }
  TrafficPanel panel;
  panel.days = panel_dates(spec);
  panel.pois.reserve(spec.n_pois);
  for (std::size_t i = 0; i < spec.n_pois; ++i) {
    panel.pois.push_back(zero_padded("POI-", i + 1, 5));
  }
  panel.counts.assign(spec.n_pois * spec.n_days, 0);

  double jitter_mean_correction = -0.5 * spec.jitter_sigma * spec.jitter_sigma;
  for (std::size_t i = 0; i < spec.n_pois; ++i) {
    std::mt19937_64 rng(derive_seed(noise_seed, i));
    std::normal_distribution<double> normal(0.0, 1.0);
    for (std::size_t d = 0; d < spec.n_days; ++d) {
      double jitter =
          std::exp(jitter_mean_correction + spec.jitter_sigma * normal(rng));
      std::poisson_distribution<std::int64_t> pois(truth.lambda[i] * jitter);
      std::int64_t count = pois(rng);
      if (spec.inject_election_voters && d == spec.election_index) {
        std::binomial_distribution<std::int64_t> binom(truth.turnout[i], truth.capture[i]);
        count += binom(rng);
      }
      panel.counts[i * spec.n_days + d] = count;
    }
  }
  panel.finalize();
  return panel;
}

std::vector<AdminVisitRecord> realize_records(const ScenarioSpec& spec,
                                              const PoiStructure& truth,
                                              std::uint64_t noise_seed) {
  spec.validate();
  if (truth.turnout.size() != spec.n_pois) {
    throw ValidationError("structure size does not match the scenario");
  }
  Date election = panel_dates(spec)[spec.election_index];

  std::vector<AdminVisitRecord> records;
  std::size_t person = 0;
  for (std::size_t i = 0; i < spec.n_pois; ++i) {
    std::mt19937_64 rng(derive_seed(noise_seed, i));
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    std::uniform_int_distribution<int> age_old(65, 95);
    std::uniform_int_distribution<int> age_young(18, 64);
    for (std::int64_t v = 0; v < truth.turnout[i]; ++v) {
      AdminVisitRecord rec;
      person += 1;
      rec.person_id = zero_padded("P", person, 8);
      rec.precinct_id = zero_padded("PR-", i + 1, 5);
      rec.date = election;
      rec.age = (unif(rng) < truth.prop_over_65[i]) ? age_old(rng) : age_young(rng);
      if (unif(rng) < truth.prop_non_white[i]) {
        double u = unif(rng);
        rec.race = u < 0.6 ? Race::kBlack : (u < 0.8 ? Race::kHispanic : Race::kOtherNonWhite);
      } else {
        rec.race = Race::kWhite;
      }
      records.push_back(std::move(rec));
    }
  }
  return records;
}

SyntheticWorld generate(const ScenarioSpec& spec) {
  SyntheticWorld world;
  world.truth = build_structure(spec);
  world.panel = realize_panel(spec, world.truth, derive_seed(spec.seed, kStreamPanel));
  world.records = realize_records(spec, world.truth, derive_seed(spec.seed, kStreamRecords));
  world.election_date = panel_dates(spec)[spec.election_index];

  const auto& towns = town_words();
  const auto& streets = street_words();
  for (std::size_t i = 0; i < spec.n_pois; ++i) {
    const std::string& town = towns[(i / 4) % towns.size()];
    std::string number = std::to_string(100 + i);
    std::string name;
    PoiCategory category = PoiCategory::kOther;
    switch (i % 4) {
      case 0:
        name = town + " COMMUNITY CENTER " + number;
        category = PoiCategory::kCommunityCenter;
        break;
      case 1:
        name = town + " ELEMENTARY SCHOOL " + number;
        category = PoiCategory::kSchool;
        break;
      case 2:
        name = "FIRST " + town + " CHURCH " + number;
        category = PoiCategory::kChurch;
        break;
      default:
        name = town + " FIRE STATION " + number;
        category = PoiCategory::kFireStation;
        break;
    }
    std::string address = number + " " + streets[i % streets.size()] + " ST";
    std::string zip = zero_padded("27", (i % 1000), 3);

    DirectoryEntry entry;
    entry.poi_id = world.panel.pois[i];
    entry.name = name;
    entry.street_address = address;
    entry.city = "RALEIGH";
    entry.state = "NC";
    entry.zip = zip;
    entry.category = category;
    world.directory.entries.push_back(entry);

    CrosswalkEntry cw;
    cw.precinct_id = zero_padded("PR-", i + 1, 5);
    cw.location_name = name;
    cw.street_address = address;
    cw.city = "RALEIGH";
    cw.state = "NC";
    cw.zip = zip;
    world.crosswalk.push_back(std::move(cw));
  }
  world.directory.validate();
  return world;
}

std::string render_ground_truth_csv(const SyntheticWorld& world) {
  std::string out = "poi_id,capture_rate,lambda\n";
  for (std::size_t i = 0; i < world.panel.pois.size(); ++i) {
    out += csv_join({world.panel.pois[i], format_double(world.truth.capture[i]),
                     format_double(world.truth.lambda[i])});
  }
  return out;
}

}  // namespace mobaudit
