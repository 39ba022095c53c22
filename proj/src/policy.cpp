#include "mobaudit/policy.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include <Eigen/Dense>

#include "mobaudit/csv.hpp"
#include "mobaudit/stats.hpp"

namespace mobaudit {

namespace {

bool is_constant(const std::vector<double>& x) {
  for (double v : x) {
    if (v != x.front()) return false;
  }
  return true;
}

// Descending average-tie ranks: the largest value gets rank 1. Derived from
// the ascending ranks by reflection, which preserves tie averaging.
std::vector<double> descending_ranks(const std::vector<double>& x) {
  RankVector asc = rank(x);
  std::vector<double> out(asc.values.size());
  double n1 = static_cast<double>(asc.values.size()) + 1.0;
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = n1 - asc.values[i];
  return out;
}

double median_of(std::vector<double> x) {
  std::sort(x.begin(), x.end());
  std::size_t n = x.size();
  return (n % 2 == 1) ? x[n / 2] : 0.5 * (x[n / 2 - 1] + x[n / 2]);
}

}  // namespace

RegressionFit rank_regression(const std::vector<double>& turnout,
                              const std::vector<double>& marginal,
                              const std::vector<double>& age_pct,
                              const std::vector<double>& race_pct) {
  const std::size_t n = turnout.size();
  if (marginal.size() != n || age_pct.size() != n || race_pct.size() != n) {
    throw ValidationError("rank regression inputs have mismatched lengths");
  }
  if (n < 5) {
    throw ValidationError("rank regression needs at least 5 POIs");
  }

  std::vector<double> y = descending_ranks(turnout);
  std::vector<double> x = descending_ranks(marginal);

  const std::vector<std::string> names = {"constant", "mobility_rank", "pct_over_65",
                                          "pct_non_white"};
  // Constant demographic columns are dropped from the fit and reported as
  // zero-effect terms rather than failing the whole regression.
  std::vector<const std::vector<double>*> columns = {&x, &age_pct, &race_pct};
  std::vector<bool> kept(columns.size());
  std::vector<std::string> fit_names = {"constant"};
  std::size_t n_kept = 0;
  for (std::size_t c = 0; c < columns.size(); ++c) {
    kept[c] = !is_constant(*columns[c]);
    if (kept[c]) {
      fit_names.push_back(names[c + 1]);
      n_kept += 1;
    }
  }

  Eigen::MatrixXd design(n, n_kept + 1);
  Eigen::VectorXd response(n);
  for (std::size_t i = 0; i < n; ++i) {
    design(i, 0) = 1.0;
    std::size_t col = 1;
    for (std::size_t c = 0; c < columns.size(); ++c) {
      if (kept[c]) design(i, col++) = (*columns[c])[i];
    }
    response(i) = y[i];
  }
  RegressionFit inner = ols_fit(design, response, fit_names);

  RegressionFit fit;
  fit.names = names;
  fit.coefficients.assign(4, 0.0);
  fit.std_errors.assign(4, 0.0);
  fit.p_values.assign(4, 1.0);
  fit.residual_std_error = inner.residual_std_error;
  fit.r_squared = inner.r_squared;
  fit.n_obs = inner.n_obs;
  fit.dof = inner.dof;
  fit.coefficients[0] = inner.coefficients[0];
  fit.std_errors[0] = inner.std_errors[0];
  fit.p_values[0] = inner.p_values[0];
  std::size_t col = 1;
  for (std::size_t c = 0; c < columns.size(); ++c) {
    if (!kept[c]) continue;
    fit.coefficients[c + 1] = inner.coefficients[col];
    fit.std_errors[c + 1] = inner.std_errors[col];
    fit.p_values[c + 1] = inner.p_values[col];
    col += 1;
  }
  return fit;
}

std::vector<int> assign_groups(const std::vector<double>& age, const std::vector<double>& race,
                               const SplitSpec& split) {
  if (age.size() != race.size() || age.empty()) {
    throw ValidationError("group assignment needs equal-length non-empty vectors");
  }
  double age_cut = split.age_threshold ? *split.age_threshold : median_of(age);
  double race_cut = split.race_threshold ? *split.race_threshold : median_of(race);
  std::vector<int> groups(age.size());
  for (std::size_t i = 0; i < age.size(); ++i) {
    groups[i] = 2 * (age[i] > age_cut ? 1 : 0) + (race[i] > race_cut ? 1 : 0);
  }
  return groups;
}

std::array<double, 4> allocate(const std::vector<double>& weights,
                               const std::vector<int>& groups) {
  if (weights.size() != groups.size() || weights.empty()) {
    throw ValidationError("allocation needs equal-length non-empty vectors");
  }
  std::array<double, 4> totals{0.0, 0.0, 0.0, 0.0};
  double grand = 0.0;
  for (std::size_t i = 0; i < weights.size(); ++i) {
    if (weights[i] < 0.0) {
      throw ValidationError("negative allocation weight at index " + std::to_string(i));
    }
    if (groups[i] < 0 || groups[i] > 3) {
      throw ValidationError("group index out of range at index " + std::to_string(i));
    }
    totals[static_cast<std::size_t>(groups[i])] += weights[i];
    grand += weights[i];
  }
  if (grand <= 0.0) {
    throw ValidationError("allocation weights sum to zero");
  }
  for (double& t : totals) t /= grand;
  return totals;
}

AllocationComparison compare_allocations(const std::vector<double>& marginal,
                                         const std::vector<double>& turnout,
                                         const std::vector<double>& age,
                                         const std::vector<double>& race,
                                         int n_resamples, std::uint64_t seed,
                                         const SplitSpec& split) {
  const std::size_t n = marginal.size();
  if (turnout.size() != n || age.size() != n || race.size() != n || n == 0) {
    throw ValidationError("allocation comparison inputs have mismatched lengths");
  }
  if (n_resamples < 100) {
    throw ValidationError("allocation comparison needs at least 100 bootstrap resamples");
  }

  // Negative marginal traffic carries no allocable weight.
  std::vector<double> observed_w(n), optimal_w(n);
  for (std::size_t i = 0; i < n; ++i) {
    observed_w[i] = std::max(0.0, marginal[i]);
    if (turnout[i] <= 0.0) {
      throw ValidationError("non-positive turnout at index " + std::to_string(i));
    }
    optimal_w[i] = turnout[i];
  }

  // Group assignments are fixed at the full-sample split so the bootstrap
  // measures share uncertainty, not group-definition churn.
  std::vector<int> groups = assign_groups(age, race, split);
  std::array<double, 4> observed = allocate(observed_w, groups);
  std::array<double, 4> optimal = allocate(optimal_w, groups);

  std::array<std::vector<double>, 4> obs_draws, opt_draws, diff_draws;
  for (int g = 0; g < 4; ++g) {
    obs_draws[g].reserve(n_resamples);
    opt_draws[g].reserve(n_resamples);
    diff_draws[g].reserve(n_resamples);
  }

  std::vector<double> re_obs(n), re_opt(n);
  std::vector<int> re_groups(n);
  for (int b = 0; b < n_resamples; ++b) {
    std::mt19937_64 rng(derive_seed(seed, static_cast<std::uint64_t>(b)));
    std::uniform_int_distribution<std::size_t> pick(0, n - 1);
    for (std::size_t i = 0; i < n; ++i) {
      std::size_t j = pick(rng);
      re_obs[i] = observed_w[j];
      re_opt[i] = optimal_w[j];
      re_groups[i] = groups[j];
    }
    std::array<double, 4> ob, op;
    try {
      ob = allocate(re_obs, re_groups);
      op = allocate(re_opt, re_groups);
    } catch (const ValidationError& e) {
      throw NumericError("bootstrap resample " + std::to_string(b) + " failed: " + e.what());
    }
    for (int g = 0; g < 4; ++g) {
      obs_draws[g].push_back(ob[g]);
      opt_draws[g].push_back(op[g]);
      diff_draws[g].push_back(ob[g] - op[g]);
    }
  }

  auto sample_sd = [](const std::vector<double>& x) {
    double mean = 0.0;
    for (double v : x) mean += v;
    mean /= static_cast<double>(x.size());
    double ss = 0.0;
    for (double v : x) ss += (v - mean) * (v - mean);
    return std::sqrt(ss / static_cast<double>(x.size() - 1));
  };

  AllocationComparison out;
  out.n_resamples = n_resamples;
  out.seed = seed;
  for (int g = 0; g < 4; ++g) {
    AllocationGroup& row = out.groups[static_cast<std::size_t>(g)];
    row.group = kGroupLabels[static_cast<std::size_t>(g)];
    row.observed_share = observed[g];
    row.optimal_share = optimal[g];
    row.observed_se = sample_sd(obs_draws[g]);
    row.optimal_se = sample_sd(opt_draws[g]);
    row.diff_se = sample_sd(diff_draws[g]);
    if (optimal[g] > 0.0) {
      row.percent_difference = (observed[g] - optimal[g]) / optimal[g] * 100.0;
    } else {
      row.percent_difference = observed[g] > 0.0
                                   ? std::numeric_limits<double>::infinity()
                                   : 0.0;
    }
    row.significant = std::abs(observed[g] - optimal[g]) > 1.96 * row.diff_se;
  }
  return out;
}

std::string render_rank_regression_csv(const RegressionFit& fit) {
  std::string out = "term,coefficient,std_error,p_value\n";
  for (std::size_t i = 0; i < fit.names.size(); ++i) {
    out += csv_join({fit.names[i], format_double(fit.coefficients[i]),
                     format_double(fit.std_errors[i]), format_double(fit.p_values[i])});
  }
  return out;
}

std::string render_allocation_csv(const AllocationComparison& comparison) {
  std::string out =
      "group,observed_share,optimal_share,observed_se,optimal_se,percent_difference,"
      "significant\n";
  for (const auto& g : comparison.groups) {
    out += csv_join({g.group, format_double(g.observed_share), format_double(g.optimal_share),
                     format_double(g.observed_se), format_double(g.optimal_se),
                     format_double(g.percent_difference), g.significant ? "1" : "0"});
  }
  return out;
}

}  // namespace mobaudit
