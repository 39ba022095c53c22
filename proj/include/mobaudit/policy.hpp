#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "mobaudit/types.hpp"

// Policy-distortion analyses: what would a decision-maker who trusts the
// panel get wrong? Two instruments: a rank regression explaining the panel's
// importance ordering of sites, and a resource-allocation comparison between
// panel-derived and ground-truth-derived shares across demographic groups.

namespace mobaudit {

// OLS of descending ground-truth rank on descending marginal-traffic rank
// plus demographic composition (percentage points). Rank 1 is the busiest
// site. Constant demographic columns carry no cross-site information and are
// reported with coefficient 0, standard error 0, p-value 1.
RegressionFit rank_regression(const std::vector<double>& turnout,
                              const std::vector<double>& marginal,
                              const std::vector<double>& age_pct,
                              const std::vector<double>& race_pct);

// 2x2 demographic grid: age split x race split. Thresholds default to the
// sample medians; group labels are fixed.
struct SplitSpec {
  std::optional<double> age_threshold;   // nullopt: median of age
  std::optional<double> race_threshold;  // nullopt: median of race
};

inline constexpr std::array<const char*, 4> kGroupLabels = {
    "young-white", "young-nonwhite", "older-white", "older-nonwhite"};

// Group index per POI: 2 * (age > split) + (race > split).
std::vector<int> assign_groups(const std::vector<double>& age, const std::vector<double>& race,
                               const SplitSpec& split = {});

// Weight share of each group. Weights must be non-negative with a positive
// total; shares sum to one.
std::array<double, 4> allocate(const std::vector<double>& weights,
                               const std::vector<int>& groups);

struct AllocationGroup {
  std::string group;
  double observed_share = 0.0;   // from panel marginal traffic (floored at 0)
  double optimal_share = 0.0;    // from ground-truth turnout
  double observed_se = 0.0;
  double optimal_se = 0.0;
  double diff_se = 0.0;
  double percent_difference = 0.0;  // (observed - optimal) / optimal * 100
  bool significant = false;         // |observed - optimal| > 1.96 * diff_se
};

struct AllocationComparison {
  std::array<AllocationGroup, 4> groups;
  int n_resamples = 0;
  std::uint64_t seed = 0;
};

// Bootstrap comparison of panel-derived and turnout-derived shares. POIs are
// resampled jointly (group assignments fixed at the full-sample split), so
// diff_se reflects the correlation between the two share estimates.
AllocationComparison compare_allocations(const std::vector<double>& marginal,
                                         const std::vector<double>& turnout,
                                         const std::vector<double>& age,
                                         const std::vector<double>& race,
                                         int n_resamples, std::uint64_t seed,
                                         const SplitSpec& split = {});

std::string render_rank_regression_csv(const RegressionFit& fit);
std::string render_allocation_csv(const AllocationComparison& comparison);

}  // namespace mobaudit
