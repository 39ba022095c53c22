#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "mobaudit/types.hpp"

// Numerical statistics core: ranking with ties, Pearson/Spearman correlation
// with significance, ordinary least squares, and bootstrap resampling.

namespace mobaudit {

struct RankVector {
  std::vector<double> values;  // increasing ranks in [1, n]; ties averaged
  bool ties_present = false;
};

// Increasing ranks; tied values receive the average of the ranks they span,
// so the rank sum n(n+1)/2 is preserved.
RankVector rank(const std::vector<double>& x);

// Sample Pearson correlation. Requires equal lengths >= 3 and nonzero
// variance in both arguments.
double pearson(const std::vector<double>& x, const std::vector<double>& y);

struct SpearmanResult {
  double rho = 0.0;
  double p_value = 1.0;
};

double spearman(const std::vector<double>& x, const std::vector<double>& y);

// Two-sided significance: exact permutation enumeration for n <= 10,
// otherwise the t approximation t = rho * sqrt((n-2) / (1 - rho^2)) on
// n - 2 degrees of freedom.
SpearmanResult spearman_pvalue(const std::vector<double>& x, const std::vector<double>& y);

// Ordinary least squares with homoskedastic standard errors. The design is
// used as given; include an intercept column of ones when wanted. R^2 is
// centered when a constant column is present, uncentered otherwise.
RegressionFit ols_fit(const Eigen::MatrixXd& design, const Eigen::VectorXd& response,
                      const std::vector<std::string>& names);

// Two-sided p-value for a t statistic on `dof` degrees of freedom.
double student_t_two_sided_p(double t, double dof);

// Standard deviation of `statistic` over B resamples (with replacement) of
// the unit indices 0..n_units-1. Deterministic given `seed`; each resample
// uses the sub-seed derive_seed(seed, b).
double bootstrap_se(const std::function<double(const std::vector<std::size_t>&)>& statistic,
                    std::size_t n_units, int n_resamples, std::uint64_t seed);

// Deterministic, well-mixed sub-seed for a (seed, index) pair.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t index);

}  // namespace mobaudit
