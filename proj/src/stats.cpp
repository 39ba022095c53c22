#include "mobaudit/stats.hpp"

#include <algorithm>
#include <boost/math/distributions/students_t.hpp>
#include <cmath>
#include <numeric>
#include <random>

namespace mobaudit {

namespace {

std::uint64_t mix64(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

void check_finite(const std::vector<double>& x) {
  for (double v : x) {
    if (!std::isfinite(v)) throw NumericError("NaN element in input vector");
  }
}

// Pearson of two rank vectors where the second may be permuted in place.
double rank_pearson(const std::vector<double>& cx, double ssx, const std::vector<double>& ry,
                    double mean_y, double ssy) {
  double dot = 0.0;
  for (std::size_t i = 0; i < cx.size(); ++i) dot += cx[i] * (ry[i] - mean_y);
  return dot / std::sqrt(ssx * ssy);
}

}  // namespace

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t index) {
  return mix64(seed + (index + 1) * 0x9E3779B97F4A7C15ULL);
}

RankVector rank(const std::vector<double>& x) {
  if (x.empty()) throw ValidationError("rank of empty vector");
  check_finite(x);

  std::vector<std::size_t> order(x.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return x[a] < x[b]; });

  RankVector out;
  out.values.resize(x.size());
  std::size_t i = 0;
  while (i < order.size()) {
    std::size_t j = i;
    while (j + 1 < order.size() && x[order[j + 1]] == x[order[i]]) ++j;
    // positions i..j share the value; assign the average of ranks i+1..j+1
    double avg = 0.5 * static_cast<double>(i + j) + 1.0;
    for (std::size_t k = i; k <= j; ++k) out.values[order[k]] = avg;
    if (j > i) out.ties_present = true;
    i = j + 1;
  }
  return out;
}

double pearson(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size()) throw ValidationError("pearson: length mismatch");
  if (x.size() < 3) throw ValidationError("pearson: need at least 3 observations");
  check_finite(x);
  check_finite(y);

  const std::size_t n = x.size();
  double mx = std::accumulate(x.begin(), x.end(), 0.0) / static_cast<double>(n);
  double my = std::accumulate(y.begin(), y.end(), 0.0) / static_cast<double>(n);
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    double dx = x[i] - mx;
    double dy = y[i] - my;
    sxy += dx * dy;
    sxx += dx * dx;
    syy += dy * dy;
  }
  if (sxx == 0.0 || syy == 0.0) throw NumericError("degenerate vector (zero variance)");
  return sxy / std::sqrt(sxx * syy);
}

double spearman(const std::vector<double>& x, const std::vector<double>& y) {
  return pearson(rank(x).values, rank(y).values);
}

double student_t_two_sided_p(double t, double dof) {
  if (std::isnan(t)) return 1.0;
  if (std::isinf(t)) return 0.0;
  boost::math::students_t_distribution<double> dist(dof);
  return 2.0 * boost::math::cdf(boost::math::complement(dist, std::abs(t)));
}

SpearmanResult spearman_pvalue(const std::vector<double>& x, const std::vector<double>& y) {
  const std::size_t n = x.size();
  std::vector<double> rx = rank(x).values;
  std::vector<double> ry = rank(y).values;
  double rho = pearson(rx, ry);

  SpearmanResult out;
  out.rho = rho;

  if (n <= 10) {
    // Exact permutation null: enumerate the distinct arrangements of the
    // y ranks against the fixed x ranks. Distinct arrangements of a
    // multiset are equiprobable, so the fraction is the exact p-value.
    double mx = std::accumulate(rx.begin(), rx.end(), 0.0) / static_cast<double>(n);
    double my = std::accumulate(ry.begin(), ry.end(), 0.0) / static_cast<double>(n);
    std::vector<double> cx(n);
    double ssx = 0.0, ssy = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      cx[i] = rx[i] - mx;
      ssx += cx[i] * cx[i];
      ssy += (ry[i] - my) * (ry[i] - my);
    }
    std::vector<double> perm = ry;
    std::sort(perm.begin(), perm.end());
    std::uint64_t total = 0, hits = 0;
    const double target = std::abs(rho) - 1e-12;
    do {
      ++total;
      if (std::abs(rank_pearson(cx, ssx, perm, my, ssy)) >= target) ++hits;
    } while (std::next_permutation(perm.begin(), perm.end()));
    out.p_value = static_cast<double>(hits) / static_cast<double>(total);
    return out;
  }

  double denom = 1.0 - rho * rho;
  if (denom <= 0.0) {
    out.p_value = 0.0;
    return out;
  }
  double t = rho * std::sqrt(static_cast<double>(n - 2) / denom);
  out.p_value = student_t_two_sided_p(t, static_cast<double>(n - 2));
  return out;
}

RegressionFit ols_fit(const Eigen::MatrixXd& design, const Eigen::VectorXd& response,
                      const std::vector<std::string>& names) {
  const auto n = design.rows();
  const auto p = design.cols();
  if (response.rows() != n) throw ValidationError("ols_fit: response length mismatch");
  if (static_cast<std::size_t>(p) != names.size()) {
    throw ValidationError("ols_fit: one name per design column required");
  }
  if (n < p + 1) throw ValidationError("ols_fit: need at least one more row than columns");

  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(design);
  if (qr.rank() < p) throw NumericError("collinear design");

  Eigen::VectorXd beta = qr.solve(response);
  Eigen::VectorXd resid = response - design * beta;
  double sse = resid.squaredNorm();

  std::size_t dof = static_cast<std::size_t>(n - p);
  double sigma2 = sse / static_cast<double>(dof);

  Eigen::MatrixXd xtx = design.transpose() * design;
  Eigen::MatrixXd xtx_inv = xtx.ldlt().solve(Eigen::MatrixXd::Identity(p, p));

  bool has_intercept = false;
  for (Eigen::Index j = 0; j < p && !has_intercept; ++j) {
    double first = design(0, j);
    if (first != 0.0 && (design.col(j).array() == first).all()) has_intercept = true;
  }

  double sst;
  if (has_intercept) {
    double mean_y = response.mean();
    sst = (response.array() - mean_y).square().sum();
  } else {
    sst = response.squaredNorm();
  }

  RegressionFit fit;
  fit.names = names;
  fit.n_obs = static_cast<std::size_t>(n);
  fit.dof = dof;
  fit.residual_std_error = std::sqrt(sigma2);
  fit.r_squared = sst > 0.0 ? 1.0 - sse / sst : (sse <= 1e-24 ? 1.0 : 0.0);
  fit.coefficients.resize(p);
  fit.std_errors.resize(p);
  fit.p_values.resize(p);
  for (Eigen::Index j = 0; j < p; ++j) {
    fit.coefficients[j] = beta(j);
    double var = std::max(0.0, sigma2 * xtx_inv(j, j));
    double se = std::sqrt(var);
    fit.std_errors[j] = se;
    if (se > 0.0) {
      fit.p_values[j] = student_t_two_sided_p(beta(j) / se, static_cast<double>(dof));
    } else {
      fit.p_values[j] = beta(j) == 0.0 ? 1.0 : 0.0;
    }
  }
  return fit;
}

double bootstrap_se(const std::function<double(const std::vector<std::size_t>&)>& statistic,
                    std::size_t n_units, int n_resamples, std::uint64_t seed) {
  if (n_resamples < 100) throw ValidationError("bootstrap: need at least 100 resamples");
  if (n_units == 0) throw ValidationError("bootstrap: no units");

  std::vector<double> values;
  values.reserve(static_cast<std::size_t>(n_resamples));
  std::vector<std::size_t> indices(n_units);
  for (int b = 0; b < n_resamples; ++b) {
    std::mt19937_64 rng(derive_seed(seed, static_cast<std::uint64_t>(b)));
    std::uniform_int_distribution<std::size_t> pick(0, n_units - 1);
    for (auto& idx : indices) idx = pick(rng);
    try {
      values.push_back(statistic(indices));
    } catch (const std::exception& e) {
      throw NumericError("bootstrap statistic failed on resample " + std::to_string(b) + ": " +
                         e.what());
    }
  }

  double mean = std::accumulate(values.begin(), values.end(), 0.0) /
                static_cast<double>(values.size());
  double ss = 0.0;
  for (double v : values) ss += (v - mean) * (v - mean);
  return std::sqrt(ss / static_cast<double>(values.size() - 1));
}

}  // namespace mobaudit
