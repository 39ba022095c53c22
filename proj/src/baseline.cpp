#include "mobaudit/baseline.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <random>

#include <Eigen/Dense>

#include "mobaudit/csv.hpp"
#include "mobaudit/stats.hpp"

namespace mobaudit {

namespace {

constexpr int kMaxWindow = 4;

void check_window(int window) {
  if (window < 1 || window > kMaxWindow) {
    throw ValidationError("baseline window must be in [1, " + std::to_string(kMaxWindow) +
                          "], got " + std::to_string(window));
  }
}

bool usable_day(const TrafficPanel& panel, Date day, const std::set<Date>& excluded) {
  return excluded.count(day) == 0 && panel.day_index(day).has_value();
}

// Available adjacent weekdays on one side of `day`, nearest first, walking
// `window` weekdays out. side = -1 for lags, +1 for leads.
std::vector<Date> side_dates(const TrafficPanel& panel, Date day, int window, int side,
                             const std::set<Date>& excluded, std::vector<Date>* missing) {
  std::vector<Date> available;
  Date cursor = day;
  for (int step = 0; step < window; ++step) {
    cursor = (side < 0) ? cursor.prev_weekday() : cursor.next_weekday();
    if (usable_day(panel, cursor, excluded)) {
      available.push_back(cursor);
    } else if (missing != nullptr) {
      missing->push_back(cursor);
    }
  }
  return available;
}

[[noreturn]] void throw_missing(Date day, const std::vector<Date>& missing) {
  std::string msg = "no full adjacency window around " + day.to_string() + "; missing: ";
  for (std::size_t i = 0; i < missing.size(); ++i) {
    if (i) msg += ", ";
    msg += missing[i].to_string();
  }
  throw ValidationError(msg);
}

}  // namespace

ImputationMethod parse_method(const std::string& token) {
  if (token == "mean") return ImputationMethod::kMean;
  if (token == "regression") return ImputationMethod::kRegression;
  throw ValidationError("unknown imputation method '" + token + "' (expected mean or regression)");
}

std::string to_string(ImputationMethod method) {
  return method == ImputationMethod::kMean ? "mean" : "regression";
}

std::vector<Date> adjacency_window(const TrafficPanel& panel, Date day, int window,
                                   const std::set<Date>& excluded) {
  check_window(window);
  std::vector<Date> missing;
  std::vector<Date> lags = side_dates(panel, day, window, -1, excluded, &missing);
  std::vector<Date> leads = side_dates(panel, day, window, +1, excluded, &missing);
  if (!missing.empty()) throw_missing(day, missing);
  std::vector<Date> out(lags.rbegin(), lags.rend());
  out.insert(out.end(), leads.begin(), leads.end());
  return out;
}

bool has_adjacency_window(const TrafficPanel& panel, Date day, int window,
                          const std::set<Date>& excluded) {
  check_window(window);
  std::vector<Date> missing;
  side_dates(panel, day, window, -1, excluded, &missing);
  side_dates(panel, day, window, +1, excluded, &missing);
  return missing.empty();
}

BaselineEstimate mean_baseline(const TrafficPanel& panel, Date day, int window,
                               const std::set<Date>& excluded) {
  std::vector<Date> dates = adjacency_window(panel, day, window, excluded);
  std::vector<std::size_t> cols;
  cols.reserve(dates.size());
  for (Date d : dates) cols.push_back(*panel.day_index(d));

  BaselineEstimate est;
  est.pois = panel.pois;
  est.day = day;
  est.method = ImputationMethod::kMean;
  est.window = window;
  est.values.resize(panel.n_pois());
  for (std::size_t p = 0; p < panel.n_pois(); ++p) {
    double sum = 0.0;
    for (std::size_t c : cols) sum += static_cast<double>(panel.count(p, c));
    est.values[p] = sum / static_cast<double>(cols.size());
  }
  return est;
}

namespace {

// Feature vector (2*window lag/lead counts) for one (poi, day) cell. When a
// weekday on a side is unavailable, the nearest available weekday on that
// same side stands in for it; an empty side is an error.
std::vector<double> cell_features(const TrafficPanel& panel, std::size_t poi, Date day,
                                  int window, const std::set<Date>& excluded) {
  std::vector<double> features;
  features.reserve(2 * static_cast<std::size_t>(window));
  for (int side : {-1, +1}) {
    std::vector<Date> available = side_dates(panel, day, window, side, excluded, nullptr);
    if (available.empty()) {
      throw ValidationError("no " + std::string(side < 0 ? "prior" : "following") +
                            " weekday data available around " + day.to_string());
    }
    for (int m = 1; m <= window; ++m) {
      std::size_t pick = std::min<std::size_t>(m, available.size()) - 1;
      features.push_back(
          static_cast<double>(panel.count(poi, *panel.day_index(available[pick]))));
    }
  }
  return features;
}

struct PooledFit {
  std::vector<double> coefficients;  // intercept + 2*window features
};

// Pooled OLS over the given training cells; all-zero feature columns are
// dropped and reported with coefficient zero.
PooledFit fit_pooled(const std::vector<std::vector<double>>& features,
                     const std::vector<double>& targets, int window) {
  const std::size_t n = features.size();
  const std::size_t k = 2 * static_cast<std::size_t>(window);
  std::vector<bool> keep(k, false);
  for (const auto& row : features) {
    for (std::size_t j = 0; j < k; ++j) {
      if (row[j] != 0.0) keep[j] = true;
    }
  }
  std::vector<std::size_t> kept;
  for (std::size_t j = 0; j < k; ++j) {
    if (keep[j]) kept.push_back(j);
  }

  if (n < kept.size() + 2) {
    throw ValidationError("not enough training points (" + std::to_string(n) + ") for " +
                          std::to_string(kept.size()) + " regression features");
  }

  Eigen::MatrixXd design(n, kept.size() + 1);
  Eigen::VectorXd y(n);
  for (std::size_t i = 0; i < n; ++i) {
    design(i, 0) = 1.0;
    for (std::size_t j = 0; j < kept.size(); ++j) design(i, j + 1) = features[i][kept[j]];
    y(i) = targets[i];
  }

  std::vector<std::string> names(kept.size() + 1, "feature");
  RegressionFit fit = ols_fit(design, y, names);

  PooledFit out;
  out.coefficients.assign(k + 1, 0.0);
  out.coefficients[0] = fit.coefficients[0];
  for (std::size_t j = 0; j < kept.size(); ++j) {
    out.coefficients[kept[j] + 1] = fit.coefficients[j + 1];
  }
  return out;
}

double predict(const PooledFit& fit, const std::vector<double>& features) {
  double value = fit.coefficients[0];
  for (std::size_t j = 0; j < features.size(); ++j) {
    value += fit.coefficients[j + 1] * features[j];
  }
  return value;
}

}  // namespace

BaselineEstimate regression_baseline(const TrafficPanel& panel, Date day, int window,
                                     const std::vector<Date>& training_days,
                                     const std::set<Date>& excluded) {
  check_window(window);
  if (training_days.empty()) {
    throw ValidationError("regression baseline needs at least one training day");
  }

  std::vector<std::vector<double>> features;
  std::vector<double> targets;
  features.reserve(training_days.size() * panel.n_pois());
  for (Date t : training_days) {
    auto day_idx = panel.day_index(t);
    if (!day_idx) {
      throw ValidationError("training day " + t.to_string() + " not in panel");
    }
    adjacency_window(panel, t, window, excluded);  // throws if incomplete
    for (std::size_t p = 0; p < panel.n_pois(); ++p) {
      features.push_back(cell_features(panel, p, t, window, excluded));
      targets.push_back(static_cast<double>(panel.count(p, *day_idx)));
    }
  }

  PooledFit fit = fit_pooled(features, targets, window);

  BaselineEstimate est;
  est.pois = panel.pois;
  est.day = day;
  est.method = ImputationMethod::kRegression;
  est.window = window;
  est.values.resize(panel.n_pois());
  for (std::size_t p = 0; p < panel.n_pois(); ++p) {
    est.values[p] = predict(fit, cell_features(panel, p, day, window, excluded));
  }
  return est;
}

ImputationMetrics prediction_metrics(const std::vector<double>& actual,
                                     const std::vector<double>& predicted) {
  if (actual.empty() || actual.size() != predicted.size()) {
    throw ValidationError("prediction metrics need equal-length non-empty vectors");
  }
  const double n = static_cast<double>(actual.size());
  double sse = 0.0, sae = 0.0, mean = 0.0;
  for (double a : actual) mean += a;
  mean /= n;
  double sst = 0.0;
  for (std::size_t i = 0; i < actual.size(); ++i) {
    double err = actual[i] - predicted[i];
    sse += err * err;
    sae += std::abs(err);
    sst += (actual[i] - mean) * (actual[i] - mean);
  }
  ImputationMetrics m;
  m.rmse = std::sqrt(sse / n);
  m.mae = sae / n;
  m.r2 = (sst > 0.0) ? 1.0 - sse / sst : (sse <= 1e-24 ? 1.0 : 0.0);
  m.n_points = actual.size();
  return m;
}

ImputationMetrics evaluate_imputation(const TrafficPanel& panel, ImputationMethod method,
                                      int window, const std::vector<Date>& eval_days,
                                      int folds, int repeats, std::uint64_t seed,
                                      const std::set<Date>& excluded) {
  check_window(window);
  if (folds < 2) throw ValidationError("cross-validation needs at least 2 folds");
  if (repeats < 1) throw ValidationError("cross-validation needs at least 1 repeat");
  if (eval_days.empty()) throw ValidationError("no evaluation days given");
  for (Date d : eval_days) {
    if (!panel.day_index(d)) {
      throw ValidationError("evaluation day " + d.to_string() + " not in panel");
    }
    adjacency_window(panel, d, window, excluded);  // throws if incomplete
  }

  struct Cell {
    std::size_t poi;
    std::size_t day_idx;
    Date day;
  };
  std::vector<Cell> cells;
  cells.reserve(panel.n_pois() * eval_days.size());
  for (Date d : eval_days) {
    std::size_t idx = *panel.day_index(d);
    for (std::size_t p = 0; p < panel.n_pois(); ++p) cells.push_back({p, idx, d});
  }

  ImputationMetrics out;
  out.method = to_string(method);
  out.window = window;
  out.n_points = cells.size();

  if (method == ImputationMethod::kMean) {
    // No parameters to fit: evaluate the estimator directly on every cell.
    std::vector<double> actual, predicted;
    actual.reserve(cells.size());
    predicted.reserve(cells.size());
    std::vector<BaselineEstimate> by_day;
    for (Date d : eval_days) by_day.push_back(mean_baseline(panel, d, window, excluded));
    std::map<Date, const BaselineEstimate*> est_of;
    for (const auto& est : by_day) est_of[est.day] = &est;
    for (const auto& cell : cells) {
      actual.push_back(static_cast<double>(panel.count(cell.poi, cell.day_idx)));
      predicted.push_back(est_of[cell.day]->values[cell.poi]);
    }
    ImputationMetrics m = prediction_metrics(actual, predicted);
    out.rmse = m.rmse;
    out.r2 = m.r2;
    out.mae = m.mae;
    return out;
  }

  if (cells.size() < static_cast<std::size_t>(folds)) {
    throw ValidationError("fewer evaluation points (" + std::to_string(cells.size()) +
                          ") than folds (" + std::to_string(folds) + ")");
  }

  // Features are fixed per cell; only fold membership changes across repeats.
  std::vector<std::vector<double>> features(cells.size());
  std::vector<double> targets(cells.size());
  for (std::size_t i = 0; i < cells.size(); ++i) {
    features[i] = cell_features(panel, cells[i].poi, cells[i].day, window, excluded);
    targets[i] = static_cast<double>(panel.count(cells[i].poi, cells[i].day_idx));
  }

  double rmse_sum = 0.0, r2_sum = 0.0, mae_sum = 0.0;
  for (int r = 0; r < repeats; ++r) {
    std::vector<std::size_t> order(cells.size());
    std::iota(order.begin(), order.end(), 0);
    std::mt19937_64 rng(derive_seed(seed, static_cast<std::uint64_t>(r)));
    std::shuffle(order.begin(), order.end(), rng);

    std::vector<double> actual(cells.size()), predicted(cells.size());
    for (int f = 0; f < folds; ++f) {
      std::vector<std::vector<double>> train_x;
      std::vector<double> train_y;
      std::vector<std::size_t> test_idx;
      for (std::size_t pos = 0; pos < order.size(); ++pos) {
        if (static_cast<int>(pos % static_cast<std::size_t>(folds)) == f) {
          test_idx.push_back(order[pos]);
        } else {
          train_x.push_back(features[order[pos]]);
          train_y.push_back(targets[order[pos]]);
        }
      }
      PooledFit fit = fit_pooled(train_x, train_y, window);
      for (std::size_t i : test_idx) {
        actual[i] = targets[i];
        predicted[i] = predict(fit, features[i]);
      }
    }
    ImputationMetrics m = prediction_metrics(actual, predicted);
    rmse_sum += m.rmse;
    r2_sum += m.r2;
    mae_sum += m.mae;
  }
  out.rmse = rmse_sum / repeats;
  out.r2 = r2_sum / repeats;
  out.mae = mae_sum / repeats;
  return out;
}

MarginalTraffic marginal_traffic(const TrafficPanel& panel, const BaselineEstimate& baseline) {
  if (baseline.pois != panel.pois) {
    throw ValidationError("baseline POI set does not match the panel");
  }
  auto day_idx = panel.day_index(baseline.day);
  if (!day_idx) {
    throw ValidationError("baseline day " + baseline.day.to_string() + " not in panel");
  }

  MarginalTraffic out;
  out.pois = panel.pois;
  out.values.resize(panel.n_pois());
  std::vector<PoiId> negative;
  for (std::size_t p = 0; p < panel.n_pois(); ++p) {
    out.values[p] = static_cast<double>(panel.count(p, *day_idx)) - baseline.values[p];
    if (out.values[p] < 0.0) negative.push_back(panel.pois[p]);
  }
  if (!negative.empty()) {
    std::string msg = std::to_string(negative.size()) + " POIs have negative marginal traffic on " +
                      baseline.day.to_string() + ": ";
    std::size_t shown = std::min<std::size_t>(negative.size(), 5);
    for (std::size_t i = 0; i < shown; ++i) {
      if (i) msg += ", ";
      msg += negative[i];
    }
    if (negative.size() > shown) msg += ", ...";
    out.warnings.push_back(msg);
  }
  return out;
}

std::string render_imputation_csv(const std::vector<ImputationMetrics>& rows) {
  std::string out = "method,window,rmse,r2,mae\n";
  for (const auto& m : rows) {
    out += csv_join({m.method, std::to_string(m.window), format_double(m.rmse),
                     format_double(m.r2), format_double(m.mae)});
  }
  return out;
}

}  // namespace mobaudit
