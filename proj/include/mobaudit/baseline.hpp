#pragma once

#include <cstdint>
#include <set>
#include <string>
#include <vector>

#include "mobaudit/types.hpp"

// Counterfactual baseline estimation: what traffic would a POI have seen on a
// given day absent the event? Two estimators are provided, a symmetric
// adjacent-weekday mean and a pooled linear regression on lag/lead features,
// plus a cross-validated evaluator for choosing between them.

namespace mobaudit {

enum class ImputationMethod { kMean, kRegression };

ImputationMethod parse_method(const std::string& token);
std::string to_string(ImputationMethod method);

struct BaselineEstimate {
  std::vector<PoiId> pois;     // same order as the source panel
  Date day;
  std::vector<double> values;  // predicted baseline per POI
  ImputationMethod method = ImputationMethod::kMean;
  int window = 1;
};

// The 2X adjacent weekdays around `day` (X on each side, weekends skipped),
// in chronological order. Throws listing any that are missing from the panel
// or excluded.
std::vector<Date> adjacency_window(const TrafficPanel& panel, Date day, int window,
                                   const std::set<Date>& excluded = {});
bool has_adjacency_window(const TrafficPanel& panel, Date day, int window,
                          const std::set<Date>& excluded = {});

// Symmetric mean of the 2X adjacent-weekday counts. window in [1, 4].
BaselineEstimate mean_baseline(const TrafficPanel& panel, Date day, int window,
                               const std::set<Date>& excluded = {});

// Pooled OLS of the day-t count on its k lag and k lead weekday counts,
// trained on (poi, day) points from `training_days` (each needs a full
// window) and applied to `day`. When a prediction-time lag/lead is missing
// from the panel the nearest available weekday on the same side stands in;
// a side with no data at all is an error. All-zero feature columns are
// dropped (their coefficient is zero by convention).
BaselineEstimate regression_baseline(const TrafficPanel& panel, Date day, int window,
                                     const std::vector<Date>& training_days,
                                     const std::set<Date>& excluded = {});

struct ImputationMetrics {
  std::string method;
  int window = 0;
  double rmse = 0.0;
  double r2 = 0.0;
  double mae = 0.0;
  std::size_t n_points = 0;
};

// Metrics from paired predictions/actuals. r2 is 1 - SSE/SST with SST
// centered on the actuals, so predicting the target mean scores exactly 0.
ImputationMetrics prediction_metrics(const std::vector<double>& actual,
                                     const std::vector<double>& predicted);

// Held-out evaluation over the (poi, day) cells of `eval_days`, each of
// which must have a full adjacency window. The mean method needs no fitting
// and is evaluated directly (deterministic, seed ignored); the regression
// method runs `folds`-fold cross-validation repeated `repeats` times and
// averages the per-repeat metrics.
ImputationMetrics evaluate_imputation(const TrafficPanel& panel, ImputationMethod method,
                                      int window, const std::vector<Date>& eval_days,
                                      int folds = 10, int repeats = 3,
                                      std::uint64_t seed = 0,
                                      const std::set<Date>& excluded = {});

struct MarginalTraffic {
  std::vector<PoiId> pois;
  std::vector<double> values;  // observed minus baseline; may be negative
  std::vector<std::string> warnings;
};

// Observed-minus-baseline traffic on the baseline's day. Negative values are
// kept (they carry signal about noise) but reported in warnings.
MarginalTraffic marginal_traffic(const TrafficPanel& panel, const BaselineEstimate& baseline);

std::string render_imputation_csv(const std::vector<ImputationMetrics>& rows);

}  // namespace mobaudit
