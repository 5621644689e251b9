// MAE and Cumulative Score evaluation of predicted versus true ages.
#pragma once

#include <vector>

namespace agedist {

inline constexpr int kDefaultCsThreshold = 5;

struct MetricsReport {
    double mae = 0.0;      // years
    double cs = 0.0;       // percentage in [0, 100]
    int threshold = kDefaultCsThreshold;
    int n = 0;
};

// Mean absolute error in years.
double mae(const std::vector<int>& preds, const std::vector<int>& truths);

// 100 * |{k : |pred_k - truth_k| < threshold}| / n. The inequality is
// strict, so an error exactly equal to the threshold does not count.
double cs(const std::vector<int>& preds, const std::vector<int>& truths,
          int threshold = kDefaultCsThreshold);

MetricsReport evaluate_predictions(const std::vector<int>& preds,
                                   const std::vector<int>& truths,
                                   int threshold = kDefaultCsThreshold);

}  // namespace agedist
