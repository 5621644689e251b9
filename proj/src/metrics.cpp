#include "agedist/metrics.hpp"

#include <cmath>
#include <cstdlib>
#include <stdexcept>

namespace agedist {

namespace {

void require_paired(const std::vector<int>& preds, const std::vector<int>& truths,
                    const char* where) {
    if (preds.empty()) {
        throw std::invalid_argument(std::string(where) + ": empty input");
    }
    if (preds.size() != truths.size()) {
        throw std::invalid_argument(std::string(where) + ": length mismatch");
    }
}

}  // namespace

double mae(const std::vector<int>& preds, const std::vector<int>& truths) {
    require_paired(preds, truths, "mae");
    double total = 0.0;
    for (std::size_t i = 0; i < preds.size(); ++i) {
        total += std::abs(preds[i] - truths[i]);
    }
    return total / static_cast<double>(preds.size());
}

double cs(const std::vector<int>& preds, const std::vector<int>& truths, int threshold) {
    require_paired(preds, truths, "cs");
    if (threshold < 1) {
        throw std::invalid_argument("cs: threshold must be at least 1");
    }
    std::size_t within = 0;
    for (std::size_t i = 0; i < preds.size(); ++i) {
        if (std::abs(preds[i] - truths[i]) < threshold) ++within;
    }
    return 100.0 * static_cast<double>(within) / static_cast<double>(preds.size());
}

MetricsReport evaluate_predictions(const std::vector<int>& preds,
                                   const std::vector<int>& truths, int threshold) {
    MetricsReport report;
    report.mae = mae(preds, truths);
    report.cs = cs(preds, truths, threshold);
    report.threshold = threshold;
    report.n = static_cast<int>(preds.size());
    return report;
}

}  // namespace agedist
