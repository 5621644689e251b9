#include "agedist/label_codec.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace agedist {

std::vector<double> encode_gaussian(int label, int bins, double sigma) {
    if (bins < 2) {
        throw std::invalid_argument("encode_gaussian: need at least 2 bins, got " +
                                    std::to_string(bins));
    }
    if (!(sigma > 0.0)) {
        throw std::invalid_argument("encode_gaussian: sigma must be positive");
    }
    if (label < 1 || label > bins) {
        throw std::invalid_argument("encode_gaussian: label " + std::to_string(label) +
                                    " outside [1, " + std::to_string(bins) + "]");
    }
    std::vector<double> probs(bins);
    const double inv = 1.0 / (2.0 * sigma * sigma);
    double sum = 0.0;
    for (int i = 0; i < bins; ++i) {
        const double d = static_cast<double>(i + 1 - label);
        probs[i] = std::exp(-d * d * inv);
        sum += probs[i];
    }
    for (double& p : probs) p /= sum;
    return probs;
}

std::vector<double> encode_onehot(int label, int bins) {
    if (bins < 2) {
        throw std::invalid_argument("encode_onehot: need at least 2 bins");
    }
    if (label < 1 || label > bins) {
        throw std::invalid_argument("encode_onehot: label " + std::to_string(label) +
                                    " outside [1, " + std::to_string(bins) + "]");
    }
    std::vector<double> bits(bins, 0.0);
    bits[label - 1] = 1.0;
    return bits;
}

int decode_argmax(const std::vector<double>& probs) {
    if (probs.empty()) {
        throw std::invalid_argument("decode_argmax: empty distribution");
    }
    int best = 0;
    for (int i = 1; i < static_cast<int>(probs.size()); ++i) {
        if (probs[i] > probs[best]) best = i;
    }
    return best + 1;
}

bool is_distribution(const std::vector<double>& probs, double tol) {
    double sum = 0.0;
    for (double p : probs) {
        if (!(p >= 0.0 && p <= 1.0)) return false;
        sum += p;
    }
    return std::abs(sum - 1.0) <= tol;
}

}  // namespace agedist
