#include "agedist/losses.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace agedist {

namespace {

void require_same_length(const std::vector<double>& p, const std::vector<double>& q,
                         const char* where) {
    if (p.size() != q.size()) {
        throw std::invalid_argument(std::string(where) + ": length mismatch (" +
                                    std::to_string(p.size()) + " vs " +
                                    std::to_string(q.size()) + ")");
    }
}

void require_label(const std::vector<double>& p, int label, const char* where) {
    if (label < 1 || label > static_cast<int>(p.size())) {
        throw std::invalid_argument(std::string(where) + ": label " +
                                    std::to_string(label) + " outside [1, " +
                                    std::to_string(p.size()) + "]");
    }
}

}  // namespace

std::string loss_kind_name(LossKind kind) {
    switch (kind) {
        case LossKind::CE: return "ce";
        case LossKind::KL: return "kl";
        case LossKind::CE_MV: return "cemv";
        case LossKind::DC: return "dc";
    }
    throw std::logic_error("loss_kind_name: bad enum value");
}

LossKind loss_kind_from_name(const std::string& name) {
    if (name == "ce") return LossKind::CE;
    if (name == "kl") return LossKind::KL;
    if (name == "cemv") return LossKind::CE_MV;
    if (name == "dc") return LossKind::DC;
    throw std::invalid_argument("unknown loss kind '" + name +
                                "' (expected ce|kl|cemv|dc)");
}

void LossSpec::validate() const {
    if (kind == LossKind::DC && !(alpha > 0.0 && alpha < 1.0)) {
        throw std::invalid_argument("LossSpec: alpha must lie in (0, 1), got " +
                                    std::to_string(alpha));
    }
    if (kind == LossKind::CE_MV && (lambda1 < 0.0 || lambda2 < 0.0)) {
        throw std::invalid_argument("LossSpec: lambda1/lambda2 must be non-negative");
    }
}

std::vector<double> softmax(const std::vector<double>& logits) {
    if (logits.empty()) {
        throw std::invalid_argument("softmax: empty logits");
    }
    const double zmax = *std::max_element(logits.begin(), logits.end());
    std::vector<double> p(logits.size());
    double sum = 0.0;
    for (std::size_t i = 0; i < logits.size(); ++i) {
        p[i] = std::exp(logits[i] - zmax);
        sum += p[i];
    }
    for (double& v : p) v /= sum;
    return p;
}

double bhattacharyya(const std::vector<double>& p, const std::vector<double>& q) {
    require_same_length(p, q, "bhattacharyya");
    double b = 0.0;
    // sqrt(p) * sqrt(q) instead of sqrt(p * q): the product can underflow for
    // probabilities near 1e-300.
    for (std::size_t i = 0; i < p.size(); ++i) {
        b += std::sqrt(p[i]) * std::sqrt(q[i]);
    }
    return std::min(b, 1.0);
}

LossResult ce_loss(const std::vector<double>& p, int label) {
    require_label(p, label, "ce_loss");
    LossResult res;
    res.value = -std::log(p[label - 1]);
    res.grad_z = p;
    res.grad_z[label - 1] -= 1.0;
    return res;
}

LossResult kl_loss(const std::vector<double>& p, const std::vector<double>& q) {
    require_same_length(p, q, "kl_loss");
    LossResult res;
    for (std::size_t i = 0; i < p.size(); ++i) {
        if (q[i] > 0.0) {
            res.value += q[i] * std::log(q[i] / p[i]);
        }
    }
    res.grad_z.resize(p.size());
    for (std::size_t i = 0; i < p.size(); ++i) {
        res.grad_z[i] = p[i] - q[i];
    }
    return res;
}

LossResult cemv_loss(const std::vector<double>& p, int label, double lambda1,
                     double lambda2) {
    require_label(p, label, "cemv_loss");
    if (lambda1 < 0.0 || lambda2 < 0.0) {
        throw std::invalid_argument("cemv_loss: negative regularisation weight");
    }
    const int n = static_cast<int>(p.size());
    double mean = 0.0;
    for (int i = 0; i < n; ++i) {
        mean += (i + 1) * p[i];
    }
    double var = 0.0;
    for (int i = 0; i < n; ++i) {
        const double d = (i + 1) - mean;
        var += d * d * p[i];
    }
    LossResult res;
    const double dy = mean - label;
    res.value = -std::log(p[label - 1]) + lambda1 * dy * dy + lambda2 * var;
    res.grad_z.resize(n);
    for (int i = 0; i < n; ++i) {
        const double d = (i + 1) - mean;
        double g = p[i];
        if (i == label - 1) g -= 1.0;
        g += 2.0 * lambda1 * dy * p[i] * d;
        g += lambda2 * p[i] * (d * d - var);
        res.grad_z[i] = g;
    }
    return res;
}

LossResult dc_loss(const std::vector<double>& p, const std::vector<double>& q,
                   double alpha) {
    require_same_length(p, q, "dc_loss");
    if (!(alpha > 0.0 && alpha < 1.0)) {
        throw std::invalid_argument("dc_loss: alpha must lie in (0, 1), got " +
                                    std::to_string(alpha));
    }
    const double b = bhattacharyya(p, q);
    // log1p keeps the value exact near B = 1 (loss 0) and B = 0 (loss 1).
    const double log_den = std::log1p(-alpha);
    LossResult res;
    res.value = std::log1p(-alpha * (1.0 - b)) / log_den;
    const double k = alpha / (2.0 * log_den);
    const double scale = k / (1.0 - alpha * (1.0 - b));
    res.grad_z.resize(p.size());
    for (std::size_t i = 0; i < p.size(); ++i) {
        res.grad_z[i] = scale * (std::sqrt(p[i]) * std::sqrt(q[i]) - p[i] * b);
    }
    return res;
}

LossResult loss_eval(const LossSpec& spec, const std::vector<double>& p, int label,
                     const std::vector<double>& q) {
    switch (spec.kind) {
        case LossKind::CE: return ce_loss(p, label);
        case LossKind::KL: return kl_loss(p, q);
        case LossKind::CE_MV: return cemv_loss(p, label, spec.lambda1, spec.lambda2);
        case LossKind::DC: return dc_loss(p, q, spec.alpha);
    }
    throw std::logic_error("loss_eval: bad enum value");
}

std::vector<double> profile(const std::vector<double>& p, const std::vector<double>& q,
                            const LossSpec& spec) {
    require_same_length(p, q, "profile");
    std::vector<double> out(p.size());
    switch (spec.kind) {
        case LossKind::KL:
            for (std::size_t i = 0; i < p.size(); ++i) {
                out[i] = q[i] > 0.0 ? q[i] * std::log(q[i] / p[i]) : 0.0;
            }
            return out;
        case LossKind::DC:
            for (std::size_t i = 0; i < p.size(); ++i) {
                out[i] = 0.5 * (q[i] + p[i]) - std::sqrt(p[i]) * std::sqrt(q[i]);
            }
            return out;
        case LossKind::CE:
        case LossKind::CE_MV:
            throw std::invalid_argument(
                "profile: no distribution-pair profile for " + loss_kind_name(spec.kind));
    }
    throw std::logic_error("profile: bad enum value");
}

}  // namespace agedist
