// Forward values and analytic logit-gradients for the four training losses
// (CE, KL, CE-MV, DC) composed with softmax, plus per-bin diagnostics.
//
// All gradients are with respect to the logits z behind p = softmax(z); the
// closed forms depend on (p, target) only, so no logits need to be stored.
// Logs are natural throughout. The DC loss value is a ratio of logs and is
// therefore independent of the log base.
#pragma once

#include <string>
#include <vector>

namespace agedist {

enum class LossKind { CE, KL, CE_MV, DC };

std::string loss_kind_name(LossKind kind);
LossKind loss_kind_from_name(const std::string& name);  // "ce"|"kl"|"cemv"|"dc"

struct LossSpec {
    LossKind kind = LossKind::DC;
    double alpha = 0.1;     // DC only, must lie in (0, 1)
    double lambda1 = 0.2;   // CE-MV mean penalty weight, >= 0
    double lambda2 = 0.05;  // CE-MV variance penalty weight, >= 0

    void validate() const;  // throws std::invalid_argument
};

struct LossResult {
    double value = 0.0;
    std::vector<double> grad_z;
};

// Numerically stabilised softmax (max subtraction); entries are strictly
// positive and sum to 1 for any finite input.
std::vector<double> softmax(const std::vector<double>& logits);

// Bhattacharyya coefficient sum_k sqrt(p_k q_k), in [0, 1], 1 iff p = q.
double bhattacharyya(const std::vector<double>& p, const std::vector<double>& q);

// value = -log p_y, grad_z = p - onehot(y).
LossResult ce_loss(const std::vector<double>& p, int label);

// value = sum_k q_k log(q_k / p_k) with the 0 log 0 = 0 convention,
// grad_z = p - q. Returns +inf when q_k > 0 meets p_k = 0.
LossResult kl_loss(const std::vector<double>& p, const std::vector<double>& q);

// CE regulated with the mean/variance of p over bin indices 1..L:
// value = -log p_y + lambda1 (mu_p - y)^2 + lambda2 var_p.
LossResult cemv_loss(const std::vector<double>& p, int label, double lambda1,
                     double lambda2);

// value = log(1 - alpha (1 - B)) / log(1 - alpha) with B the Bhattacharyya
// coefficient; bounded in [0, 1], symmetric in (p, q), zero iff p = q.
// grad_z_i = [alpha / (2 ln(1-alpha))] (sqrt(p_i q_i) - p_i B) / (1 - alpha (1 - B)).
LossResult dc_loss(const std::vector<double>& p, const std::vector<double>& q,
                   double alpha);

// Dispatch on spec.kind. CE and CE-MV consume the integer label, KL and DC
// the encoded distribution q.
LossResult loss_eval(const LossSpec& spec, const std::vector<double>& p, int label,
                     const std::vector<double>& q);

// Per-bin contribution profile between two distributions.
//   KL: r_i = q_i log(q_i / p_i)           (signed)
//   DC: d_i = (q_i + p_i)/2 - sqrt(p_i q_i) (non-negative, sums to 1 - B)
// CE and CE-MV have no distribution-pair profile; requesting one throws.
std::vector<double> profile(const std::vector<double>& p, const std::vector<double>& q,
                            const LossSpec& spec);

}  // namespace agedist
