#include "agedist/numcheck.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "agedist/label_codec.hpp"
#include "agedist/rng.hpp"

namespace agedist {

std::vector<double> finite_diff_grad(
    const std::function<double(const std::vector<double>&)>& loss_fn,
    const std::vector<double>& z, double h) {
    if (!(h > 0.0)) {
        throw std::invalid_argument("finite_diff_grad: step must be positive");
    }
    std::vector<double> grad(z.size());
    std::vector<double> zp = z;
    for (std::size_t i = 0; i < z.size(); ++i) {
        const double orig = zp[i];
        zp[i] = orig + h;
        const double fp = loss_fn(zp);
        zp[i] = orig - h;
        const double fm = loss_fn(zp);
        zp[i] = orig;
        if (!std::isfinite(fp) || !std::isfinite(fm)) {
            throw std::domain_error("finite_diff_grad: non-finite loss at coordinate " +
                                    std::to_string(i));
        }
        grad[i] = (fp - fm) / (2.0 * h);
    }
    return grad;
}

double gradient_rel_err(const std::vector<double>& analytic,
                        const std::vector<double>& numeric, double* max_abs_err,
                        int* worst_index) {
    if (analytic.size() != numeric.size()) {
        throw std::invalid_argument("gradient_rel_err: length mismatch");
    }
    double worst_rel = 0.0;
    double worst_abs = 0.0;
    int worst_i = -1;
    for (std::size_t i = 0; i < analytic.size(); ++i) {
        const double abs_err = std::abs(analytic[i] - numeric[i]);
        const double den =
            std::max({std::abs(analytic[i]), std::abs(numeric[i]), 1e-8});
        const double rel = abs_err / den;
        worst_abs = std::max(worst_abs, abs_err);
        if (rel > worst_rel) {
            worst_rel = rel;
            worst_i = static_cast<int>(i);
        }
    }
    if (max_abs_err) *max_abs_err = worst_abs;
    if (worst_index) *worst_index = worst_i;
    return worst_rel;
}

GradCheckReport check(const LossSpec& spec, int trials, double tol, std::uint64_t seed,
                      int bins, double h) {
    if (trials < 1) {
        throw std::invalid_argument("check: need at least one trial");
    }
    spec.validate();
    Rng rng(seed);
    GradCheckReport report;
    for (int t = 0; t < trials; ++t) {
        std::vector<double> z(bins);
        for (double& v : z) v = rng.uniform(-4.0, 4.0);
        const int label = rng.uniform_int(1, bins);
        const std::vector<double> q = encode_gaussian(label, bins);

        const LossResult res = loss_eval(spec, softmax(z), label, q);
        const std::vector<double> numeric = finite_diff_grad(
            [&](const std::vector<double>& zz) {
                return loss_eval(spec, softmax(zz), label, q).value;
            },
            z, h);

        double abs_err = 0.0;
        int worst_i = -1;
        const double rel = gradient_rel_err(res.grad_z, numeric, &abs_err, &worst_i);
        report.max_abs_err = std::max(report.max_abs_err, abs_err);
        if (rel > report.max_rel_err) {
            report.max_rel_err = rel;
            report.worst_index = worst_i;
        }
    }
    report.passed = report.max_rel_err < tol;
    return report;
}

}  // namespace agedist
