// Central finite-difference oracle for validating analytic logit-gradients.
#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "agedist/losses.hpp"

namespace agedist {

struct GradCheckReport {
    double max_abs_err = 0.0;
    double max_rel_err = 0.0;
    int worst_index = -1;  // flat coordinate index of the worst relative error
    bool passed = false;
};

inline constexpr double kGradCheckStep = 1e-5;
inline constexpr double kGradCheckTol = 1e-5;
// Bin count for the random (z, q) cases. Kept small: the closed forms are
// dimension-independent, while the finite-difference noise measured against
// the fixed 1e-8 relative-error floor grows with the number of near-zero
// gradient entries.
inline constexpr int kGradCheckBins = 8;

// Central differences (f(z + h e_i) - f(z - h e_i)) / 2h per coordinate.
// Throws std::domain_error naming the coordinate if an evaluation is
// non-finite.
std::vector<double> finite_diff_grad(
    const std::function<double(const std::vector<double>&)>& loss_fn,
    const std::vector<double>& z, double h = kGradCheckStep);

// Relative error with denominator max(|analytic|, |numeric|, 1e-8).
double gradient_rel_err(const std::vector<double>& analytic,
                        const std::vector<double>& numeric, double* max_abs_err,
                        int* worst_index);

// Runs `trials` seeded random cases: z uniform in [-4, 4], q Gaussian-encoded
// at a random label. Deterministic given the seed.
GradCheckReport check(const LossSpec& spec, int trials, double tol, std::uint64_t seed,
                      int bins = kGradCheckBins, double h = kGradCheckStep);

}  // namespace agedist
