#include <doctest.h>

#include <cmath>
#include <limits>
#include <stdexcept>

#include "agedist/label_codec.hpp"
#include "agedist/numcheck.hpp"
#include "agedist/rng.hpp"

using namespace agedist;

TEST_CASE("finite differences recover a known quadratic gradient") {
    const auto f = [](const std::vector<double>& z) {
        double s = 0.0;
        for (double v : z) s += v * v;
        return s;
    };
    const std::vector<double> g = finite_diff_grad(f, {1.0, 2.0});
    // Central differences are exact for quadratics up to roundoff.
    CHECK(g[0] == doctest::Approx(2.0).epsilon(1e-9));
    CHECK(g[1] == doctest::Approx(4.0).epsilon(1e-9));
}

TEST_CASE("finite differences vanish at a loss minimum") {
    const std::vector<double> q = encode_gaussian(3, 6, 2.0);
    std::vector<double> z(6);
    for (int i = 0; i < 6; ++i) z[i] = std::log(q[i]);
    const auto f = [&](const std::vector<double>& zz) {
        return kl_loss(softmax(zz), q).value;
    };
    for (double g : finite_diff_grad(f, z)) CHECK(std::abs(g) <= 1e-8);
}

TEST_CASE("dc analytic gradient matches the oracle on a random case") {
    Rng rng(41);
    std::vector<double> z(10);
    for (double& v : z) v = rng.uniform(-4.0, 4.0);
    const std::vector<double> q = encode_gaussian(rng.uniform_int(1, 10), 10, 2.0);
    const LossResult res = dc_loss(softmax(z), q, 0.1);
    const std::vector<double> numeric = finite_diff_grad(
        [&](const std::vector<double>& zz) { return dc_loss(softmax(zz), q, 0.1).value; },
        z);
    CHECK(gradient_rel_err(res.grad_z, numeric, nullptr, nullptr) < 1e-5);
}

TEST_CASE("non-finite evaluations are reported with their coordinate") {
    const auto f = [](const std::vector<double>& z) {
        return z[1] > 0.5 ? std::numeric_limits<double>::infinity() : 0.0;
    };
    CHECK_THROWS_WITH_AS(finite_diff_grad(f, {0.0, 0.5}, 1e-2),
                         doctest::Contains("coordinate 1"), std::domain_error);
    CHECK_THROWS_AS(finite_diff_grad([](const std::vector<double>&) { return 0.0; },
                                     {1.0}, 0.0),
                    std::invalid_argument);
}

TEST_CASE("seeded check passes for every loss") {
    for (LossKind kind : {LossKind::CE, LossKind::KL, LossKind::CE_MV, LossKind::DC}) {
        LossSpec spec;
        spec.kind = kind;
        spec.alpha = 0.1;
        const GradCheckReport report = check(spec, 100, 1e-5, 7);
        CHECK(report.passed);
        CHECK(report.max_rel_err < 1e-5);
        CHECK(report.max_rel_err >= 0.0);
    }
}

TEST_CASE("zero tolerance is unachievable") {
    LossSpec spec;
    spec.kind = LossKind::KL;
    CHECK_FALSE(check(spec, 20, 0.0, 7).passed);
}

TEST_CASE("reports are deterministic in the seed") {
    LossSpec spec;
    spec.kind = LossKind::DC;
    spec.alpha = 0.2;
    const GradCheckReport a = check(spec, 50, 1e-5, 123);
    const GradCheckReport b = check(spec, 50, 1e-5, 123);
    CHECK(a.max_abs_err == b.max_abs_err);
    CHECK(a.max_rel_err == b.max_rel_err);
    CHECK(a.worst_index == b.worst_index);
    CHECK(a.passed == b.passed);
    const GradCheckReport c = check(spec, 50, 1e-5, 124);
    CHECK(a.max_rel_err != c.max_rel_err);
}

TEST_CASE("halving the step does not flip a passing report") {
    for (LossKind kind : {LossKind::CE_MV, LossKind::DC}) {
        LossSpec spec;
        spec.kind = kind;
        for (double h : {1e-4, 5e-5, 2e-5, 1e-5}) {
            CHECK(check(spec, 50, 1e-5, 7, kGradCheckBins, h).passed);
            CHECK(check(spec, 50, 1e-5, 7, kGradCheckBins, h / 2).passed);
        }
    }
}

TEST_CASE("check validates its inputs") {
    LossSpec spec;
    spec.kind = LossKind::DC;
    CHECK_THROWS_AS(check(spec, 0, 1e-5, 7), std::invalid_argument);
    spec.alpha = 2.0;
    CHECK_THROWS_AS(check(spec, 10, 1e-5, 7), std::invalid_argument);
}
