#include <doctest.h>

#include <stdexcept>

#include "agedist/metrics.hpp"
#include "agedist/rng.hpp"

using namespace agedist;

TEST_CASE("mae basics") {
    CHECK(mae({30, 40}, {30, 40}) == 0.0);
    CHECK(mae({30, 40}, {32, 37}) == doctest::Approx(2.5));
    CHECK_THROWS_AS(mae({1}, {1, 2}), std::invalid_argument);
    CHECK_THROWS_AS(mae({}, {}), std::invalid_argument);
}

TEST_CASE("mae is invariant to joint permutation") {
    Rng rng(19);
    std::vector<int> preds, truths;
    for (int i = 0; i < 64; ++i) {
        preds.push_back(rng.uniform_int(1, 100));
        truths.push_back(rng.uniform_int(1, 100));
    }
    const double base = mae(preds, truths);
    std::vector<int> order(preds.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = static_cast<int>(i);
    rng.shuffle(order);
    std::vector<int> p2, t2;
    for (int i : order) {
        p2.push_back(preds[i]);
        t2.push_back(truths[i]);
    }
    CHECK(mae(p2, t2) == doctest::Approx(base).epsilon(1e-15));
}

TEST_CASE("cs uses a strict inequality") {
    // absolute errors 2, 3, 6, 5 with I = 5: only 2 and 3 count.
    const std::vector<int> truths = {10, 10, 10, 10};
    const std::vector<int> preds = {12, 13, 16, 15};
    CHECK(cs(preds, truths, 5) == 50.0);
    CHECK(cs(truths, truths, 5) == 100.0);
    // all integer errors >= 1 fail at I = 1
    CHECK(cs({2, 3, 4}, {1, 2, 3}, 1) == 0.0);
    CHECK_THROWS_AS(cs({1}, {1}, 0), std::invalid_argument);
}

TEST_CASE("cs is monotone in the threshold and saturates") {
    Rng rng(20);
    std::vector<int> preds, truths;
    for (int i = 0; i < 100; ++i) {
        preds.push_back(rng.uniform_int(1, 100));
        truths.push_back(rng.uniform_int(1, 100));
    }
    double prev = 0.0;
    for (int threshold = 1; threshold <= 120; ++threshold) {
        const double value = cs(preds, truths, threshold);
        CHECK(value >= prev);
        prev = value;
    }
    CHECK(cs(preds, truths, 1000000) == 100.0);
}

TEST_CASE("evaluate_predictions packs the report") {
    const MetricsReport report = evaluate_predictions({12, 13, 16, 15}, {10, 10, 10, 10});
    CHECK(report.mae == doctest::Approx(4.0));
    CHECK(report.cs == 50.0);
    CHECK(report.threshold == 5);
    CHECK(report.n == 4);
}
