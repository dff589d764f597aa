#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "humbench/error.hpp"
#include "humbench/metrics.hpp"
#include "oracles.hpp"

namespace m = humbench::metrics;

using humbench::testing::kappa_oracle;
using humbench::testing::macro_f1_oracle;

TEST(Kappa, MatchesContingencyOracleOnRandomInstances) {
    std::mt19937 gen(7);
    for (int trial = 0; trial < 500; ++trial) {
        const std::size_t n = 1 + gen() % 25;
        const double pa = (gen() % 100) / 100.0, pb = (gen() % 100) / 100.0;
        std::vector<bool> x(n), y(n);
        for (std::size_t i = 0; i < n; ++i) {
            x[i] = (gen() % 100) < pa * 100;
            y[i] = (gen() % 3 == 0) ? x[i] : (gen() % 100) < pb * 100;
        }
        EXPECT_NEAR(m::cohen_kappa(x, y), kappa_oracle(x, y), 1e-12) << "trial " << trial;
    }
}

TEST(Kappa, IdenticalAnnotationsScoreOne) {
    EXPECT_DOUBLE_EQ(m::cohen_kappa({true, false, true}, {true, false, true}), 1.0);
    EXPECT_DOUBLE_EQ(m::cohen_kappa({false, false}, {false, false}), 1.0);
}

TEST(Kappa, OppositeConstantAnnotationsScoreZero) {
    EXPECT_DOUBLE_EQ(m::cohen_kappa({true, true, true}, {false, false, false}), 0.0);
    EXPECT_DOUBLE_EQ(m::cohen_kappa({true, false}, {false, true}), -1.0);
}

TEST(Kappa, RejectsBadInput) {
    EXPECT_THROW(m::cohen_kappa({}, {}), humbench::ValidationError);
    EXPECT_THROW(m::cohen_kappa({true}, {true, false}), humbench::ValidationError);
}

TEST(Kappa, InterpretationBands) {
    EXPECT_EQ(m::interpret_kappa(0.87), "almost perfect");
    EXPECT_EQ(m::interpret_kappa(0.80), "substantial");
    EXPECT_EQ(m::interpret_kappa(0.61), "substantial");
    EXPECT_EQ(m::interpret_kappa(0.45), "moderate");
    EXPECT_EQ(m::interpret_kappa(0.40), "below moderate");
    EXPECT_THROW(m::interpret_kappa(1.5), humbench::ValidationError);
}

TEST(Kappa, AverageIsUnweightedMean) {
    EXPECT_DOUBLE_EQ(m::average_kappa({{"A", 0.5}, {"B", 1.0}}), 0.75);
    EXPECT_THROW(m::average_kappa({}), humbench::ValidationError);
}

TEST(MacroF1, MatchesPrecisionRecallOracleOnRandomInstances) {
    std::mt19937 gen(11);
    for (int trial = 0; trial < 500; ++trial) {
        const int k = 2 + static_cast<int>(gen() % 3);
        const std::size_t n = 1 + gen() % 30;
        std::vector<int> g(n), p(n);
        for (std::size_t i = 0; i < n; ++i) {
            g[i] = static_cast<int>(gen() % k);
            p[i] = gen() % 2 ? g[i] : static_cast<int>(gen() % k);
        }
        EXPECT_NEAR(m::macro_f1(g, p, k), macro_f1_oracle(g, p, k), 1e-12) << "trial " << trial;
    }
}

TEST(MacroF1, PerfectPredictionIsOne) {
    std::vector<int> g{0, 1, 2, 1};
    EXPECT_DOUBLE_EQ(m::macro_f1(g, g, 3), 1.0);
}

TEST(MacroF1, AbsentClassIsExcluded) {
    // Class 2 never occurs: the mean is over classes 0 and 1 only.
    std::vector<int> g{0, 0, 1, 1}, p{0, 1, 1, 1};
    const double f0 = 2.0 / 3.0, f1 = 0.8;
    EXPECT_NEAR(m::macro_f1(g, p, 3), (f0 + f1) / 2, 1e-12);
}

TEST(MacroF1, ClassPredictedButNeverGoldCountsAsZero) {
    std::vector<int> g{0, 0}, p{0, 1};
    EXPECT_NEAR(m::macro_f1(g, p, 2), (2.0 / 3.0 + 0.0) / 2, 1e-12);
}

TEST(MacroF1, StringOverloadUsesClassSet) {
    EXPECT_DOUBLE_EQ(m::macro_f1({"IH", "IA"}, {"IH", "IA"}, {"IH", "IA", "Neutral"}), 1.0);
    EXPECT_THROW(m::macro_f1({"IH"}, {"XX"}, {"IH", "IA"}), humbench::ValidationError);
}

TEST(MacroF1, RejectsMismatchedLengths) {
    std::vector<int> g{0}, p{0, 1};
    EXPECT_THROW(m::macro_f1(g, p, 2), humbench::ValidationError);
}

TEST(MutualUpperBound, IsMeanOfBothDirectionsAndSymmetric) {
    std::mt19937 gen(3);
    for (int trial = 0; trial < 100; ++trial) {
        const std::size_t n = 2 + gen() % 20;
        std::vector<int> a(n), b(n);
        for (std::size_t i = 0; i < n; ++i) {
            a[i] = static_cast<int>(gen() % 3);
            b[i] = static_cast<int>(gen() % 3);
        }
        const double expected = 0.5 * (macro_f1_oracle(a, b, 3) + macro_f1_oracle(b, a, 3));
        EXPECT_NEAR(m::mutual_upper_bound(a, b, 3), expected, 1e-12);
        EXPECT_DOUBLE_EQ(m::mutual_upper_bound(a, b, 3), m::mutual_upper_bound(b, a, 3));
    }
}

TEST(MutualUpperBound, BinaryMatchesIntegerForm) {
    std::vector<bool> a{true, false, true, true}, b{true, true, false, true};
    std::vector<int> ia{1, 0, 1, 1}, ib{1, 1, 0, 1};
    EXPECT_DOUBLE_EQ(m::binary_mutual_upper_bound(a, b), m::mutual_upper_bound(ia, ib, 2));
}

TEST(DistributionBaseline, ApproachesMeanClassShare) {
    // Drawing predictions from the empirical distribution gives each class an
    // expected F1 close to its share, so macro-F1 is close to 1/k.
    const std::vector<std::size_t> counts{134, 60, 156};
    auto est = m::distribution_baseline(counts, 4000, 1);
    EXPECT_NEAR(est.mean, 1.0 / 3.0, 0.01);
    EXPECT_GT(est.std_error, 0.0);
    EXPECT_EQ(est.trials, 4000u);
}

TEST(DistributionBaseline, DeterministicForSeed) {
    const std::vector<std::size_t> counts{5, 3, 2};
    auto a = m::distribution_baseline(counts, 3000, 9);
    auto b = m::distribution_baseline(counts, 3000, 9);
    EXPECT_EQ(a.mean, b.mean);
    EXPECT_EQ(a.std_error, b.std_error);
    EXPECT_NE(a.mean, m::distribution_baseline(counts, 3000, 10).mean);
}

TEST(DistributionBaseline, BalancedBinaryIsNearHalf) {
    const std::vector<std::size_t> counts{40, 40};
    EXPECT_NEAR(m::distribution_baseline(counts, 2000, 5).mean, 0.5, 0.02);
}

TEST(DistributionBaseline, SingleClassIsPerfect) {
    const std::vector<std::size_t> counts{0, 7, 0};
    EXPECT_DOUBLE_EQ(m::distribution_baseline(counts, 50, 0).mean, 1.0);
}

TEST(DistributionBaseline, RejectsEmptyInput) {
    const std::vector<std::size_t> zero{0, 0};
    EXPECT_THROW(m::distribution_baseline(zero, 10, 0), humbench::ValidationError);
    const std::vector<std::size_t> counts{1, 1};
    EXPECT_THROW(m::distribution_baseline(counts, 0, 0), humbench::ValidationError);
}
