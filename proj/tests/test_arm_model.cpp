#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <vector>

#include "bestk/arm_model.hpp"

using namespace bestk;

TEST(ArmSpec, ValidatesMeanRange) {
    EXPECT_NO_THROW(validate(ArmSpec{0, Distribution::gaussian_unit_var, 0.0}));
    EXPECT_NO_THROW(validate(ArmSpec{0, Distribution::bernoulli, 0.5}));
    EXPECT_THROW(validate(ArmSpec{0, Distribution::gaussian_unit_var, 0.6}), ValidationError);
    EXPECT_THROW(validate(ArmSpec{0, Distribution::bernoulli, -0.01}), ValidationError);
    EXPECT_THROW(validate(ArmSpec{0, Distribution::bernoulli, std::nan("")}), ValidationError);
}

TEST(Distribution, ParseRoundTrip) {
    EXPECT_EQ(parse_distribution("gaussian"), Distribution::gaussian_unit_var);
    EXPECT_EQ(parse_distribution("bernoulli"), Distribution::bernoulli);
    EXPECT_EQ(to_string(Distribution::bernoulli), "bernoulli");
    EXPECT_THROW(parse_distribution("cauchy"), ValidationError);
}

TEST(Sample, BernoulliZeroIsAlwaysZero) {
    ArmSpec arm{0, Distribution::bernoulli, 0.0};
    RngStream rng(1, 2);
    SampleLedger ledger(1);
    for (int i = 0; i < 1000; ++i) EXPECT_EQ(sample(arm, rng, ledger), 0.0);
    EXPECT_EQ(pull_n(arm, 500, rng, ledger), 0.0);
    EXPECT_EQ(*ledger.empirical_mean(0), 0.0);
    EXPECT_EQ(ledger.total(), 1500u);
}

TEST(Sample, GaussianMeanConcentrates) {
    // 2 exp(-1e6 * 1e-4 / 2) is far below 1e-3.
    ArmSpec arm{0, Distribution::gaussian_unit_var, 0.3};
    RngStream rng(11, 0);
    SampleLedger ledger(1);
    for (int i = 0; i < 1000000; ++i) sample(arm, rng, ledger);
    EXPECT_NEAR(*ledger.empirical_mean(0), 0.3, 0.01);
    EXPECT_EQ(ledger.pulls(0), 1000000u);
}

TEST(Sample, SameStreamSameValues) {
    ArmSpec arm{0, Distribution::gaussian_unit_var, 0.1};
    RngStream a(5, 5), b(5, 5);
    SampleLedger la(1), lb(1);
    for (int i = 0; i < 100; ++i) EXPECT_EQ(sample(arm, a, la), sample(arm, b, lb));
}

// Kolmogorov-Smirnov at significance 1e-3: critical value ~ 1.9495 / sqrt(n).
TEST(Sample, GaussianPassesKolmogorovSmirnov) {
    const double mu = 0.2;
    ArmSpec arm{0, Distribution::gaussian_unit_var, mu};
    RngStream rng(2024, 17);
    SampleLedger ledger(1);
    const int n = 100000;
    std::vector<double> xs(n);
    for (auto& x : xs) x = sample(arm, rng, ledger);
    std::sort(xs.begin(), xs.end());
    double d = 0.0;
    for (int i = 0; i < n; ++i) {
        const double f = 0.5 * std::erfc(-(xs[i] - mu) / std::sqrt(2.0));
        d = std::max({d, f - static_cast<double>(i) / n, static_cast<double>(i + 1) / n - f});
    }
    EXPECT_LT(d, 1.9495 / std::sqrt(static_cast<double>(n)));
}

TEST(PullN, BernoulliSingleIsBinary) {
    ArmSpec arm{0, Distribution::bernoulli, 0.5};
    RngStream rng(1, 1);
    SampleLedger ledger(1);
    for (int i = 0; i < 100; ++i) {
        const double v = pull_n(arm, 1, rng, ledger);
        EXPECT_TRUE(v == 0.0 || v == 1.0);
    }
}

TEST(PullN, ReproducibleAndAccounted) {
    ArmSpec arm{0, Distribution::gaussian_unit_var, 0.0};
    RngStream a(77, 3), b(77, 3);
    SampleLedger la(1), lb(1);
    const double x = pull_n(arm, 4, a, la);
    EXPECT_EQ(x, pull_n(arm, 4, b, lb));
    EXPECT_EQ(la.total(), 4u);
    EXPECT_EQ(la.pulls(0), 4u);
    EXPECT_DOUBLE_EQ(la.sum(0), 4 * x);
    EXPECT_THROW(pull_n(arm, 0, a, la), ValidationError);
    EXPECT_EQ(la.total(), 4u);
}

TEST(PullN, GaussianBatchHasRightSpread) {
    // The batch mean of n draws has standard deviation 1/sqrt(n).
    ArmSpec arm{0, Distribution::gaussian_unit_var, 0.25};
    RngStream rng(8, 8);
    SampleLedger ledger(1);
    const int reps = 20000;
    double s = 0, s2 = 0;
    for (int i = 0; i < reps; ++i) {
        const double m = pull_n(arm, 100, rng, ledger);
        s += m;
        s2 += m * m;
    }
    const double mean = s / reps;
    const double var = s2 / reps - mean * mean;
    EXPECT_NEAR(mean, 0.25, 0.003);
    EXPECT_NEAR(var, 0.01, 0.0005);
}

TEST(Ledger, TotalsAndEmpty) {
    SampleLedger ledger(3);
    EXPECT_FALSE(ledger.empirical_mean(1).has_value());
    ledger.record(1, 4, 2.0);
    ledger.record(2, 1, 0.5);
    EXPECT_EQ(ledger.total(), 5u);
    EXPECT_DOUBLE_EQ(*ledger.empirical_mean(1), 0.5);
}

TEST(Ledger, BudgetStopsBeforeRecording) {
    ArmSpec arm{0, Distribution::gaussian_unit_var, 0.0};
    RngStream rng(1, 1);
    SampleLedger ledger(1);
    ledger.set_budget(10);
    pull_n(arm, 6, rng, ledger);
    EXPECT_THROW(pull_n(arm, 5, rng, ledger), BudgetExhausted);
    EXPECT_EQ(ledger.total(), 6u);
    pull_n(arm, 4, rng, ledger);
    EXPECT_EQ(ledger.total(), 10u);
}

TEST(SamplingContext, StreamsArePerArmAndTrial) {
    std::vector<ArmSpec> arms{{0, Distribution::gaussian_unit_var, 0.1}, {1, Distribution::gaussian_unit_var, 0.1}};
    SamplingContext a(arms, 9, 0), b(arms, 9, 0), c(arms, 9, 1);
    const double a0 = a.pull(0, 10), a1 = a.pull(1, 10);
    EXPECT_EQ(a0, b.pull(0, 10));
    EXPECT_EQ(a1, b.pull(1, 10));
    EXPECT_NE(a0, a1);
    EXPECT_NE(a0, c.pull(0, 10));
    EXPECT_EQ(a.ledger().total(), 20u);
    EXPECT_DOUBLE_EQ(a.true_mean(1), 0.1);
}

TEST(SamplingContext, PullOrderAcrossArmsDoesNotMatter) {
    std::vector<ArmSpec> arms{{0, Distribution::bernoulli, 0.3}, {1, Distribution::gaussian_unit_var, 0.2}};
    SamplingContext a(arms, 1, 4), b(arms, 1, 4);
    const double a0 = a.pull(0, 50);
    const double a1 = a.pull(1, 50);
    const double b1 = b.pull(1, 50);
    const double b0 = b.pull(0, 50);
    EXPECT_EQ(a0, b0);
    EXPECT_EQ(a1, b1);
}
