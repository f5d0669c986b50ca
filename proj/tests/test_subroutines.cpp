#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "battery.hpp"
#include "bestk/subroutines.hpp"

using namespace bestk;

namespace {

std::vector<ArmSpec> bern(const std::vector<double>& means) {
    std::vector<ArmSpec> a;
    for (std::size_t i = 0; i < means.size(); ++i) a.push_back({i, Distribution::bernoulli, means[i]});
    return a;
}

}  // namespace

TEST(SubroutineConfig, Validation) {
    EXPECT_NO_THROW(SubroutineConfig{}.validate());
    SubroutineConfig c;
    c.elim_stop_fraction = 0.1;
    EXPECT_THROW(c.validate(), ValidationError);
    c = {};
    c.pac_budget_const = 0;
    EXPECT_THROW(c.validate(), ValidationError);
}

TEST(Budgets, ClosedForms) {
    const SubroutineConfig cfg;
    EXPECT_EQ(pac_pulls_per_arm(10, 3, 0.1, 0.05, cfg),
              static_cast<std::uint64_t>(std::ceil(8.0 / 0.01 * (std::log(40.0) + std::log(3.0) + 1.0))));
    EXPECT_EQ(pac_pulls_per_arm(10, 8, 0.1, 0.05, cfg), pac_pulls_per_arm(10, 2, 0.1, 0.05, cfg));
    EXPECT_EQ(pac_pulls_per_arm(4, 4, 0.1, 0.05, cfg), 0u);
    EXPECT_EQ(est_mean_pulls(0.1, 0.05, cfg), static_cast<std::uint64_t>(std::ceil(2.0 / 0.0025 * std::log(80.0))));
    EXPECT_EQ(elim_pulls_per_arm(3, 0.2, 0.3, 0.1, cfg),
              static_cast<std::uint64_t>(std::ceil(8.0 / (0.1 * 0.1) * std::log(2.0 / (0.1 / 36.0)))));
}

TEST(PacBestK, ForcedPartitionUsesNoSamples) {
    const auto arms = bern({0.1, 0.2});
    SamplingContext ctx(arms, 1, 0);
    const auto r = pac_best_k(ArmSet{0, 1}, 2, 0.1, 0.1, {}, ctx);
    EXPECT_EQ(r.s_large, (ArmSet{0, 1}));
    EXPECT_TRUE(r.s_small.empty());
    EXPECT_EQ(r.samples_used, 0u);
    EXPECT_EQ(ctx.ledger().total(), 0u);
}

TEST(PacBestK, PartitionShapeAndAccounting) {
    std::vector<ArmSpec> arms;
    for (std::size_t i = 0; i < 9; ++i) arms.push_back({i, Distribution::gaussian_unit_var, 0.05 * i});
    for (std::size_t k : {1u, 4u, 5u, 8u}) {
        SamplingContext ctx(arms, 3, k);
        const auto s = battery::ids(9);
        const auto r = pac_best_k(s, k, 0.1, 0.1, {}, ctx);
        EXPECT_EQ(r.s_large.size(), k);
        EXPECT_EQ(r.s_large.size() + r.s_small.size(), 9u);
        EXPECT_EQ(detail::set_minus(s, r.s_large), r.s_small);
        EXPECT_EQ(r.samples_used, 9 * pac_pulls_per_arm(9, k, 0.1, 0.1, {}));
        EXPECT_EQ(ctx.ledger().total(), r.samples_used);
    }
}

TEST(PacBestK, RejectsBadArguments) {
    const auto arms = bern({0.1, 0.2});
    SamplingContext ctx(arms, 1, 0);
    EXPECT_THROW(pac_best_k(ArmSet{0, 1}, 0, 0.1, 0.1, {}, ctx), ValidationError);
    EXPECT_THROW(pac_best_k(ArmSet{0, 1}, 3, 0.1, 0.1, {}, ctx), ValidationError);
    EXPECT_THROW(pac_best_k(ArmSet{0, 1}, 1, 0.0, 0.1, {}, ctx), ValidationError);
    EXPECT_THROW(pac_best_k(ArmSet{0, 1}, 1, 0.1, 1.0, {}, ctx), ValidationError);
}

TEST(PacBestK, BernoulliPairMonteCarlo) {
    const auto arms = bern({0.5, 0.0});
    int hits = 0;
    for (int t = 0; t < 2000; ++t) {
        SamplingContext ctx(arms, 10, t);
        hits += pac_best_k(ArmSet{0, 1}, 1, 0.1, 0.05, {}, ctx).s_large == ArmSet{0};
    }
    EXPECT_GE(hits, 1900);
}

TEST(EstMean, SingleArmIsPlainSampling) {
    const auto arms = bern({0.3});
    SamplingContext ctx(arms, 4, 0);
    const auto r = est_mean_large(ArmSet{0}, 0.1, 0.05, {}, ctx);
    EXPECT_EQ(r.arm, 0u);
    EXPECT_EQ(r.samples_used, est_mean_pulls(0.1, 0.05, {}));
    SamplingContext ctx2(arms, 4, 1);
    EXPECT_EQ(est_mean_small(ArmSet{0}, 0.1, 0.05, {}, ctx2).samples_used, est_mean_pulls(0.1, 0.05, {}));
}

TEST(EstMean, AccountingMatchesBudget) {
    std::vector<ArmSpec> arms;
    for (std::size_t i = 0; i < 6; ++i) arms.push_back({i, Distribution::gaussian_unit_var, 0.05 * i});
    SamplingContext ctx(arms, 5, 0);
    const auto r = est_mean_large(battery::ids(6), 0.1, 0.1, {}, ctx);
    EXPECT_EQ(r.samples_used, 6 * pac_pulls_per_arm(6, 1, 0.05, 0.05, {}) + est_mean_pulls(0.1, 0.1, {}));
    EXPECT_EQ(ctx.ledger().total(), r.samples_used);
    EXPECT_THROW(est_mean_large(ArmSet{}, 0.1, 0.1, {}, ctx), ValidationError);
}

TEST(EstMean, TwoArmMonteCarlo) {
    const auto arms = bern({0.5, 0.0});
    int large_ok = 0, small_ok = 0;
    for (int t = 0; t < 2000; ++t) {
        SamplingContext a(arms, 20, t), b(arms, 21, t);
        const double hi = est_mean_large(ArmSet{0, 1}, 0.1, 0.05, {}, a).value;
        const double lo = est_mean_small(ArmSet{0, 1}, 0.1, 0.05, {}, b).value;
        large_ok += hi >= 0.4 && hi <= 0.6;
        small_ok += lo >= -0.1 && lo <= 0.1;
    }
    EXPECT_GE(large_ok, 1900);
    EXPECT_GE(small_ok, 1900);
}

TEST(Elim, LowArmsSurviveRoundOne) {
    std::vector<ArmSpec> arms;
    for (std::size_t i = 0; i < 10; ++i) arms.push_back({i, Distribution::gaussian_unit_var, 0.2});
    int full = 0;
    for (int t = 0; t < 500; ++t) {
        SamplingContext ctx(arms, 30, t);
        const auto r = elim_large(battery::ids(10), 0.2, 0.3, 0.1, {}, ctx);
        full += r.survivors.size() == 10 && r.rounds == 1;
        if (r.rounds == 1) EXPECT_EQ(r.samples_used, 10 * elim_pulls_per_arm(1, 0.2, 0.3, 0.1, {}));
    }
    EXPECT_GE(full, 490);
}

TEST(Elim, AccountingAcrossRounds) {
    std::vector<ArmSpec> arms;
    for (std::size_t i = 0; i < 30; ++i) arms.push_back({i, Distribution::gaussian_unit_var, i < 20 ? 0.26 : 0.24});
    SamplingContext ctx(arms, 31, 0);
    const auto r = elim_large(battery::ids(30), 0.2, 0.3, 0.1, {}, ctx);
    EXPECT_EQ(ctx.ledger().total(), r.samples_used);
    EXPECT_GE(r.rounds, 1u);
    std::uint64_t per_arm_min = 0;
    for (std::size_t t = 1; t <= r.rounds; ++t) per_arm_min += elim_pulls_per_arm(t, 0.2, 0.3, 0.1, {});
    for (auto a : r.survivors) EXPECT_EQ(ctx.ledger().pulls(a), per_arm_min);
}

TEST(Elim, RejectsInvertedThresholds) {
    const auto arms = bern({0.1});
    SamplingContext ctx(arms, 1, 0);
    EXPECT_THROW(elim_large(ArmSet{0}, 0.3, 0.2, 0.1, {}, ctx), ValidationError);
    EXPECT_THROW(elim_small(ArmSet{0}, 0.3, 0.3, 0.1, {}, ctx), ValidationError);
}

TEST(Elim, SmallMirrorsLargeOnReflectedMeans) {
    // Reflecting every mean about 0.25 swaps the roles of the two procedures.
    std::vector<ArmSpec> hi, lo;
    for (std::size_t i = 0; i < 12; ++i) {
        const double m = 0.2 + 0.01 * static_cast<double>(i);
        hi.push_back({i, Distribution::gaussian_unit_var, m});
        lo.push_back({i, Distribution::gaussian_unit_var, 0.5 - m});
    }
    int agree = 0;
    for (int t = 0; t < 200; ++t) {
        SamplingContext a(hi, 40, t), b(lo, 41, t);
        const auto ra = elim_large(battery::ids(12), 0.2, 0.3, 0.1, {}, a);
        const auto rb = elim_small(battery::ids(12), 0.2, 0.3, 0.1, {}, b);
        agree += std::abs(static_cast<int>(ra.survivors.size()) - static_cast<int>(rb.survivors.size())) <= 3;
    }
    EXPECT_GE(agree, 190);
}

TEST(Elim, ProtectedArmAndFractionMonteCarlo) {
    const auto o = battery::elim(true, 0.1, 2000, 77);
    EXPECT_LE(o.rate(), 0.1);
}

TEST(Battery, EveryContractWithinTolerance) {
    const double limit = 0.1 + 3 * std::sqrt(0.1 / 2000);
    for (const auto& o : battery::run_all(2000, 900)) EXPECT_LE(o.rate(), limit) << o.name;
}

TEST(Contracts, CheckersDetectViolations) {
    std::vector<ArmSpec> arms{{0, Distribution::gaussian_unit_var, 0.4},
                              {1, Distribution::gaussian_unit_var, 0.3},
                              {2, Distribution::gaussian_unit_var, 0.1}};
    SamplingContext ctx(arms, 1, 0);
    const ArmSet s{0, 1, 2};
    EXPECT_TRUE(pac_contract_holds(ctx, s, 1, 0.1, {{0}, {1, 2}, 0}));
    EXPECT_TRUE(pac_contract_holds(ctx, s, 1, 0.1 + 1e-12, {{1}, {0, 2}, 0}));  // both margins exactly eps
    EXPECT_FALSE(pac_contract_holds(ctx, s, 1, 0.1, {{2}, {0, 1}, 0}));
    EXPECT_TRUE(est_mean_large_holds(ctx, s, 0.45, 0.05 + 1e-12));
    EXPECT_FALSE(est_mean_large_holds(ctx, s, 0.2, 0.1));
    EXPECT_TRUE(est_mean_small_holds(ctx, s, 0.05, 0.1));
    EXPECT_FALSE(elim_large_holds(ctx, ArmSet{0, 2}, 0.35));
    EXPECT_TRUE(elim_large_holds(ctx, ArmSet{2}, 0.35));
    EXPECT_FALSE(elim_small_holds(ctx, ArmSet{0, 2}, 0.2));
}
