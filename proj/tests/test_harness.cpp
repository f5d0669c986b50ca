#include <gtest/gtest.h>

#include <cmath>
#include <sstream>
#include <vector>

#include "bestk/harness.hpp"

using namespace bestk;

namespace {

std::vector<double> means_of(const Instance& inst) {
    std::vector<double> m;
    for (const auto& a : inst.arms()) m.push_back(a.mean);
    return m;
}

TrialConfig small_config(std::size_t trials, std::size_t jobs) {
    TrialConfig cfg{"appendix", generate_family("appendix_a", parse_family_params("n=4,eps=0.0625")),
                    AlgorithmKind::bilateral, 0.1, trials, 99, jobs, {}};
    return cfg;
}

}  // namespace

TEST(Params, ParsesNumbersAndPowers) {
    const auto p = parse_family_params("n=4,eps=2^-4,mu=0.5");
    EXPECT_EQ(p.at("n"), "4");
    EXPECT_DOUBLE_EQ(parse_number("eps", p.at("eps")), 0.0625);
    EXPECT_THROW(parse_number("eps", "abc"), ValidationError);
    EXPECT_THROW(parse_number("eps", "0.1x"), ValidationError);
    EXPECT_THROW(parse_family_params("n4"), ValidationError);
}

TEST(Families, ExtremesAndMiddlePair) {
    const auto inst = generate_family("appendix_a", parse_family_params("n=4,eps=0.0625"));
    EXPECT_EQ(inst.size(), 10u);
    EXPECT_EQ(inst.k(), 5u);
    EXPECT_EQ(means_of(inst), (std::vector<double>{0, 0, 0, 0, 0.5, 0.5, 0.5, 0.5, 0.3125, 0.1875}));
    EXPECT_THROW(generate_family("appendix_a", parse_family_params("n=4,eps=0.25")), ValidationError);
    EXPECT_THROW(generate_family("appendix_a", parse_family_params("eps=0.1")), ValidationError);
}

TEST(Families, SymmetricBest1) {
    const auto inst = generate_family("symmetric_best1", parse_family_params("n=5,mu=0.5,Delta=0.1"));
    EXPECT_EQ(inst.size(), 6u);
    EXPECT_EQ(inst.k(), 1u);
    EXPECT_DOUBLE_EQ(inst.mean(0), 0.5);
    for (std::size_t i = 1; i < 6; ++i) EXPECT_DOUBLE_EQ(inst.mean(i), 0.4);
    EXPECT_THROW(generate_family("symmetric_best1", parse_family_params("n=5,mu=0.05,Delta=0.1")), ValidationError);
}

TEST(Families, UniformGaps) {
    const auto inst = generate_family("uniform_gaps", parse_family_params("n=3,k=1,gap=0.5"));
    EXPECT_EQ(means_of(inst), (std::vector<double>{0.5, 0.0, 0.0}));
    EXPECT_THROW(generate_family("uniform_gaps", parse_family_params("n=3,k=4,gap=0.5")), ValidationError);
}

TEST(Families, RandomIsSeededAndValid) {
    const auto a = generate_family("random", parse_family_params("n=12,k=4,seed=7"));
    const auto b = generate_family("random", parse_family_params("n=12,k=4,seed=7"));
    const auto c = generate_family("random", parse_family_params("n=12,k=4,seed=8"));
    EXPECT_EQ(a, b);
    EXPECT_NE(means_of(a), means_of(c));
    EXPECT_GT(a.kth_mean(4), a.kth_mean(5));
    for (double m : means_of(a)) EXPECT_EQ(m, std::ldexp(std::round(std::ldexp(m, 20)), -20));
}

TEST(Families, DistParamAndUnknown) {
    const auto inst = generate_family("uniform_gaps", parse_family_params("n=2,k=1,gap=0.25,dist=bernoulli"));
    EXPECT_EQ(inst.arms()[0].dist, Distribution::bernoulli);
    EXPECT_THROW(generate_family("nope", {}), ValidationError);
    EXPECT_EQ(family_label("appendix_a", parse_family_params("n=4,eps=2^-4")), "appendix_a(eps=2^-4,n=4)");
}

TEST(Wilson, KnownValues) {
    const auto [lo, hi] = wilson_interval(0, 100);
    EXPECT_NEAR(lo, 0.0, 1e-15);
    EXPECT_NEAR(hi, 0.03699, 1e-4);
    const auto [lo2, hi2] = wilson_interval(10, 100);
    EXPECT_NEAR(lo2, 0.05523, 1e-4);
    EXPECT_NEAR(hi2, 0.17437, 1e-4);
}

TEST(Summary, MedianAndP95) {
    const auto s = summarize_samples({5, 1, 4, 2, 3});
    EXPECT_DOUBLE_EQ(s.mean, 3.0);
    EXPECT_DOUBLE_EQ(s.median, 3.0);
    EXPECT_EQ(s.p95, 5u);
    const auto t = summarize_samples({1, 2, 3, 4});
    EXPECT_DOUBLE_EQ(t.median, 2.5);
    std::vector<std::uint64_t> hundred(100);
    for (int i = 0; i < 100; ++i) hundred[i] = i + 1;
    EXPECT_EQ(summarize_samples(hundred).p95, 95u);
}

TEST(RunTrials, RejectsBadConfig) {
    auto cfg = small_config(0, 1);
    EXPECT_THROW(run_trials(cfg), ValidationError);
    cfg = small_config(1, 1);
    cfg.delta = 1.5;
    EXPECT_THROW(run_trials(cfg), ValidationError);
}

TEST(RunTrials, SingleTrialReproducible) {
    const auto a = run_trials(small_config(1, 1));
    const auto b = run_trials(small_config(1, 1));
    EXPECT_EQ(to_json(a.trials[0]).dump(), to_json(b.trials[0]).dump());
}

TEST(RunTrials, ParallelismDoesNotChangeResults) {
    const auto a = run_trials(small_config(40, 1));
    const auto b = run_trials(small_config(40, 8));
    std::ostringstream sa, sb;
    write_cell_stream(sa, small_config(40, 1), a.trials);
    write_cell_stream(sb, small_config(40, 8), b.trials);
    EXPECT_EQ(sa.str(), sb.str());
    for (std::size_t i = 0; i < 40; ++i) EXPECT_EQ(a.trials[i].trial_index, i);
}

TEST(RunTrials, FreshPermutationPerTrial) {
    const auto run = run_trials(small_config(30, 4));
    std::set<ArmSet> answers;
    for (const auto& t : run.trials) {
        EXPECT_EQ(t.permutation_seed, derive_permutation_seed(99, t.trial_index));
        if (t.correct) EXPECT_EQ(t.answer, (ArmSet{4, 5, 6, 7, 8}));
    }
    EXPECT_GE(run.stats.trials - run.stats.errors, 27u);
}

TEST(Aggregate, CountsCappedAsErrors) {
    auto cfg = small_config(10, 2);
    cfg.algo.cap_mult = 1.0;
    const auto run = run_trials(cfg);
    EXPECT_EQ(run.stats.errors, 10u);
    EXPECT_DOUBLE_EQ(run.stats.capped_rate, 1.0);
}

TEST(Serialization, TrialRoundTrip) {
    const auto run = run_trials(small_config(5, 1));
    for (const auto& t : run.trials) {
        const auto back = trial_from_json(nlohmann::json::parse(to_json(t).dump()));
        EXPECT_EQ(back, t);
    }
}

TEST(Serialization, StreamReaggregatesBitForBit) {
    const auto cfg = small_config(25, 3);
    const auto run = run_trials(cfg);
    std::stringstream ss;
    write_cell_stream(ss, cfg, run.trials);
    const auto cells = read_cell_streams(ss);
    ASSERT_EQ(cells.size(), 1u);
    EXPECT_EQ(csv_row(cells[0].header, aggregate(cells[0].trials)), csv_row(cell_header(cfg), run.stats));
    EXPECT_EQ(to_json(aggregate(cells[0].trials)), to_json(run.stats));
}

TEST(Serialization, HeaderCarriesConfig) {
    const auto h = cell_header(small_config(3, 1));
    EXPECT_EQ(h["type"], "header");
    EXPECT_EQ(h["master_seed"], 99u);
    EXPECT_EQ(h["config"]["delta_prime_variant"], "proof");
    EXPECT_NEAR(h["complexity"]["H"].get<double>(), 209.92, 1e-9);
    EXPECT_EQ(instance_from_json(h["instance"]).size(), 10u);
}

TEST(Serialization, MalformedStreams) {
    std::stringstream a("{\"type\":\"trial\"}\n");
    EXPECT_THROW(read_cell_streams(a), ValidationError);
    std::stringstream b("not json\n");
    EXPECT_THROW(read_cell_streams(b), ValidationError);
}

TEST(Config, JsonRoundTripAndErrors) {
    AlgorithmConfig c;
    c.cap_mult = 64;
    c.round_cap_slack = 3;
    c.delta_prime_variant = DeltaPrimeVariant::pseudocode;
    c.sub.elim_round_const = 4;
    const auto back = algorithm_config_from_json(to_json(c));
    EXPECT_EQ(to_json(back), to_json(c));
    EXPECT_THROW(algorithm_config_from_json(nlohmann::json::parse(R"({"cap_mult": "x"})")), ValidationError);
    EXPECT_THROW(algorithm_config_from_json(nlohmann::json::parse(R"({"elim_stop_fraction": 0.5})")), ValidationError);
    EXPECT_THROW(algorithm_config_from_json(nlohmann::json::parse("[]")), ValidationError);
}
