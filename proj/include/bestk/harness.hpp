// harness.hpp
//
// Seeded Monte Carlo runner: instance families, per-trial execution on a
// fresh random permutation, aggregation, and the NDJSON / CSV file formats.
#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <json.hpp>

#include "bestk/algorithm.hpp"
#include "bestk/complexity.hpp"
#include "bestk/errors.hpp"
#include "bestk/instance.hpp"

namespace bestk {

// ---------------------------------------------------------------------------
// Family parameters: "n=4,eps=0.0625". Numeric values may be written 2^-4.

using FamilyParams = std::map<std::string, std::string>;

inline double parse_number(const std::string& key, const std::string& text) {
    const auto caret = text.find('^');
    try {
        std::size_t used = 0;
        if (caret != std::string::npos) {
            const double base = std::stod(text.substr(0, caret), &used);
            if (used != caret) throw std::invalid_argument(text);
            const std::string ex = text.substr(caret + 1);
            const double exponent = std::stod(ex, &used);
            if (used != ex.size()) throw std::invalid_argument(text);
            return std::pow(base, exponent);
        }
        const double v = std::stod(text, &used);
        if (used != text.size()) throw std::invalid_argument(text);
        return v;
    } catch (const std::logic_error&) {
        throw ValidationError(key + ": not a number: \"" + text + "\"");
    }
}

inline FamilyParams parse_family_params(const std::string& text) {
    FamilyParams out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        if (item.empty()) continue;
        const auto eq = item.find('=');
        if (eq == std::string::npos || eq == 0) throw ValidationError("params: expected key=value, got \"" + item + "\"");
        out[item.substr(0, eq)] = item.substr(eq + 1);
    }
    return out;
}

namespace detail {

inline double number_param(const FamilyParams& p, const std::string& key) {
    const auto it = p.find(key);
    if (it == p.end()) throw ValidationError(key + ": required parameter missing");
    return parse_number(key, it->second);
}

inline std::size_t count_param(const FamilyParams& p, const std::string& key) {
    const double v = number_param(p, key);
    if (!(v >= 0.0) || v != std::floor(v) || v > 1e9)
        throw ValidationError(key + ": expected a nonnegative integer");
    return static_cast<std::size_t>(v);
}

inline Distribution dist_param(const FamilyParams& p) {
    const auto it = p.find("dist");
    return it == p.end() ? Distribution::gaussian_unit_var : parse_distribution(it->second);
}

inline std::vector<ArmSpec> arms_from_means(const std::vector<double>& means, Distribution dist) {
    std::vector<ArmSpec> arms;
    for (std::size_t i = 0; i < means.size(); ++i) arms.push_back({i, dist, means[i]});
    return arms;
}

}  // namespace detail

/**
 * Built-in instance families:
 *  - appendix_a(n, eps): n arms at 0, n at 1/2, one at 1/4+eps and one at 1/4-eps; k = n+1.
 *  - symmetric_best1(n, mu, Delta): one arm at mu and n arms at mu-Delta; k = 1.
 *  - uniform_gaps(n, k, gap): k arms at 1/2 and n-k arms at 1/2-gap.
 *  - random(n, k, seed): means uniform on the 2^-20 grid in [0, 1/2],
 *    redrawn until the k-th and (k+1)-th means differ.
 * Every family accepts an optional dist=gaussian|bernoulli.
 */
inline Instance generate_family(const std::string& name, const FamilyParams& params) {
    const Distribution dist = detail::dist_param(params);
    if (name == "appendix_a") {
        const auto n = detail::count_param(params, "n");
        const double eps = detail::number_param(params, "eps");
        if (n < 1) throw ValidationError("n: must be at least 1");
        if (!(eps > 0.0 && eps < 0.25)) throw ValidationError("eps: must lie in (0, 1/4)");
        std::vector<double> means(n, 0.0);
        means.insert(means.end(), n, 0.5);
        means.push_back(0.25 + eps);
        means.push_back(0.25 - eps);
        return Instance(detail::arms_from_means(means, dist), n + 1);
    }
    if (name == "symmetric_best1") {
        const auto n = detail::count_param(params, "n");
        const double mu = detail::number_param(params, "mu");
        const double gap_value = detail::number_param(params, "Delta");
        if (n < 1) throw ValidationError("n: must be at least 1");
        if (!(gap_value > 0.0)) throw ValidationError("Delta: must be > 0");
        if (!(mu <= 0.5 && mu - gap_value >= 0.0)) throw ValidationError("mu: means must stay within [0, 0.5]");
        std::vector<double> means{mu};
        means.insert(means.end(), n, mu - gap_value);
        return Instance(detail::arms_from_means(means, dist), 1);
    }
    if (name == "uniform_gaps") {
        const auto n = detail::count_param(params, "n");
        const auto k = detail::count_param(params, "k");
        const double g = detail::number_param(params, "gap");
        if (!(g > 0.0 && g <= 0.5)) throw ValidationError("gap: must lie in (0, 0.5]");
        if (k < 1 || k > n) throw ValidationError("k: must lie in [1, n]");
        std::vector<double> means(k, 0.5);
        means.insert(means.end(), n - k, 0.5 - g);
        return Instance(detail::arms_from_means(means, dist), k);
    }
    if (name == "random") {
        const auto n = detail::count_param(params, "n");
        const auto k = detail::count_param(params, "k");
        const auto seed = static_cast<std::uint64_t>(detail::number_param(params, "seed"));
        if (n < 1) throw ValidationError("n: must be at least 1");
        if (k < 1 || k > n) throw ValidationError("k: must lie in [1, n]");
        RngStream rng(seed, 0x72616E646F6DULL);
        for (;;) {
            std::vector<double> means(n);
            for (auto& m : means) m = std::ldexp(static_cast<double>(rng.below((1u << 19) + 1)), -20);
            std::vector<double> sorted = means;
            std::sort(sorted.begin(), sorted.end(), std::greater<>());
            if (k == n || sorted[k - 1] > sorted[k]) return Instance(detail::arms_from_means(means, dist), k);
        }
    }
    throw ValidationError("family: unknown family \"" + name + "\"");
}

inline std::string family_label(const std::string& name, const FamilyParams& params) {
    std::string out = name + "(";
    bool first = true;
    for (const auto& [k, v] : params) {
        if (!first) out += ",";
        out += k + "=" + v;
        first = false;
    }
    return out + ")";
}

// ---------------------------------------------------------------------------

enum class AlgorithmKind { bilateral, uniform };

inline std::string_view to_string(AlgorithmKind a) { return a == AlgorithmKind::bilateral ? "bilateral" : "uniform"; }

inline AlgorithmKind parse_algorithm(std::string_view s) {
    if (s == "bilateral") return AlgorithmKind::bilateral;
    if (s == "uniform") return AlgorithmKind::uniform;
    throw ValidationError("algo: expected \"bilateral\" or \"uniform\"");
}

struct TrialConfig {
    std::string instance_label;
    Instance instance;
    AlgorithmKind algorithm = AlgorithmKind::bilateral;
    double delta = 0.1;
    std::size_t trials = 1;
    std::uint64_t master_seed = 0;
    std::size_t parallelism = 1;
    AlgorithmConfig algo;

    void validate() const {
        if (trials < 1) throw ValidationError("trials: must be at least 1");
        if (!(delta > 0.0 && delta < 1.0)) throw ValidationError("delta: must lie in (0, 1)");
        if (parallelism < 1) throw ValidationError("jobs: must be at least 1");
        algo.validate();
    }
};

struct TrialResult {
    std::size_t trial_index = 0;
    std::uint64_t permutation_seed = 0;
    ArmSet answer;  ///< ids in the unpermuted instance
    bool correct = false;
    bool capped = false;
    std::uint64_t total_samples = 0;
    bool contracts_held = true;
    bool valid = true;
    std::vector<RoundTelemetry> rounds;

    friend bool operator==(const TrialResult& a, const TrialResult& b);
};

/// Runs one trial: fresh permutation, per-arm streams, correctness against the unpermuted truth.
inline TrialResult run_single_trial(const TrialConfig& cfg, std::size_t trial_index) {
    TrialResult out;
    out.trial_index = trial_index;
    out.permutation_seed = derive_permutation_seed(cfg.master_seed, trial_index);
    const auto order = permutation_order(cfg.instance.size(), out.permutation_seed);
    const Instance permuted = permute(cfg.instance, out.permutation_seed);
    SamplingContext ctx(permuted.arms(), cfg.master_seed, trial_index);
    const RunResult run = cfg.algorithm == AlgorithmKind::bilateral
                              ? bilateral_elimination(permuted, cfg.delta, cfg.algo, ctx)
                              : uniform_baseline(permuted, cfg.delta, cfg.algo, ctx);
    for (auto a : run.answer) out.answer.push_back(order[a]);
    std::sort(out.answer.begin(), out.answer.end());
    out.capped = run.capped;
    out.correct = !run.capped && out.answer == top_k_set(cfg.instance);
    out.total_samples = run.total_samples;
    out.contracts_held = run.contracts_held();
    out.valid = run.valid();
    out.rounds = run.rounds;
    return out;
}

struct SampleSummary {
    double mean = 0.0;
    double median = 0.0;
    std::uint64_t p95 = 0;
};

struct AggregateStats {
    std::size_t trials = 0;
    std::size_t errors = 0;
    double error_rate = 0.0;
    double wilson_lo = 0.0;
    double wilson_hi = 0.0;
    SampleSummary samples;
    double capped_rate = 0.0;
    double contract_round_rate = 1.0;  ///< rounds in which all five contracts held
    double valid_rate = 1.0;           ///< trials whose whole execution was valid
    double obs2_rate = 1.0;            ///< threshold bracket held, over rounds whose contracts held
    double obs3_rate = 1.0;            ///< live-count bound held, over rounds of valid trials
    std::map<std::size_t, std::size_t> rounds_histogram;  ///< sampling rounds used -> trial count
    std::map<int, std::uint64_t> samples_by_round;        ///< round index -> samples summed over trials
};

/// Wilson score interval for `successes` out of `n` at z = 1.959963984540054.
inline std::pair<double, double> wilson_interval(std::size_t successes, std::size_t n) {
    if (n == 0) return {0.0, 1.0};
    constexpr double z = 1.959963984540054;
    const double nn = static_cast<double>(n);
    const double p = static_cast<double>(successes) / nn;
    const double denom = 1.0 + z * z / nn;
    const double center = (p + z * z / (2.0 * nn)) / denom;
    const double half = z * std::sqrt(p * (1.0 - p) / nn + z * z / (4.0 * nn * nn)) / denom;
    return {std::max(0.0, center - half), std::min(1.0, center + half)};
}

inline SampleSummary summarize_samples(std::vector<std::uint64_t> v) {
    SampleSummary s;
    if (v.empty()) return s;
    std::sort(v.begin(), v.end());
    long double total = 0;
    for (auto x : v) total += static_cast<long double>(x);
    s.mean = static_cast<double>(total / static_cast<long double>(v.size()));
    const std::size_t m = v.size() / 2;
    s.median = v.size() % 2 == 1 ? static_cast<double>(v[m])
                                 : (static_cast<double>(v[m - 1]) + static_cast<double>(v[m])) / 2.0;
    const auto rank = static_cast<std::size_t>(std::ceil(0.95 * static_cast<double>(v.size())));
    s.p95 = v[std::max<std::size_t>(rank, 1) - 1];
    return s;
}

inline AggregateStats aggregate(const std::vector<TrialResult>& trials) {
    AggregateStats st;
    st.trials = trials.size();
    std::vector<std::uint64_t> samples;
    std::size_t capped = 0, valid = 0;
    std::size_t rounds_total = 0, rounds_good = 0, obs2_pass = 0, obs3_total = 0, obs3_pass = 0;
    for (const auto& t : trials) {
        if (!t.correct) ++st.errors;
        if (t.capped) ++capped;
        if (t.valid) ++valid;
        samples.push_back(t.total_samples);
        std::size_t sampling_rounds = 0;
        for (const auto& r : t.rounds) {
            st.samples_by_round[r.r] += r.samples_this_round;
            if (r.terminal) continue;
            ++sampling_rounds;
            ++rounds_total;
            if (r.good()) {
                ++rounds_good;
                if (r.obs2_ok) ++obs2_pass;
            }
        }
        if (t.valid) {
            for (const auto& r : t.rounds) {
                ++obs3_total;
                if (r.obs3_ok) ++obs3_pass;
            }
        }
        ++st.rounds_histogram[sampling_rounds];
    }
    const double n = static_cast<double>(st.trials);
    st.error_rate = st.trials ? static_cast<double>(st.errors) / n : 0.0;
    std::tie(st.wilson_lo, st.wilson_hi) = wilson_interval(st.errors, st.trials);
    st.samples = summarize_samples(std::move(samples));
    st.capped_rate = st.trials ? static_cast<double>(capped) / n : 0.0;
    st.valid_rate = st.trials ? static_cast<double>(valid) / n : 1.0;
    st.contract_round_rate = rounds_total ? static_cast<double>(rounds_good) / static_cast<double>(rounds_total) : 1.0;
    st.obs2_rate = rounds_good ? static_cast<double>(obs2_pass) / static_cast<double>(rounds_good) : 1.0;
    st.obs3_rate = obs3_total ? static_cast<double>(obs3_pass) / static_cast<double>(obs3_total) : 1.0;
    return st;
}

struct TrialRun {
    AggregateStats stats;
    std::vector<TrialResult> trials;
};

/// Runs every trial; output order is trial order regardless of parallelism.
inline TrialRun run_trials(const TrialConfig& cfg) {
    cfg.validate();
    TrialRun out;
    out.trials.resize(cfg.trials);
    const std::size_t workers = std::min(cfg.parallelism, cfg.trials);
    if (workers <= 1) {
        for (std::size_t i = 0; i < cfg.trials; ++i) out.trials[i] = run_single_trial(cfg, i);
    } else {
        std::atomic<std::size_t> next{0};
        std::vector<std::exception_ptr> errors(workers);
        std::vector<std::thread> pool;
        for (std::size_t w = 0; w < workers; ++w) {
            pool.emplace_back([&, w] {
                try {
                    for (std::size_t i = next++; i < cfg.trials; i = next++) out.trials[i] = run_single_trial(cfg, i);
                } catch (...) {
                    errors[w] = std::current_exception();
                }
            });
        }
        for (auto& t : pool) t.join();
        for (auto& e : errors)
            if (e) std::rethrow_exception(e);
    }
    out.stats = aggregate(out.trials);
    return out;
}

// ---------------------------------------------------------------------------
// Serialization.

inline nlohmann::json to_json(const SubroutineConfig& c) {
    return {{"pac_budget_const", c.pac_budget_const},
            {"em_budget_const", c.em_budget_const},
            {"elim_round_const", c.elim_round_const},
            {"elim_stop_fraction", c.elim_stop_fraction}};
}

inline nlohmann::json to_json(const AlgorithmConfig& c) {
    auto j = to_json(c.sub);
    j["delta_prime_variant"] = std::string(to_string(c.delta_prime_variant));
    j["cap_mult"] = c.cap_mult;
    j["round_cap_slack"] = c.round_cap_slack;
    return j;
}

/// Reads an algorithm config; absent keys keep their defaults.
inline AlgorithmConfig algorithm_config_from_json(const nlohmann::json& j) {
    if (!j.is_object()) throw ValidationError("config: expected a JSON object");
    AlgorithmConfig c;
    auto num = [&](const char* key, double& field) {
        if (!j.contains(key)) return;
        if (!j[key].is_number()) throw ValidationError(std::string(key) + ": expected a number");
        field = j[key].get<double>();
    };
    num("pac_budget_const", c.sub.pac_budget_const);
    num("em_budget_const", c.sub.em_budget_const);
    num("elim_round_const", c.sub.elim_round_const);
    num("elim_stop_fraction", c.sub.elim_stop_fraction);
    num("cap_mult", c.cap_mult);
    if (j.contains("round_cap_slack")) {
        if (!j["round_cap_slack"].is_number_integer()) throw ValidationError("round_cap_slack: expected an integer");
        c.round_cap_slack = j["round_cap_slack"].get<int>();
    }
    if (j.contains("delta_prime_variant")) {
        if (!j["delta_prime_variant"].is_string()) throw ValidationError("delta_prime_variant: expected a string");
        c.delta_prime_variant = parse_delta_prime_variant(j["delta_prime_variant"].get<std::string>());
    }
    c.validate();
    return c;
}

namespace detail {
inline nlohmann::json number_or_null(double x) { return std::isfinite(x) ? nlohmann::json(x) : nlohmann::json(nullptr); }
inline double number_from(const nlohmann::json& j) {
    return j.is_null() ? std::numeric_limits<double>::quiet_NaN() : j.get<double>();
}
}  // namespace detail

inline nlohmann::json to_json(const RoundTelemetry& t) {
    return {{"r", t.r},
            {"k_large", t.k_large},
            {"k_small", t.k_small},
            {"delta_r", t.delta_r},
            {"delta_prime_r", t.delta_prime_r},
            {"theta_large", detail::number_or_null(t.theta_large)},
            {"theta_small", detail::number_or_null(t.theta_small)},
            {"samples", t.samples_this_round},
            {"samples_pac", t.samples_pac},
            {"samples_est_large", t.samples_est_large},
            {"samples_est_small", t.samples_est_small},
            {"samples_elim_large", t.samples_elim_large},
            {"samples_elim_small", t.samples_elim_small},
            {"accepted", t.accepted},
            {"discarded", t.discarded},
            {"terminal", t.terminal},
            {"pac_ok", t.pac_ok},
            {"est_large_ok", t.est_large_ok},
            {"est_small_ok", t.est_small_ok},
            {"elim_large_ok", t.elim_large_ok},
            {"elim_small_ok", t.elim_small_ok},
            {"misclassified_kept", t.misclassified_kept},
            {"consistent", t.consistent},
            {"obs2_ok", t.obs2_ok},
            {"obs3_ok", t.obs3_ok}};
}

inline RoundTelemetry round_from_json(const nlohmann::json& j) {
    RoundTelemetry t;
    t.r = j.at("r").get<int>();
    t.k_large = j.at("k_large").get<std::size_t>();
    t.k_small = j.at("k_small").get<std::size_t>();
    t.delta_r = j.at("delta_r").get<double>();
    t.delta_prime_r = j.at("delta_prime_r").get<double>();
    t.theta_large = detail::number_from(j.at("theta_large"));
    t.theta_small = detail::number_from(j.at("theta_small"));
    t.samples_this_round = j.at("samples").get<std::uint64_t>();
    t.samples_pac = j.at("samples_pac").get<std::uint64_t>();
    t.samples_est_large = j.at("samples_est_large").get<std::uint64_t>();
    t.samples_est_small = j.at("samples_est_small").get<std::uint64_t>();
    t.samples_elim_large = j.at("samples_elim_large").get<std::uint64_t>();
    t.samples_elim_small = j.at("samples_elim_small").get<std::uint64_t>();
    t.accepted = j.at("accepted").get<std::size_t>();
    t.discarded = j.at("discarded").get<std::size_t>();
    t.terminal = j.at("terminal").get<bool>();
    t.pac_ok = j.at("pac_ok").get<bool>();
    t.est_large_ok = j.at("est_large_ok").get<bool>();
    t.est_small_ok = j.at("est_small_ok").get<bool>();
    t.elim_large_ok = j.at("elim_large_ok").get<bool>();
    t.elim_small_ok = j.at("elim_small_ok").get<bool>();
    t.misclassified_kept = j.at("misclassified_kept").get<bool>();
    t.consistent = j.at("consistent").get<bool>();
    t.obs2_ok = j.at("obs2_ok").get<bool>();
    t.obs3_ok = j.at("obs3_ok").get<bool>();
    return t;
}

inline nlohmann::json to_json(const TrialResult& t) {
    nlohmann::json rounds = nlohmann::json::array();
    for (const auto& r : t.rounds) rounds.push_back(to_json(r));
    return {{"type", "trial"},
            {"trial", t.trial_index},
            {"seed", t.permutation_seed},
            {"answer", t.answer},
            {"correct", t.correct},
            {"capped", t.capped},
            {"total_samples", t.total_samples},
            {"contracts_held", t.contracts_held},
            {"valid", t.valid},
            {"rounds", std::move(rounds)}};
}

inline TrialResult trial_from_json(const nlohmann::json& j) {
    TrialResult t;
    t.trial_index = j.at("trial").get<std::size_t>();
    t.permutation_seed = j.at("seed").get<std::uint64_t>();
    t.answer = j.at("answer").get<ArmSet>();
    t.correct = j.at("correct").get<bool>();
    t.capped = j.at("capped").get<bool>();
    t.total_samples = j.at("total_samples").get<std::uint64_t>();
    t.contracts_held = j.at("contracts_held").get<bool>();
    t.valid = j.at("valid").get<bool>();
    for (const auto& r : j.at("rounds")) t.rounds.push_back(round_from_json(r));
    return t;
}

inline bool operator==(const TrialResult& a, const TrialResult& b) { return to_json(a) == to_json(b); }

/// Header record preceding a cell's trial records; carries the full resolved configuration.
inline nlohmann::json cell_header(const TrialConfig& cfg) {
    nlohmann::json complexity = nullptr;
    if (cfg.instance.k() < cfg.instance.size()) {
        const auto rep = analyze(cfg.instance);
        complexity = {{"H", rep.H},
                      {"H_tilde", rep.H_tilde},
                      {"H_tilde_large", rep.H_tilde_large},
                      {"H_tilde_small", rep.H_tilde_small},
                      {"upper_bound", upper_bound_complexity(rep, cfg.delta)}};
    }
    return {{"type", "header"},
            {"instance_label", cfg.instance_label},
            {"instance", to_json(cfg.instance)},
            {"algorithm", std::string(to_string(cfg.algorithm))},
            {"delta", cfg.delta},
            {"trials", cfg.trials},
            {"master_seed", cfg.master_seed},
            {"config", to_json(cfg.algo)},
            {"complexity", complexity}};
}

inline void write_cell_stream(std::ostream& out, const TrialConfig& cfg, const std::vector<TrialResult>& trials) {
    out << cell_header(cfg).dump() << '\n';
    for (const auto& t : trials) out << to_json(t).dump() << '\n';
}

/// One header plus its trials, as read back from a stream.
struct CellRecords {
    nlohmann::json header;
    std::vector<TrialResult> trials;
};

inline std::vector<CellRecords> read_cell_streams(std::istream& in) {
    std::vector<CellRecords> cells;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        nlohmann::json j;
        try {
            j = nlohmann::json::parse(line);
        } catch (const nlohmann::json::parse_error& e) {
            throw ValidationError("line " + std::to_string(lineno) + ": " + e.what());
        }
        const auto type = j.value("type", std::string{});
        if (type == "header") {
            cells.push_back({j, {}});
        } else if (type == "trial") {
            if (cells.empty()) throw ValidationError("line " + std::to_string(lineno) + ": trial before any header");
            try {
                cells.back().trials.push_back(trial_from_json(j));
            } catch (const nlohmann::json::exception& e) {
                throw ValidationError("line " + std::to_string(lineno) + ": " + e.what());
            }
        } else {
            throw ValidationError("line " + std::to_string(lineno) + ": unknown record type");
        }
    }
    return cells;
}

// ---------------------------------------------------------------------------
// Aggregate CSV: one row per (instance, algorithm, delta) cell.

namespace detail {
inline std::string fmt_double(double x) {
    if (!std::isfinite(x)) return "";
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}
inline std::string csv_field(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += '"';
        out += c;
    }
    return out + "\"";
}
}  // namespace detail

inline std::string csv_header() {
    return "instance,n,k,algorithm,delta,trials,master_seed,delta_prime_variant,cap_mult,round_cap_slack,"
           "pac_budget_const,em_budget_const,elim_round_const,elim_stop_fraction,"
           "errors,error_rate,wilson_lo,wilson_hi,samples_mean,samples_median,samples_p95,capped_rate,"
           "contract_round_rate,valid_rate,obs2_rate,obs3_rate,rounds_histogram,"
           "H,H_tilde,H_tilde_large,H_tilde_small,upper_bound,median_over_bound,mean_over_bound";
}

/// CSV row from a cell header and its aggregate; a pure function of both.
inline std::string csv_row(const nlohmann::json& header, const AggregateStats& st) {
    using detail::fmt_double;
    const auto& cfg = header.at("config");
    const auto& inst = header.at("instance");
    std::string hist;
    for (const auto& [rounds, count] : st.rounds_histogram) {
        if (!hist.empty()) hist += ';';
        hist += std::to_string(rounds) + ":" + std::to_string(count);
    }
    std::vector<std::string> f;
    f.push_back(detail::csv_field(header.at("instance_label").get<std::string>()));
    f.push_back(std::to_string(inst.at("arms").size()));
    f.push_back(std::to_string(inst.at("k").get<std::size_t>()));
    f.push_back(header.at("algorithm").get<std::string>());
    f.push_back(fmt_double(header.at("delta").get<double>()));
    f.push_back(std::to_string(header.at("trials").get<std::size_t>()));
    f.push_back(std::to_string(header.at("master_seed").get<std::uint64_t>()));
    f.push_back(cfg.at("delta_prime_variant").get<std::string>());
    f.push_back(fmt_double(cfg.at("cap_mult").get<double>()));
    f.push_back(std::to_string(cfg.at("round_cap_slack").get<int>()));
    f.push_back(fmt_double(cfg.at("pac_budget_const").get<double>()));
    f.push_back(fmt_double(cfg.at("em_budget_const").get<double>()));
    f.push_back(fmt_double(cfg.at("elim_round_const").get<double>()));
    f.push_back(fmt_double(cfg.at("elim_stop_fraction").get<double>()));
    f.push_back(std::to_string(st.errors));
    f.push_back(fmt_double(st.error_rate));
    f.push_back(fmt_double(st.wilson_lo));
    f.push_back(fmt_double(st.wilson_hi));
    f.push_back(fmt_double(st.samples.mean));
    f.push_back(fmt_double(st.samples.median));
    f.push_back(std::to_string(st.samples.p95));
    f.push_back(fmt_double(st.capped_rate));
    f.push_back(fmt_double(st.contract_round_rate));
    f.push_back(fmt_double(st.valid_rate));
    f.push_back(fmt_double(st.obs2_rate));
    f.push_back(fmt_double(st.obs3_rate));
    f.push_back(hist);
    const auto& cx = header.at("complexity");
    if (cx.is_null()) {
        for (int i = 0; i < 7; ++i) f.emplace_back();
    } else {
        const double bound = cx.at("upper_bound").get<double>();
        f.push_back(fmt_double(cx.at("H").get<double>()));
        f.push_back(fmt_double(cx.at("H_tilde").get<double>()));
        f.push_back(fmt_double(cx.at("H_tilde_large").get<double>()));
        f.push_back(fmt_double(cx.at("H_tilde_small").get<double>()));
        f.push_back(fmt_double(bound));
        f.push_back(fmt_double(st.samples.median / bound));
        f.push_back(fmt_double(st.samples.mean / bound));
    }
    std::string row;
    for (std::size_t i = 0; i < f.size(); ++i) {
        if (i) row += ',';
        row += f[i];
    }
    return row;
}

inline nlohmann::json to_json(const AggregateStats& st) {
    nlohmann::json hist = nlohmann::json::object();
    for (const auto& [r, c] : st.rounds_histogram) hist[std::to_string(r)] = c;
    nlohmann::json by_round = nlohmann::json::object();
    for (const auto& [r, s] : st.samples_by_round) by_round[std::to_string(r)] = s;
    return {{"trials", st.trials},
            {"errors", st.errors},
            {"error_rate", st.error_rate},
            {"wilson_lo", st.wilson_lo},
            {"wilson_hi", st.wilson_hi},
            {"samples", {{"mean", st.samples.mean}, {"median", st.samples.median}, {"p95", st.samples.p95}}},
            {"capped_rate", st.capped_rate},
            {"contract_round_rate", st.contract_round_rate},
            {"valid_rate", st.valid_rate},
            {"obs2_rate", st.obs2_rate},
            {"obs3_rate", st.obs3_rate},
            {"rounds_histogram", hist},
            {"samples_by_round", by_round}};
}

}  // namespace bestk
