// algorithm.hpp
#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include "bestk/arm_model.hpp"
#include "bestk/complexity.hpp"
#include "bestk/errors.hpp"
#include "bestk/instance.hpp"
#include "bestk/subroutines.hpp"

namespace bestk {

/// How the elimination confidence delta'_r is derived from round quantities.
enum class DeltaPrimeVariant {
    proof,       ///< delta_r / max(1, min(k_large, k_small))
    pseudocode,  ///< delta / min(k_large, k_small)
};

inline std::string_view to_string(DeltaPrimeVariant v) { return v == DeltaPrimeVariant::proof ? "proof" : "pseudocode"; }

inline DeltaPrimeVariant parse_delta_prime_variant(std::string_view s) {
    if (s == "proof") return DeltaPrimeVariant::proof;
    if (s == "pseudocode") return DeltaPrimeVariant::pseudocode;
    throw ValidationError("delta_prime_variant: expected \"proof\" or \"pseudocode\"");
}

struct AlgorithmConfig {
    SubroutineConfig sub;
    DeltaPrimeVariant delta_prime_variant = DeltaPrimeVariant::proof;
    /// Hard budget = cap_mult * (H ln(1/delta) + H~ + H~^large + H~^small).
    double cap_mult = 1 << 16;
    /// Round guard: r <= ceil(log2(1/Delta_[k])) + round_cap_slack.
    int round_cap_slack = 16;

    void validate() const {
        sub.validate();
        if (!(cap_mult > 0.0)) throw ValidationError("cap_mult: must be > 0");
        if (round_cap_slack < 0) throw ValidationError("round_cap_slack: must be >= 0");
    }
};

/**
 * One round of bilateral elimination. Thresholds are NaN on rounds that
 * return before sampling (`terminal`). The *_ok fields compare the run
 * against true means and are only meaningful in simulation.
 */
struct RoundTelemetry {
    int r = 0;
    std::size_t k_large = 0;
    std::size_t k_small = 0;
    double delta_r = 0.0;
    double delta_prime_r = 0.0;
    double theta_large = std::numeric_limits<double>::quiet_NaN();
    double theta_small = std::numeric_limits<double>::quiet_NaN();
    std::uint64_t samples_this_round = 0;
    std::uint64_t samples_pac = 0;
    std::uint64_t samples_est_large = 0;
    std::uint64_t samples_est_small = 0;
    std::uint64_t samples_elim_large = 0;
    std::uint64_t samples_elim_small = 0;
    std::size_t accepted = 0;   ///< arms moved from S^large_r into the answer
    std::size_t discarded = 0;  ///< arms dropped from S^small_r
    bool terminal = false;

    bool pac_ok = true;
    bool est_large_ok = true;
    bool est_small_ok = true;
    bool elim_large_ok = true;
    bool elim_small_ok = true;
    bool misclassified_kept = true;  ///< no PAC-misclassified arm was eliminated
    bool consistent = true;          ///< T_r plus the best k_large arms of S_r is the true answer
    bool obs2_ok = true;
    bool obs3_ok = true;

    bool good() const { return pac_ok && est_large_ok && est_small_ok && elim_large_ok && elim_small_ok; }
};

struct RunResult {
    ArmSet answer;
    std::vector<RoundTelemetry> rounds;
    std::uint64_t total_samples = 0;
    bool capped = false;

    /// Every subroutine contract held in every round.
    bool contracts_held() const {
        return std::all_of(rounds.begin(), rounds.end(), [](const RoundTelemetry& t) { return t.good(); });
    }
    /// Contracts held and the state stayed consistent with the true answer throughout.
    bool valid() const {
        return std::all_of(rounds.begin(), rounds.end(),
                           [](const RoundTelemetry& t) { return t.good() && t.consistent; });
    }
};

namespace detail {

inline ArmSet set_union(const ArmSet& a, const ArmSet& b) {
    ArmSet out;
    std::set_union(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
    return out;
}

inline std::size_t intersection_size(const ArmSet& a, const ArmSet& b) {
    std::size_t c = 0;
    auto i = a.begin();
    auto j = b.begin();
    while (i != a.end() && j != b.end()) {
        if (*i < *j) {
            ++i;
        } else if (*j < *i) {
            ++j;
        } else {
            ++c;
            ++i;
            ++j;
        }
    }
    return c;
}

/// `count` arms of `s` with the highest empirical means; unpulled arms rank last.
inline ArmSet empirical_top(const SamplingContext& ctx, const ArmSet& s, std::size_t count) {
    std::vector<double> score;
    score.reserve(s.size());
    for (auto a : s) score.push_back(ctx.ledger().empirical_mean(a).value_or(-std::numeric_limits<double>::infinity()));
    return select_top(s, score, count);
}

inline std::uint64_t budget_for(const Instance& inst, double delta, double cap_mult) {
    if (inst.k() == inst.size()) return std::numeric_limits<std::uint64_t>::max();
    const double cap = cap_mult * upper_bound_complexity(analyze(inst), delta);
    if (!(cap < 1.8e19)) return std::numeric_limits<std::uint64_t>::max();
    return static_cast<std::uint64_t>(cap);
}

/// Caps further sampling on `ledger` at `extra` more pulls.
inline void limit_budget(SampleLedger& ledger, std::uint64_t extra) {
    const auto room = std::numeric_limits<std::uint64_t>::max() - ledger.total();
    ledger.set_budget(std::min(ledger.budget(), ledger.total() + std::min(extra, room)));
}

inline void check_delta(double delta) {
    if (!(delta > 0.0 && delta < 1.0)) throw ValidationError("delta: must lie in (0, 1)");
}

}  // namespace detail

/**
 * Bilateral elimination for Best-k-Arm.
 *
 * Each round partitions the live set S_r with a PAC top-k call at accuracy
 * eps_r/8, estimates the two boundary means, then eliminates from both sides:
 * arms confidently above the boundary join the answer T, arms confidently
 * below it are dropped. Returns T_r once no answer slots remain, or
 * T_r with S_r once every live arm is needed.
 *
 * The ledger budget is set to cap_mult times the upper-bound complexity; a
 * run that would exceed it, or the round guard, stops with `capped` set and
 * a best guess from empirical means.
 */
inline RunResult bilateral_elimination(const Instance& inst, double delta, const AlgorithmConfig& cfg,
                                       SamplingContext& ctx) {
    detail::check_delta(delta);
    cfg.validate();

    const std::size_t n = inst.size();
    const std::size_t k = inst.k();
    const bool degenerate = k == n;
    ArmGroupDecomposition groups;
    int round_cap = std::numeric_limits<int>::max();
    if (!degenerate) {
        groups = decompose_groups(inst);
        round_cap = static_cast<int>(std::ceil(std::log2(1.0 / boundary_gap(inst)))) + cfg.round_cap_slack;
    }
    const auto budget = detail::budget_for(inst, delta, cfg.cap_mult);
    detail::limit_budget(ctx.ledger(), budget);
    const std::uint64_t start_total = ctx.ledger().total();
    const ArmSet truth = top_k_set(inst);

    RunResult run;
    ArmSet live(n);
    for (std::size_t i = 0; i < n; ++i) live[i] = i;
    ArmSet answer;

    auto best_guess = [&](std::size_t k_large) {
        run.capped = true;
        run.answer = detail::set_union(answer, detail::empirical_top(ctx, live, k_large));
        run.total_samples = ctx.ledger().total() - start_total;
        return run;
    };

    for (int r = 1;; ++r) {
        RoundTelemetry tel;
        tel.r = r;
        tel.k_large = k - answer.size();
        tel.k_small = live.size() - tel.k_large;
        tel.consistent = std::includes(truth.begin(), truth.end(), answer.begin(), answer.end()) &&
                         detail::intersection_size(truth, live) == tel.k_large;
        if (!degenerate) {
            tel.obs3_ok = tel.k_large <= 2 * groups.large_at_least(r) && tel.k_small <= 2 * groups.small_at_least(r);
        }

        if (tel.k_large == 0 || tel.k_small == 0) {
            tel.terminal = true;
            run.rounds.push_back(tel);
            run.answer = tel.k_large == 0 ? answer : detail::set_union(answer, live);
            run.total_samples = ctx.ledger().total() - start_total;
            return run;
        }
        if (r > round_cap) return best_guess(tel.k_large);

        const double eps_r = level_eps(r);
        tel.delta_r = delta / (20.0 * r * r);
        const double min_side = static_cast<double>(std::min(tel.k_large, tel.k_small));
        tel.delta_prime_r = cfg.delta_prime_variant == DeltaPrimeVariant::proof
                                ? tel.delta_r / std::max(1.0, min_side)
                                : delta / min_side;

        // Boundary means of S_r: k_large-th and (k_large+1)-th largest.
        std::vector<double> live_means;
        for (auto a : live) live_means.push_back(inst.mean(a));
        std::sort(live_means.begin(), live_means.end(), std::greater<>());
        const double mu_large = live_means[tel.k_large - 1];
        const double mu_small = live_means[tel.k_large];

        const std::uint64_t round_start = ctx.ledger().total();
        try {
            const auto part = pac_best_k(live, tel.k_large, eps_r / 8.0, tel.delta_r, cfg.sub, ctx);
            tel.samples_pac = part.samples_used;
            tel.pac_ok = pac_contract_holds(ctx, live, tel.k_large, eps_r / 8.0, part);

            const auto est_l = est_mean_large(part.s_small, eps_r / 8.0, tel.delta_r, cfg.sub, ctx);
            const auto est_s = est_mean_small(part.s_large, eps_r / 8.0, tel.delta_r, cfg.sub, ctx);
            tel.theta_large = est_l.value;
            tel.theta_small = est_s.value;
            tel.samples_est_large = est_l.samples_used;
            tel.samples_est_small = est_s.samples_used;
            tel.est_large_ok = est_mean_large_holds(ctx, part.s_small, est_l.value, eps_r / 8.0);
            tel.est_small_ok = est_mean_small_holds(ctx, part.s_large, est_s.value, eps_r / 8.0);

            tel.obs2_ok = tel.theta_large >= mu_small - eps_r / 8.0 && tel.theta_large <= mu_small + eps_r / 4.0 &&
                          tel.theta_small >= mu_large - eps_r / 4.0 && tel.theta_small <= mu_large + eps_r / 8.0;

            const double el_hi = tel.theta_large + eps_r / 4.0;
            const double es_lo = tel.theta_small - eps_r / 4.0;
            const auto kept_large = elim_large(part.s_large, tel.theta_large + eps_r / 8.0, el_hi,
                                               tel.delta_prime_r, cfg.sub, ctx);
            const auto kept_small = elim_small(part.s_small, es_lo, tel.theta_small - eps_r / 8.0,
                                               tel.delta_prime_r, cfg.sub, ctx);
            tel.samples_elim_large = kept_large.samples_used;
            tel.samples_elim_small = kept_small.samples_used;
            tel.elim_large_ok = elim_large_holds(ctx, kept_large.survivors, el_hi);
            tel.elim_small_ok = elim_small_holds(ctx, kept_small.survivors, es_lo);

            const ArmSet promoted = detail::set_minus(part.s_large, kept_large.survivors);
            const ArmSet dropped = detail::set_minus(part.s_small, kept_small.survivors);
            for (auto a : promoted)
                if (inst.mean(a) <= mu_small) tel.misclassified_kept = false;
            for (auto a : dropped)
                if (inst.mean(a) >= mu_large) tel.misclassified_kept = false;
            tel.accepted = promoted.size();
            tel.discarded = dropped.size();

            live = detail::set_union(kept_large.survivors, kept_small.survivors);
            answer = detail::set_union(answer, promoted);
        } catch (const BudgetExhausted&) {
            tel.samples_this_round = ctx.ledger().total() - round_start;
            run.rounds.push_back(tel);
            return best_guess(tel.k_large);
        }
        tel.samples_this_round = ctx.ledger().total() - round_start;
        run.rounds.push_back(tel);
    }
}

/**
 * Uniform-sampling baseline with anytime Hoeffding intervals.
 *
 * All live arms are pulled in lockstep up to geometric checkpoints
 * N_e ~ 1.2^e. At checkpoint e every arm carries a confidence interval of
 * radius sqrt(2 ln(2/delta_e) / N_e) with delta_e = delta / (2 n e^2), so all
 * intervals hold simultaneously with probability >= 1 - delta. An arm is
 * accepted once its lower bound beats the upper bound of enough rivals to
 * guarantee a top slot, and rejected symmetrically.
 */
inline RunResult uniform_baseline(const Instance& inst, double delta, const AlgorithmConfig& cfg,
                                  SamplingContext& ctx) {
    detail::check_delta(delta);
    cfg.validate();
    const std::size_t n = inst.size();
    const auto budget = detail::budget_for(inst, delta, cfg.cap_mult);
    detail::limit_budget(ctx.ledger(), budget);
    const std::uint64_t start_total = ctx.ledger().total();

    RunResult run;
    ArmSet live(n);
    for (std::size_t i = 0; i < n; ++i) live[i] = i;
    ArmSet accepted;
    std::size_t slots = inst.k();
    std::vector<double> sums(n, 0.0);
    std::uint64_t pulled = 0;

    auto finish = [&]() {
        run.answer = slots == 0 ? accepted : detail::set_union(accepted, live);
        run.total_samples = ctx.ledger().total() - start_total;
        return run;
    };

    for (int e = 1;; ++e) {
        if (slots == 0 || slots == live.size()) return finish();

        RoundTelemetry tel;
        tel.r = e;
        tel.k_large = slots;
        tel.k_small = live.size() - slots;
        tel.delta_r = delta / (2.0 * static_cast<double>(n) * e * e);
        const auto target =
            std::max<std::uint64_t>(pulled + 1, static_cast<std::uint64_t>(std::ceil(std::pow(1.2, e))));
        const std::uint64_t round_start = ctx.ledger().total();
        try {
            for (auto a : live) sums[a] += ctx.pull(a, target - pulled) * static_cast<double>(target - pulled);
        } catch (const BudgetExhausted&) {
            tel.samples_this_round = ctx.ledger().total() - round_start;
            run.rounds.push_back(tel);
            run.capped = true;
            std::vector<double> score;
            for (auto a : live) score.push_back(pulled == 0 ? 0.0 : sums[a] / static_cast<double>(pulled));
            run.answer = detail::set_union(accepted, detail::select_top(live, score, slots));
            run.total_samples = ctx.ledger().total() - start_total;
            return run;
        }
        pulled = target;
        tel.samples_this_round = ctx.ledger().total() - round_start;

        const double radius = std::sqrt(2.0 * std::log(2.0 / tel.delta_r) / static_cast<double>(pulled));
        std::vector<double> mean(live.size());
        for (std::size_t i = 0; i < live.size(); ++i) mean[i] = sums[live[i]] / static_cast<double>(pulled);

        // Intervals share one radius, so "LCB_a > UCB_b" is "mean_a - mean_b > 2 radius".
        const std::size_t m = live.size();
        std::vector<double> acc_score, rej_score;
        ArmSet acc, rej;
        for (std::size_t i = 0; i < m; ++i) {
            std::size_t beats = 0, beaten = 0;
            for (std::size_t j = 0; j < m; ++j) {
                if (i == j) continue;
                if (mean[i] - mean[j] > 2.0 * radius) ++beats;
                if (mean[j] - mean[i] > 2.0 * radius) ++beaten;
            }
            if (beats >= m - slots) {
                acc.push_back(live[i]);
                acc_score.push_back(mean[i]);
            } else if (beaten >= slots) {
                rej.push_back(live[i]);
                rej_score.push_back(-mean[i]);
            }
        }
        // Only reachable when some interval is wrong: keep the answer size exact.
        if (acc.size() > slots) acc = detail::select_top(acc, acc_score, slots);
        if (rej.size() > m - slots) rej = detail::select_top(rej, rej_score, m - slots);
        std::sort(acc.begin(), acc.end());
        std::sort(rej.begin(), rej.end());

        tel.accepted = acc.size();
        tel.discarded = rej.size();
        run.rounds.push_back(tel);
        slots -= acc.size();
        accepted = detail::set_union(accepted, acc);
        live = detail::set_minus(detail::set_minus(live, acc), rej);
    }
}

}  // namespace bestk
