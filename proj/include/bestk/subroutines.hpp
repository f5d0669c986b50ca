// subroutines.hpp
//
// Sampling building blocks consumed by bilateral elimination: a PAC top-k
// partition, largest/smallest-mean estimators, and threshold elimination.
// Each has a closed-form sample budget; contract checkers evaluate the
// guarantees against true means for simulator telemetry.
#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <span>
#include <vector>

#include "bestk/arm_model.hpp"
#include "bestk/errors.hpp"
#include "bestk/instance.hpp"

namespace bestk {

struct SubroutineConfig {
    /// 8 = 2 * 2^2: every estimate is (eps/2)-accurate at the Gaussian tail constant.
    double pac_budget_const = 8.0;
    double em_budget_const = 2.0;
    double elim_round_const = 8.0;
    double elim_stop_fraction = 1.0 / 20.0;

    void validate() const {
        if (!(pac_budget_const > 0.0)) throw ValidationError("pac_budget_const: must be > 0");
        if (!(em_budget_const > 0.0)) throw ValidationError("em_budget_const: must be > 0");
        if (!(elim_round_const > 0.0)) throw ValidationError("elim_round_const: must be > 0");
        if (!(elim_stop_fraction > 0.0 && elim_stop_fraction < 0.1))
            throw ValidationError("elim_stop_fraction: must lie in (0, 0.1)");
    }
};

struct PartitionResult {
    ArmSet s_large;
    ArmSet s_small;
    std::uint64_t samples_used = 0;
};

struct EstimateResult {
    double value = 0.0;
    std::size_t arm = 0;  ///< arm whose empirical mean is reported
    std::uint64_t samples_used = 0;
};

struct ElimResult {
    ArmSet survivors;
    std::uint64_t samples_used = 0;
    std::size_t rounds = 0;
};

namespace detail {

inline std::uint64_t ceil_count(double x) {
    if (!(x >= 0.0)) throw ValidationError("sample budget: not a finite nonnegative value");
    if (x >= 1.8e19) throw BudgetExhausted();
    return static_cast<std::uint64_t>(std::ceil(x));
}

inline void check_eps_delta(double eps, double delta) {
    if (!(eps > 0.0 && eps <= 0.5)) throw ValidationError("eps: must lie in (0, 1/2]");
    if (!(delta > 0.0 && delta < 1.0)) throw ValidationError("delta: must lie in (0, 1)");
}

/// `count` ids from `ids` with the largest `score`, ties by lower id; sorted on return.
inline ArmSet select_top(std::span<const std::size_t> ids, std::span<const double> score, std::size_t count) {
    std::vector<std::size_t> idx(ids.size());
    for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
    std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
        if (score[a] != score[b]) return score[a] > score[b];
        return ids[a] < ids[b];
    });
    ArmSet out;
    out.reserve(count);
    for (std::size_t i = 0; i < count; ++i) out.push_back(ids[idx[i]]);
    std::sort(out.begin(), out.end());
    return out;
}

inline ArmSet set_minus(const ArmSet& a, const ArmSet& b) {
    ArmSet out;
    std::set_difference(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
    return out;
}

inline ArmSet normalized(std::span<const std::size_t> s) {
    ArmSet out(s.begin(), s.end());
    std::sort(out.begin(), out.end());
    if (std::adjacent_find(out.begin(), out.end()) != out.end()) throw ValidationError("arm set: duplicate ids");
    return out;
}

}  // namespace detail

/// ceil(c * eps^-2 * (ln(2/delta) + ln min(k, |S|-k) + 1)); zero when k = |S|.
inline std::uint64_t pac_pulls_per_arm(std::size_t set_size, std::size_t k, double eps, double delta,
                                       const SubroutineConfig& cfg) {
    if (k == set_size) return 0;
    const auto m = static_cast<double>(std::min(k, set_size - k));
    return detail::ceil_count(cfg.pac_budget_const / (eps * eps) * (std::log(2.0 / delta) + std::log(m) + 1.0));
}

/// ceil(c * (eps/2)^-2 * ln(4/delta)), the final sampling stage of the mean estimators.
inline std::uint64_t est_mean_pulls(double eps, double delta, const SubroutineConfig& cfg) {
    const double half = eps / 2.0;
    return detail::ceil_count(cfg.em_budget_const / (half * half) * std::log(4.0 / delta));
}

/// Per-arm pulls in elimination round t: ceil(c * (hi-lo)^-2 * ln(2/delta_t)), delta_t = delta/(4t^2).
inline std::uint64_t elim_pulls_per_arm(std::size_t t, double lo, double hi, double delta,
                                        const SubroutineConfig& cfg) {
    const double width = hi - lo;
    const double delta_t = delta / (4.0 * static_cast<double>(t) * static_cast<double>(t));
    return detail::ceil_count(cfg.elim_round_const / (width * width) * std::log(2.0 / delta_t));
}

/**
 * PAC partition of S into the (approximately) best k arms and the rest.
 *
 * Every arm is pulled pac_pulls_per_arm() times. When k <= |S|/2 the empirical
 * top k form S^large; otherwise the empirical bottom |S|-k are selected on
 * negated estimates and form S^small.
 */
inline PartitionResult pac_best_k(std::span<const std::size_t> arms, std::size_t k, double eps, double delta,
                                  const SubroutineConfig& cfg, SamplingContext& ctx) {
    const ArmSet s = detail::normalized(arms);
    if (k < 1 || k > s.size()) throw ValidationError("k: must lie in [1, |S|]");
    detail::check_eps_delta(eps, delta);

    PartitionResult out;
    if (k == s.size()) {
        out.s_large = s;
        return out;
    }
    const std::uint64_t n = pac_pulls_per_arm(s.size(), k, eps, delta, cfg);
    std::vector<double> est(s.size());
    for (std::size_t i = 0; i < s.size(); ++i) est[i] = ctx.pull(s[i], n);
    out.samples_used = n * s.size();

    if (2 * k <= s.size()) {
        out.s_large = detail::select_top(s, est, k);
        out.s_small = detail::set_minus(s, out.s_large);
    } else {
        for (double& e : est) e = -e;
        out.s_small = detail::select_top(s, est, s.size() - k);
        out.s_large = detail::set_minus(s, out.s_small);
    }
    return out;
}

/// Estimate of max_{A in S} mu_A: PAC-select one arm at (eps/2, delta/2), then sample it.
inline EstimateResult est_mean_large(std::span<const std::size_t> arms, double eps, double delta,
                                     const SubroutineConfig& cfg, SamplingContext& ctx) {
    if (arms.empty()) throw ValidationError("est_mean_large: empty arm set");
    detail::check_eps_delta(eps, delta);
    const auto part = pac_best_k(arms, 1, eps / 2.0, delta / 2.0, cfg, ctx);
    EstimateResult out;
    out.arm = part.s_large.front();
    const auto m = est_mean_pulls(eps, delta, cfg);
    out.value = ctx.pull(out.arm, m);
    out.samples_used = part.samples_used + m;
    return out;
}

/// Estimate of min_{A in S} mu_A; mirror of est_mean_large.
inline EstimateResult est_mean_small(std::span<const std::size_t> arms, double eps, double delta,
                                     const SubroutineConfig& cfg, SamplingContext& ctx) {
    if (arms.empty()) throw ValidationError("est_mean_small: empty arm set");
    detail::check_eps_delta(eps, delta);
    EstimateResult out;
    std::uint64_t pac_samples = 0;
    if (arms.size() == 1) {
        out.arm = arms.front();
    } else {
        const auto part = pac_best_k(arms, arms.size() - 1, eps / 2.0, delta / 2.0, cfg, ctx);
        out.arm = part.s_small.front();
        pac_samples = part.samples_used;
    }
    const auto m = est_mean_pulls(eps, delta, cfg);
    out.value = ctx.pull(out.arm, m);
    out.samples_used = pac_samples + m;
    return out;
}

namespace detail {

// Elimination on rewards multiplied by `sign`: each round pulls every survivor
// afresh and drops those whose signed estimate reaches the midpoint of
// [lo, hi]. Stops once a round removes fewer than the configured fraction.
inline ElimResult elim_core(std::span<const std::size_t> arms, double lo, double hi, double delta, double sign,
                            const SubroutineConfig& cfg, SamplingContext& ctx) {
    if (!(lo < hi)) throw ValidationError("elim: theta_small must be below theta_large");
    if (!(delta > 0.0 && delta < 1.0)) throw ValidationError("delta: must lie in (0, 1)");
    ElimResult out;
    out.survivors = normalized(arms);
    const double mid = (lo + hi) / 2.0;
    for (std::size_t t = 1; !out.survivors.empty(); ++t) {
        const auto m = elim_pulls_per_arm(t, lo, hi, delta, cfg);
        ArmSet kept;
        for (auto a : out.survivors) {
            if (sign * ctx.pull(a, m) < mid) kept.push_back(a);
        }
        out.samples_used += m * out.survivors.size();
        out.rounds = t;
        const auto removed = out.survivors.size() - kept.size();
        const bool stop = static_cast<double>(removed) <
                          cfg.elim_stop_fraction * static_cast<double>(out.survivors.size());
        out.survivors = std::move(kept);
        if (stop) break;
    }
    return out;
}

}  // namespace detail

/// Removes arms above theta_large while keeping a fixed arm below theta_small.
inline ElimResult elim_large(std::span<const std::size_t> arms, double theta_small, double theta_large, double delta,
                             const SubroutineConfig& cfg, SamplingContext& ctx) {
    return detail::elim_core(arms, theta_small, theta_large, delta, +1.0, cfg, ctx);
}

/// Removes arms below theta_small while keeping a fixed arm above theta_large.
inline ElimResult elim_small(std::span<const std::size_t> arms, double theta_small, double theta_large, double delta,
                             const SubroutineConfig& cfg, SamplingContext& ctx) {
    if (!(theta_small < theta_large)) throw ValidationError("elim: theta_small must be below theta_large");
    return detail::elim_core(arms, -theta_large, -theta_small, delta, -1.0, cfg, ctx);
}

// ---------------------------------------------------------------------------
// Contract checks against true means (simulator mode).

namespace detail {
inline std::vector<double> sorted_means_desc(const SamplingContext& ctx, std::span<const std::size_t> s) {
    std::vector<double> m;
    m.reserve(s.size());
    for (auto a : s) m.push_back(ctx.true_mean(a));
    std::sort(m.begin(), m.end(), std::greater<>());
    return m;
}
}  // namespace detail

/// Accepted arms have mu >= mu_[k] - eps and rejected arms mu <= mu_[k+1] + eps (ranks within S).
inline bool pac_contract_holds(const SamplingContext& ctx, std::span<const std::size_t> s, std::size_t k, double eps,
                               const PartitionResult& res) {
    if (k >= s.size()) return true;
    const auto m = detail::sorted_means_desc(ctx, s);
    const double mk = m[k - 1];
    const double mk1 = m[k];
    for (auto a : res.s_large)
        if (ctx.true_mean(a) < mk - eps) return false;
    for (auto a : res.s_small)
        if (ctx.true_mean(a) > mk1 + eps) return false;
    return true;
}

inline bool est_mean_large_holds(const SamplingContext& ctx, std::span<const std::size_t> s, double value,
                                 double eps) {
    return std::fabs(value - detail::sorted_means_desc(ctx, s).front()) <= eps;
}

inline bool est_mean_small_holds(const SamplingContext& ctx, std::span<const std::size_t> s, double value,
                                 double eps) {
    return std::fabs(value - detail::sorted_means_desc(ctx, s).back()) <= eps;
}

/// |{A in T : mu_A >= theta_large}| <= |T| / 10.
inline bool elim_large_holds(const SamplingContext& ctx, std::span<const std::size_t> survivors,
                             double theta_large) {
    std::size_t above = 0;
    for (auto a : survivors) above += ctx.true_mean(a) >= theta_large ? 1 : 0;
    return 10 * above <= survivors.size();
}

/// |{A in T : mu_A <= theta_small}| <= |T| / 10.
inline bool elim_small_holds(const SamplingContext& ctx, std::span<const std::size_t> survivors,
                             double theta_small) {
    std::size_t below = 0;
    for (auto a : survivors) below += ctx.true_mean(a) <= theta_small ? 1 : 0;
    return 10 * below <= survivors.size();
}

}  // namespace bestk
