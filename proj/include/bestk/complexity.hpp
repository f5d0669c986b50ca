// complexity.hpp
#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

#include <json.hpp>

#include "bestk/instance.hpp"

namespace bestk {

namespace detail {

/// ln of a group size; empty and singleton groups contribute 0.
inline double ln_size(std::size_t s) { return s <= 1 ? 0.0 : std::log(static_cast<double>(s)); }

/// eps_r^-2 = 4^r.
inline double inv_eps_sq(int r) { return std::ldexp(1.0, 2 * r); }

/// max(1, ln ln x), the clamped doubly-logarithmic factor.
inline double lnln_clamped(double x) {
    if (!(x > 1.0)) return 1.0;
    const double l = std::log(x);
    if (!(l > 1.0)) return 1.0;
    return std::max(1.0, std::log(l));
}

}  // namespace detail

namespace detail {
// Sums run over gaps in sorted order so results do not depend on arm order.
inline std::vector<double> sorted_gaps(const ArmGroupDecomposition& d) {
    std::vector<double> g = d.gaps;
    std::sort(g.begin(), g.end());
    return g;
}
}  // namespace detail

/// H = sum over arms of gap^-2.
inline double h_term(const ArmGroupDecomposition& d) {
    double s = 0.0;
    for (double g : detail::sorted_gaps(d)) s += 1.0 / (g * g);
    return s;
}

/// H~ = sum over arms of gap^-2 * max(1, ln ln gap^-1).
inline double h_tilde(const ArmGroupDecomposition& d) {
    double s = 0.0;
    for (double g : detail::sorted_gaps(d)) s += detail::lnln_clamped(1.0 / g) / (g * g);
    return s;
}

namespace detail {

// Shared core of the "large" and "small" terms: `own` is the side being
// summed over, `other` the side whose group sizes enter the logarithm.
enum class Side { large, small };

inline std::size_t at_level(const ArmGroupDecomposition& d, Side s, int r) {
    return s == Side::large ? d.large_count(r) : d.small_count(r);
}
inline std::size_t at_least(const ArmGroupDecomposition& d, Side s, int r) {
    return s == Side::large ? d.large_at_least(r) : d.small_at_least(r);
}
inline Side opposite(Side s) { return s == Side::large ? Side::small : Side::large; }

inline double lower_bound_term(const ArmGroupDecomposition& d, Side own) {
    double total = 0.0;
    double running_max = 0.0;
    for (int i = 1; i <= d.max_level; ++i) {
        running_max = std::max(running_max, inv_eps_sq(i) * ln_size(at_least(d, opposite(own), i)));
        total += static_cast<double>(at_level(d, own, i)) * running_max;
    }
    return total;
}

inline double tilde_double_sum(const ArmGroupDecomposition& d, Side own, bool cumulative) {
    double total = 0.0;
    for (int i = 1; i <= d.max_level; ++i) {
        const auto gi = at_level(d, own, i);
        if (gi == 0) continue;
        double inner = 0.0;
        for (int j = 1; j <= i; ++j) {
            const auto other = cumulative ? at_least(d, opposite(own), j) : at_level(d, opposite(own), j);
            inner += inv_eps_sq(j) * ln_size(other);
        }
        total += static_cast<double>(gi) * inner;
    }
    return total;
}

inline double tilde_single_sum(const ArmGroupDecomposition& d, Side own) {
    double total = 0.0;
    for (int i = 1; i <= d.max_level; ++i)
        total += inv_eps_sq(i) * static_cast<double>(at_least(d, own, i)) * ln_size(at_least(d, opposite(own), i));
    return total;
}

}  // namespace detail

/// H^large = sum_i |G^large_i| * max_{j<=i} eps_j^-2 ln|G^small_{>=j}|.
inline double h_large_lb(const ArmGroupDecomposition& d) {
    return detail::lower_bound_term(d, detail::Side::large);
}
inline double h_small_lb(const ArmGroupDecomposition& d) {
    return detail::lower_bound_term(d, detail::Side::small);
}

/// H~^large, cumulative variant: sum_i |G^large_i| sum_{j<=i} eps_j^-2 ln|G^small_{>=j}|.
inline double h_tilde_large(const ArmGroupDecomposition& d) {
    return detail::tilde_double_sum(d, detail::Side::large, true);
}
inline double h_tilde_small(const ArmGroupDecomposition& d) {
    return detail::tilde_double_sum(d, detail::Side::small, true);
}

/// H~^large, per-level variant: inner logarithm uses ln|G^small_j|.
inline double h_tilde_large_per_level(const ArmGroupDecomposition& d) {
    return detail::tilde_double_sum(d, detail::Side::large, false);
}
inline double h_tilde_small_per_level(const ArmGroupDecomposition& d) {
    return detail::tilde_double_sum(d, detail::Side::small, false);
}

/// Single-sum form after interchanging summation order:
/// sum_i eps_i^-2 |G^large_{>=i}| ln|G^small_{>=i}|. Equals h_tilde_large.
inline double h_tilde_large_single_sum(const ArmGroupDecomposition& d) {
    return detail::tilde_single_sum(d, detail::Side::large);
}
inline double h_tilde_small_single_sum(const ArmGroupDecomposition& d) {
    return detail::tilde_single_sum(d, detail::Side::small);
}

/// KL divergence between N(mu1, 1) and N(mu2, 1).
inline double kl_gauss_unit(double mu1, double mu2) {
    const double diff = mu1 - mu2;
    return diff * diff / 2.0;
}

/**
 * Binary relative entropy d(x, y) = x ln(x/y) + (1-x) ln((1-x)/(1-y)).
 *
 * Endpoints follow by continuity: d(0, y) = ln(1/(1-y)), d(1, y) = ln(1/y).
 * d(x, 0) and d(x, 1) for x strictly inside (0, 1) return +infinity.
 */
inline double bin_rel_entropy(double x, double y) {
    if (!(x >= 0.0 && x <= 1.0) || !(y >= 0.0 && y <= 1.0))
        throw std::domain_error("bin_rel_entropy: arguments must lie in [0, 1]");
    constexpr double kInf = std::numeric_limits<double>::infinity();
    if (x == 0.0) return y == 1.0 ? kInf : -std::log1p(-y);
    if (x == 1.0) return y == 0.0 ? kInf : -std::log(y);
    if (y == 0.0 || y == 1.0) return kInf;
    return x * std::log(x / y) + (1.0 - x) * std::log((1.0 - x) / (1.0 - y));
}

struct LevelBreakdown {
    int level = 0;
    double eps = 0.0;
    std::size_t large = 0;
    std::size_t small = 0;
    std::size_t large_at_least = 0;
    std::size_t small_at_least = 0;
    double h_contribution = 0.0;        ///< sum of gap^-2 over arms at this level
    double h_tilde_large_term = 0.0;    ///< eps_r^-2 |G^large_{>=r}| ln|G^small_{>=r}|
    double h_tilde_small_term = 0.0;
};

struct ComplexityReport {
    std::size_t n = 0;
    std::size_t k = 0;
    double gap_k = 0.0;
    double H = 0.0;
    double H_tilde = 0.0;
    double H_large_lb = 0.0;
    double H_small_lb = 0.0;
    double H_tilde_large = 0.0;  ///< cumulative variant (headline)
    double H_tilde_small = 0.0;
    double H_tilde_large_per_level = 0.0;
    double H_tilde_small_per_level = 0.0;
    double H_ln_k = 0.0;
    /// (H~L + H~S) / ((HL + HS) max(1, ln ln n)); 0 when the numerator is 0.
    double ratio_lnln_n = 0.0;
    /// (H~L + H~S) / (H max(1, ln k)).
    double ratio_ln_k = 0.0;
    std::vector<LevelBreakdown> per_level_breakdown;
};

inline ComplexityReport analyze(const ArmGroupDecomposition& d) {
    ComplexityReport rep;
    rep.n = d.n;
    rep.k = d.k;
    rep.gap_k = *std::min_element(d.gaps.begin(), d.gaps.end());
    rep.H = h_term(d);
    rep.H_tilde = h_tilde(d);
    rep.H_large_lb = h_large_lb(d);
    rep.H_small_lb = h_small_lb(d);
    rep.H_tilde_large = h_tilde_large(d);
    rep.H_tilde_small = h_tilde_small(d);
    rep.H_tilde_large_per_level = h_tilde_large_per_level(d);
    rep.H_tilde_small_per_level = h_tilde_small_per_level(d);
    rep.H_ln_k = rep.H * std::log(static_cast<double>(d.k));

    const double tilde_sum = rep.H_tilde_large + rep.H_tilde_small;
    const double lb_sum = rep.H_large_lb + rep.H_small_lb;
    const double lnln_n = detail::lnln_clamped(static_cast<double>(d.n));
    const double ln_k = std::max(1.0, std::log(static_cast<double>(d.k)));
    rep.ratio_lnln_n = tilde_sum == 0.0 ? 0.0 : tilde_sum / (lb_sum * lnln_n);
    rep.ratio_ln_k = tilde_sum == 0.0 ? 0.0 : tilde_sum / (rep.H * ln_k);

    for (int r = 1; r <= d.max_level; ++r) {
        LevelBreakdown row;
        row.level = r;
        row.eps = level_eps(r);
        row.large = d.large_count(r);
        row.small = d.small_count(r);
        row.large_at_least = d.large_at_least(r);
        row.small_at_least = d.small_at_least(r);
        for (double g : detail::sorted_gaps(d))
            if (gap_level(g) == r) row.h_contribution += 1.0 / (g * g);
        row.h_tilde_large_term = detail::inv_eps_sq(r) * static_cast<double>(row.large_at_least) *
                                 detail::ln_size(row.small_at_least);
        row.h_tilde_small_term = detail::inv_eps_sq(r) * static_cast<double>(row.small_at_least) *
                                 detail::ln_size(row.large_at_least);
        rep.per_level_breakdown.push_back(row);
    }
    return rep;
}

inline ComplexityReport analyze(const Instance& inst) { return analyze(decompose_groups(inst)); }

/// H ln(1/delta) + H~ + H~^large + H~^small: the upper-bound complexity unit.
inline double upper_bound_complexity(const ComplexityReport& rep, double delta) {
    return rep.H * std::log(1.0 / delta) + rep.H_tilde + rep.H_tilde_large + rep.H_tilde_small;
}

inline nlohmann::json to_json(const ComplexityReport& rep) {
    nlohmann::json levels = nlohmann::json::array();
    for (const auto& row : rep.per_level_breakdown) {
        levels.push_back({{"level", row.level},
                          {"eps", row.eps},
                          {"large", row.large},
                          {"small", row.small},
                          {"large_at_least", row.large_at_least},
                          {"small_at_least", row.small_at_least},
                          {"h_contribution", row.h_contribution},
                          {"h_tilde_large_term", row.h_tilde_large_term},
                          {"h_tilde_small_term", row.h_tilde_small_term}});
    }
    return {{"n", rep.n},
            {"k", rep.k},
            {"gap_k", rep.gap_k},
            {"H", rep.H},
            {"H_tilde", rep.H_tilde},
            {"H_large_lb", rep.H_large_lb},
            {"H_small_lb", rep.H_small_lb},
            {"H_tilde_large", rep.H_tilde_large},
            {"H_tilde_small", rep.H_tilde_small},
            {"H_tilde_large_cumulative", rep.H_tilde_large},
            {"H_tilde_small_cumulative", rep.H_tilde_small},
            {"H_tilde_large_per_level", rep.H_tilde_large_per_level},
            {"H_tilde_small_per_level", rep.H_tilde_small_per_level},
            {"H_ln_k", rep.H_ln_k},
            {"ratio_tilde_over_lb_lnln_n", rep.ratio_lnln_n},
            {"ratio_tilde_over_H_ln_k", rep.ratio_ln_k},
            {"lnln_clamp", "max(1, ln ln x)"},
            {"per_level_breakdown", std::move(levels)}};
}

}  // namespace bestk
