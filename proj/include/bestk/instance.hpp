// instance.hpp
#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <fstream>
#include <map>
#include <numeric>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "bestk/arm_model.hpp"
#include "bestk/errors.hpp"
#include "bestk/rng.hpp"

namespace bestk {

/// Sorted, duplicate-free list of arm ids.
using ArmSet = std::vector<std::size_t>;

/**
 * A Best-k-Arm instance: an ordered arm list and the answer size k.
 *
 * Arm ids are always the positions 0..n-1; permuting an instance relabels
 * them. Construction enforces 1 <= k <= n, means in [0, 1/2], and a strict
 * gap between the k-th and (k+1)-th largest means when k < n.
 */
class Instance {
public:
    Instance(std::vector<ArmSpec> arms, std::size_t k, std::optional<std::uint64_t> permutation_seed = std::nullopt)
        : arms_(std::move(arms)), k_(k), permutation_seed_(permutation_seed) {
        if (arms_.empty()) throw ValidationError("arms: instance needs at least one arm");
        if (k_ == 0) throw ValidationError("k: must be at least 1");
        if (k_ > arms_.size())
            throw ValidationError("k: " + std::to_string(k_) + " exceeds arm count " + std::to_string(arms_.size()));
        for (std::size_t i = 0; i < arms_.size(); ++i) {
            arms_[i].id = i;
            validate(arms_[i]);
        }
        order_.resize(arms_.size());
        std::iota(order_.begin(), order_.end(), std::size_t{0});
        // Descending by mean, ties by lower id.
        std::stable_sort(order_.begin(), order_.end(),
                         [&](std::size_t a, std::size_t b) { return arms_[a].mean > arms_[b].mean; });
        if (k_ < arms_.size() && !(kth_mean(k_) > kth_mean(k_ + 1)))
            throw ValidationError("means: k-th and (k+1)-th largest means must differ");
    }

    const std::vector<ArmSpec>& arms() const noexcept { return arms_; }
    std::size_t size() const noexcept { return arms_.size(); }
    std::size_t k() const noexcept { return k_; }
    std::optional<std::uint64_t> permutation_seed() const noexcept { return permutation_seed_; }
    double mean(std::size_t id) const { return arms_.at(id).mean; }

    /// Mean of the i-th largest arm, 1-based.
    double kth_mean(std::size_t i) const { return arms_[order_.at(i - 1)].mean; }

    /// Arm ids by descending mean, ties by lower id.
    const std::vector<std::size_t>& rank_order() const noexcept { return order_; }

    friend bool operator==(const Instance& a, const Instance& b) {
        return a.arms_ == b.arms_ && a.k_ == b.k_ && a.permutation_seed_ == b.permutation_seed_;
    }

private:
    std::vector<ArmSpec> arms_;
    std::size_t k_;
    std::optional<std::uint64_t> permutation_seed_;
    std::vector<std::size_t> order_;
};

/// Delta_a: mu_a - mu_[k+1] for arms at or above mu_[k], else mu_[k] - mu_a.
inline double gap(const Instance& inst, std::size_t arm_id) {
    if (arm_id >= inst.size()) throw std::out_of_range("gap: arm id " + std::to_string(arm_id));
    if (inst.k() == inst.size()) throw ValidationError("gap: undefined when k equals the number of arms");
    const double mk = inst.kth_mean(inst.k());
    const double mk1 = inst.kth_mean(inst.k() + 1);
    const double mu = inst.mean(arm_id);
    return mu >= mk ? mu - mk1 : mk - mu;
}

/// Delta_[k] = mu_[k] - mu_[k+1].
inline double boundary_gap(const Instance& inst) {
    if (inst.k() == inst.size()) throw ValidationError("gap: undefined when k equals the number of arms");
    return inst.kth_mean(inst.k()) - inst.kth_mean(inst.k() + 1);
}

/// eps_r = 2^-r.
inline double level_eps(int r) { return std::ldexp(1.0, -r); }

/**
 * The level r >= 1 with gap in (2^-(r+1), 2^-r].
 *
 * Exact for dyadic gaps. A gap within relative 1e-12 of a power of two is
 * snapped onto it first so that float noise at an interval edge lands on the
 * closed (upper) end.
 */
inline int gap_level(double g) {
    if (!(g > 0.0) || !std::isfinite(g)) throw ValidationError("gap: must be positive and finite");
    int e = 0;
    const double m = std::frexp(g, &e);  // g = m * 2^e, m in [0.5, 1)
    // Candidate powers of two bracketing g: 2^(e-1) <= g < 2^e.
    const double lower = std::ldexp(1.0, e - 1);
    const double upper = std::ldexp(1.0, e);
    constexpr double kRelTol = 1e-12;
    if (m == 0.5 || std::fabs(g - lower) <= kRelTol * lower) return 1 - e;  // g == 2^(e-1)
    if (std::fabs(upper - g) <= kRelTol * upper) return -e;                // g == 2^e
    const int r = -e;  // g in (2^(e-1), 2^e) = (eps_{r+1}, eps_r)
    return std::max(r, 1);
}

/**
 * Arm groups G^large_r / G^small_r: arms inside (resp. outside) the top k
 * whose gap lies in (eps_{r+1}, eps_r].
 */
struct ArmGroupDecomposition {
    std::size_t n = 0;
    std::size_t k = 0;
    std::map<int, std::vector<std::size_t>> groups_large;
    std::map<int, std::vector<std::size_t>> groups_small;
    std::vector<double> gaps;
    std::vector<int> levels;
    std::vector<bool> in_top;
    int max_level = 0;

    std::size_t large_count(int r) const { return count_at(groups_large, r); }
    std::size_t small_count(int r) const { return count_at(groups_small, r); }
    /// |G^large_{>=r}|
    std::size_t large_at_least(int r) const { return count_from(groups_large, r); }
    /// |G^small_{>=r}|
    std::size_t small_at_least(int r) const { return count_from(groups_small, r); }

private:
    static std::size_t count_at(const std::map<int, std::vector<std::size_t>>& g, int r) {
        const auto it = g.find(r);
        return it == g.end() ? 0 : it->second.size();
    }
    static std::size_t count_from(const std::map<int, std::vector<std::size_t>>& g, int r) {
        std::size_t c = 0;
        for (auto it = g.lower_bound(r); it != g.end(); ++it) c += it->second.size();
        return c;
    }
};

inline ArmGroupDecomposition decompose_groups(const Instance& inst) {
    if (inst.k() == inst.size()) throw ValidationError("decompose_groups: requires k < number of arms");
    ArmGroupDecomposition d;
    d.n = inst.size();
    d.k = inst.k();
    d.gaps.resize(d.n);
    d.levels.resize(d.n);
    d.in_top.resize(d.n);
    const double mk = inst.kth_mean(inst.k());
    for (std::size_t a = 0; a < d.n; ++a) {
        d.gaps[a] = gap(inst, a);
        d.levels[a] = gap_level(d.gaps[a]);
        d.in_top[a] = inst.mean(a) >= mk;
        auto& target = d.in_top[a] ? d.groups_large : d.groups_small;
        target[d.levels[a]].push_back(a);
        d.max_level = std::max(d.max_level, d.levels[a]);
    }
    return d;
}

/// Source position of each new position under the seeded Fisher-Yates shuffle.
inline std::vector<std::size_t> permutation_order(std::size_t n, std::uint64_t seed) {
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    RngStream rng(seed, 0x7065726D75746174ULL);
    for (std::size_t i = n; i > 1; --i) {
        const auto j = static_cast<std::size_t>(rng.below(i));
        std::swap(order[i - 1], order[j]);
    }
    return order;
}

/// Uniformly random reordering; the new arm at position j is old arm order[j].
inline Instance permute(const Instance& inst, std::uint64_t seed) {
    const auto order = permutation_order(inst.size(), seed);
    std::vector<ArmSpec> arms;
    arms.reserve(inst.size());
    for (auto src : order) arms.push_back(inst.arms()[src]);
    return Instance(std::move(arms), inst.k(), seed);
}

/// The k ids with largest means; interior ties broken by lower id.
inline ArmSet top_k_set(const Instance& inst) {
    ArmSet out(inst.rank_order().begin(), inst.rank_order().begin() + static_cast<std::ptrdiff_t>(inst.k()));
    std::sort(out.begin(), out.end());
    return out;
}

// ---------------------------------------------------------------------------
// JSON instance file:
//   { "k": int, "arms": [ { "dist": "gaussian"|"bernoulli", "mean": float } ... ],
//     "permutation_seed": int|null }

inline nlohmann::json to_json(const Instance& inst) {
    nlohmann::json arms = nlohmann::json::array();
    for (const auto& a : inst.arms()) arms.push_back({{"dist", std::string(to_string(a.dist))}, {"mean", a.mean}});
    nlohmann::json j;
    j["k"] = inst.k();
    j["arms"] = std::move(arms);
    if (inst.permutation_seed())
        j["permutation_seed"] = *inst.permutation_seed();
    else
        j["permutation_seed"] = nullptr;
    return j;
}

inline Instance instance_from_json(const nlohmann::json& j) {
    if (!j.is_object()) throw ValidationError("instance: expected a JSON object");
    if (!j.contains("k") || !j["k"].is_number_integer()) throw ValidationError("k: missing or not an integer");
    if (!j.contains("arms") || !j["arms"].is_array()) throw ValidationError("arms: missing or not an array");
    const auto k = j["k"].get<long long>();
    if (k < 1) throw ValidationError("k: must be at least 1");
    std::vector<ArmSpec> arms;
    for (const auto& a : j["arms"]) {
        if (!a.is_object() || !a.contains("mean") || !a["mean"].is_number())
            throw ValidationError("arms[" + std::to_string(arms.size()) + "].mean: missing or not a number");
        ArmSpec spec;
        spec.id = arms.size();
        spec.mean = a["mean"].get<double>();
        spec.dist = a.contains("dist") ? parse_distribution(a["dist"].get<std::string>())
                                       : Distribution::gaussian_unit_var;
        arms.push_back(spec);
    }
    std::optional<std::uint64_t> seed;
    if (j.contains("permutation_seed") && !j["permutation_seed"].is_null()) {
        if (!j["permutation_seed"].is_number_integer())
            throw ValidationError("permutation_seed: expected integer or null");
        seed = j["permutation_seed"].get<std::uint64_t>();
    }
    return Instance(std::move(arms), static_cast<std::size_t>(k), seed);
}

inline Instance load_instance(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open instance file: " + path);
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::parse_error& e) {
        throw ValidationError("instance file " + path + ": " + e.what());
    }
    return instance_from_json(j);
}

inline void save_instance(const Instance& inst, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write instance file: " + path);
    out << to_json(inst).dump(2) << '\n';
    if (!out) throw IoError("write failed: " + path);
}

}  // namespace bestk
