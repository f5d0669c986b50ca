// arm_model.hpp
#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "bestk/errors.hpp"
#include "bestk/rng.hpp"

namespace bestk {

enum class Distribution { gaussian_unit_var, bernoulli };

inline std::string_view to_string(Distribution d) {
    return d == Distribution::gaussian_unit_var ? "gaussian" : "bernoulli";
}

inline Distribution parse_distribution(std::string_view s) {
    if (s == "gaussian") return Distribution::gaussian_unit_var;
    if (s == "bernoulli") return Distribution::bernoulli;
    throw ValidationError("dist: expected \"gaussian\" or \"bernoulli\", got \"" + std::string(s) + "\"");
}

/// One arm: its reward law and true mean. Means live in [0, 1/2].
struct ArmSpec {
    std::size_t id = 0;
    Distribution dist = Distribution::gaussian_unit_var;
    double mean = 0.0;

    friend bool operator==(const ArmSpec&, const ArmSpec&) = default;
};

inline void validate(const ArmSpec& arm) {
    if (!std::isfinite(arm.mean) || arm.mean < 0.0 || arm.mean > 0.5)
        throw ValidationError("mean: arm " + std::to_string(arm.id) + " has mean outside [0, 0.5]");
}

/**
 * Per-arm pull counts and reward sums for one trial.
 *
 * An optional hard budget turns any pull that would push `total()` past the
 * limit into a BudgetExhausted exception; nothing is recorded in that case.
 */
class SampleLedger {
public:
    SampleLedger() = default;
    explicit SampleLedger(std::size_t arm_count) : pulls_(arm_count, 0), sums_(arm_count, 0.0) {}

    std::size_t arm_count() const noexcept { return pulls_.size(); }
    std::uint64_t total() const noexcept { return total_; }
    std::uint64_t pulls(std::size_t id) const { return pulls_.at(id); }
    double sum(std::size_t id) const { return sums_.at(id); }

    std::optional<double> empirical_mean(std::size_t id) const {
        if (pulls_.at(id) == 0) return std::nullopt;
        return sums_[id] / static_cast<double>(pulls_[id]);
    }

    void set_budget(std::uint64_t limit) noexcept { budget_ = limit; }
    std::uint64_t budget() const noexcept { return budget_; }

    /// Throws BudgetExhausted if `n` more pulls would exceed the budget.
    void reserve(std::uint64_t n) const {
        if (n > budget_ || total_ > budget_ - n) throw BudgetExhausted();
    }

    void record(std::size_t id, std::uint64_t n, double reward_sum) {
        if (id >= pulls_.size()) {
            pulls_.resize(id + 1, 0);
            sums_.resize(id + 1, 0.0);
        }
        pulls_[id] += n;
        sums_[id] += reward_sum;
        total_ += n;
    }

private:
    std::vector<std::uint64_t> pulls_;
    std::vector<double> sums_;
    std::uint64_t total_ = 0;
    std::uint64_t budget_ = std::numeric_limits<std::uint64_t>::max();
};

/// One i.i.d. draw from `arm`; recorded in the ledger.
inline double sample(const ArmSpec& arm, RngStream& rng, SampleLedger& ledger) {
    ledger.reserve(1);
    double x;
    if (arm.dist == Distribution::gaussian_unit_var) {
        x = arm.mean + rng.standard_normal();
    } else {
        x = rng.uniform() < arm.mean ? 1.0 : 0.0;
    }
    ledger.record(arm.id, 1, x);
    return x;
}

/**
 * Empirical mean of `n` fresh draws; the ledger advances by exactly `n`.
 *
 * Gaussian arms draw the sample mean directly from its exact law
 * N(mu, 1/n), so the cost is O(1) regardless of n. Bernoulli arms draw each
 * sample individually.
 */
inline double pull_n(const ArmSpec& arm, std::uint64_t n, RngStream& rng, SampleLedger& ledger) {
    if (n == 0) throw ValidationError("pull_n: n must be at least 1");
    ledger.reserve(n);
    const auto dn = static_cast<double>(n);
    double mean;
    if (arm.dist == Distribution::gaussian_unit_var) {
        mean = arm.mean + rng.standard_normal() / std::sqrt(dn);
    } else {
        std::uint64_t ones = 0;
        for (std::uint64_t i = 0; i < n; ++i) ones += rng.uniform() < arm.mean ? 1 : 0;
        mean = static_cast<double>(ones) / dn;
    }
    ledger.record(arm.id, n, mean * dn);
    return mean;
}

/**
 * Everything one trial needs to pull arms: the arm table, one stream per arm,
 * and the trial's ledger. Arm ids index into `arms`.
 */
class SamplingContext {
public:
    SamplingContext(std::span<const ArmSpec> arms, std::uint64_t master_seed, std::uint64_t trial_index)
        : arms_(arms.begin(), arms.end()), ledger_(arms.size()) {
        streams_.reserve(arms.size());
        for (std::size_t i = 0; i < arms.size(); ++i)
            streams_.emplace_back(master_seed, derive_stream_id(master_seed, trial_index, arms[i].id));
    }

    std::size_t arm_count() const noexcept { return arms_.size(); }
    const ArmSpec& arm(std::size_t id) const { return arms_.at(id); }
    double true_mean(std::size_t id) const { return arms_.at(id).mean; }

    double pull(std::size_t id, std::uint64_t n) { return pull_n(arms_.at(id), n, streams_.at(id), ledger_); }

    SampleLedger& ledger() noexcept { return ledger_; }
    const SampleLedger& ledger() const noexcept { return ledger_; }

private:
    std::vector<ArmSpec> arms_;
    std::vector<RngStream> streams_;
    SampleLedger ledger_;
};

}  // namespace bestk
