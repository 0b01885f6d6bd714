#pragma once

#include <cstdint>
#include <variant>
#include <vector>

#include "probesched/random.hpp"

namespace probesched {

// Conditioning region for a draw: below = {X < v}, above = {X >= v}.
enum class Region { below, above };

struct DiscreteAtom {
    double value = 0.0;
    double prob = 0.0;
};

// Unit-mean nonnegative distribution of the normalized rate X. Every user
// shares one model; per-user rates are r_k * X.
class RateModel {
  public:
    static RateModel exponential();
    static RateModel uniform_0_2();
    // atoms must have positive probabilities summing to 1 and mean exactly 1
    static RateModel discrete(std::vector<DiscreteAtom> atoms);

    // P(X <= x), right-continuous
    double cdf(double x) const;
    // P(X < x); differs from cdf only at atoms of a discrete model
    double cdf_left(double x) const;
    // E[(X - v)+] for v >= 0; equals 1 at v = 0 and decreases to 0
    double partial_expectation(double v) const;
    // inverse CDF for u in [0, 1)
    double quantile(double u) const;
    double sample(RandomStream& rng) const;
    // draw of X conditioned on the region; throws if the region has zero mass
    double conditional_sample(Region region, double v, RandomStream& rng) const;

    bool is_discrete() const;
    const std::vector<DiscreteAtom>& atoms() const;

  private:
    struct Exponential {};
    struct Uniform02 {};
    struct Discrete {
        std::vector<DiscreteAtom> atoms;  // sorted by value
    };
    using Impl = std::variant<Exponential, Uniform02, Discrete>;
    explicit RateModel(Impl impl) : impl_(std::move(impl)) {}
    Impl impl_;
};

struct UserPopulation {
    std::vector<double> mean_rates;  // r_k > 0, bits per slot
    RateModel rate_model;

    UserPopulation(std::vector<double> rates, RateModel model);
    std::size_t size() const { return mean_rates.size(); }
};

struct SlotRates {
    std::int64_t slot_index = 0;  // n >= 1
    std::vector<double> rates;    // R_k(n) = r_k * X_k(n)
};

// Channel stream keyed by (seed, replication, slot, user). The draw for a
// given coordinate never depends on how many draws a policy consumed
// elsewhere, so different policies on one seed see identical channels.
class RateStream {
  public:
    explicit RateStream(std::uint64_t seed, std::uint64_t replication = 0)
        : key_(RandomStream::derive_key(seed, 0x52415445u, replication)) {}

    double sample_x(const RateModel& model, std::int64_t slot, std::size_t user) const;
    SlotRates sample_slot_rates(const UserPopulation& pop, std::int64_t slot) const;

  private:
    std::uint64_t key_;
};

}  // namespace probesched
