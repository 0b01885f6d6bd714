#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "probesched/rate_model.hpp"
#include "probesched/stopping.hpp"

namespace probesched {

enum class PolicyKind {
    jps_dynamic,   // probe loop with the one-stage look-ahead rule
    jps_static,    // probe loop with the static threshold criterion
    jlps,          // learning variant driven by per-user sample archives
    round_robin,   // no probing, cyclic selection, full slot
    genie_pf,      // free full CQI, PF selection, full slot
    probe_all_pf,  // probes everyone, pays K*beta, PF selection
};

struct PolicyState {
    PolicyKind kind = PolicyKind::jps_dynamic;
    std::vector<double> throughputs;            // T_k(n-1), all > 0
    std::optional<ThresholdTable> table;        // jps_static only
    std::vector<std::vector<double>> archives;  // jlps only: probed raw rates per user
    std::size_t rr_cursor = 0;                  // round_robin only
};

struct SlotDecision {
    std::vector<std::size_t> probe_order;  // prefix actually probed
    std::vector<double> probed_rates;      // raw rates revealed, same length
    std::size_t stop_index = 0;            // J; 0 for non-probing baselines
    std::size_t selected = 0;              // K*
    double delivered_bits = 0.0;           // (1 - J*beta)+ * R_{K*}
};

// Fresh state with T_k = 1. jps_static additionally needs a table attached;
// jlps states come from jlps_initialize.
PolicyState make_policy_state(PolicyKind kind, std::size_t user_count);

// Full probing permutation under the policy's index, ties by ascending user
// index. jps/genie/probe_all sort by r_k/T_k, jlps by the archive average of
// R^{(m)}/T_k, round_robin rotates from its cursor.
std::vector<std::size_t> probe_order(const PolicyState& state, const UserPopulation& pop);

// One slot of the policy: probe (if the policy probes), stop, pick the best
// probed user, deliver. Mutates jlps archives and the round-robin cursor.
SlotDecision run_slot(PolicyState& state, const SlotRates& slot, const UserPopulation& pop,
                      double beta);

// T_k(n) = ((n-1)/n) T_k(n-1) + B_k(n)/n for every user, then a floor of
// 1e-9 * r_k keeps later normalizations finite.
void update_throughput(PolicyState& state, const SlotDecision& decision, std::int64_t n,
                       const UserPopulation& pop);

struct JlpsInit {
    PolicyState state;                   // archives filled, T reset to 1
    std::vector<SlotDecision> decisions; // one per initialization slot
};

// Probes every user once across the leading slots (up to J_max probes per
// slot), transmitting the remaining fraction to the best user probed in each
// slot; afterwards every archive holds one sample and T restarts at 1.
JlpsInit jlps_initialize(const UserPopulation& pop, double beta, const RateStream& stream);

inline std::size_t jlps_init_slots(std::size_t user_count, double beta) {
    const std::size_t jmax = max_probes(user_count, beta);
    return (user_count + jmax - 1) / jmax;
}

}  // namespace probesched
