#pragma once

#include <cstdint>
#include <utility>
#include <vector>

namespace probesched {

// Per-replication trace. Trajectories are thinned (denser near the start so
// log-time plots stay smooth); tallies marked "post" exclude the burn-in
// prefix.
struct MetricsSeries {
    std::int64_t n_slots = 0;
    std::int64_t burn_in_slots = 0;

    std::vector<std::int64_t> record_slots;
    std::vector<std::vector<double>> throughput_traj;  // [record][user]
    std::vector<double> utility_traj;                  // [record]

    std::vector<std::int64_t> selection_counts;       // full run
    std::vector<std::int64_t> selection_counts_post;  // post burn-in
    std::vector<std::int64_t> probe_histogram;        // post burn-in, index = J
    std::vector<double> final_throughputs;            // T_k(N)
    std::vector<double> total_bits;                   // full-run sum of B_k
    std::vector<double> post_mean_bits;               // mean B_k over post window
    std::vector<double> window_utility;               // per-1000-slot means, post burn-in

    // (J, K*) per slot, only when decision recording is enabled
    std::vector<std::pair<std::size_t, std::size_t>> decisions;
};

}  // namespace probesched
