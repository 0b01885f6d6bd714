#pragma once

#include <string>
#include <vector>

#include "probesched/sim.hpp"

namespace probesched {

// One JSON document describes an experiment; CLI flags may override seed and
// thread count afterwards.
struct ToolConfig {
    ExperimentConfig experiment;
    MeanRateRule mean_rate_rule = MeanRateRule::index;
    std::vector<PolicySpec> policies;  // >= 1; experiment.policy == policies.front()
    std::size_t mc_samples = 1000000;  // theory evaluations
    unsigned threads = 1;              // 0 = hardware concurrency
    bool has_sweep = false;
    SweepVariable sweep_variable = SweepVariable::users;
    std::vector<double> sweep_values;
};

ToolConfig parse_config(const std::string& json_text);
ToolConfig load_config_file(const std::string& path);

// FNV-1a over the canonical key-sorted serialization, so reordering keys in
// the source document does not change the hash.
std::string config_hash(const std::string& json_text);

std::string policy_name(PolicyKind kind);
PolicyKind policy_from_name(const std::string& name);

}  // namespace probesched
