#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "probesched/analysis.hpp"
#include "probesched/metrics.hpp"
#include "probesched/policies.hpp"

namespace probesched {

// How jps_static obtains its kappa: bootstrap runs the dynamic rule for a
// burn-in and measures mean T_k/r_k, theorem4 evaluates the closed-form gain,
// fixed takes the configured value.
enum class KappaMode { bootstrap, theorem4, fixed };

struct PolicySpec {
    PolicyKind kind = PolicyKind::jps_dynamic;
    KappaMode kappa_mode = KappaMode::bootstrap;
    double kappa = 1.0;                  // fixed mode
    std::int64_t burn_in_slots = 2000;   // bootstrap mode
    std::size_t mc_samples = 400000;     // theorem4 mode
    std::optional<ThresholdTable> table; // resolved table, filled on demand
};

struct ExperimentConfig {
    UserPopulation pop;
    double beta = 0.1;
    PolicySpec policy;
    std::int64_t n_slots = 10000;
    std::size_t n_replications = 1;
    std::uint64_t seed = 1;
    double burn_in_fraction = 0.1;
    std::int64_t record_interval = 0;  // extra linear thinning; 0 = decade rule only
    bool record_decisions = false;

    void validate() const;
    std::int64_t burn_in_slots() const;
};

// Precomputes the static table for theorem4/fixed kappa modes so repeated
// replications share one solve. Bootstrap mode resolves inside the run.
PolicySpec resolve_policy(const ExperimentConfig& cfg);

MetricsSeries run_replication(const ExperimentConfig& cfg, std::size_t rep_index);

struct ExperimentResult {
    std::vector<MetricsSeries> replications;
    EmpiricalReport report;
};

// Replications run in parallel worker threads; aggregation folds in
// replication order, so the thread count never changes the result.
ExperimentResult run_experiment(const ExperimentConfig& cfg, unsigned threads = 1);

enum class MeanRateRule { explicit_list, index, equal };
enum class SweepVariable { users, beta, n_slots };

UserPopulation make_population(std::size_t count, MeanRateRule rule,
                               const std::vector<double>& explicit_rates,
                               const RateModel& model);

struct SweepRow {
    double value = 0.0;
    PolicyKind policy = PolicyKind::jps_dynamic;
    EmpiricalReport report;
};

std::vector<SweepRow> sweep(const ExperimentConfig& base, MeanRateRule rule, SweepVariable var,
                            const std::vector<double>& values,
                            const std::vector<PolicySpec>& policies, unsigned threads);

struct PairedAgreement {
    double agreement = 0.0;
    std::int64_t compared = 0;
};

// Counterfactual comparison on one shared trajectory: the dynamic rule drives
// the state; every slot the static criterion is replayed over the same probe
// sequence and the two (J, K*) decisions are compared post burn-in.
PairedAgreement paired_decision_agreement(const ExperimentConfig& cfg,
                                          const ThresholdTable& table, std::size_t rep_index);

}  // namespace probesched
