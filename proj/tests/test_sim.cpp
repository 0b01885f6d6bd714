#include <algorithm>
#include <stdexcept>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "doctest.h"
#include "probesched/sim.hpp"

using namespace probesched;

namespace {

ExperimentConfig base_config(std::size_t users, PolicyKind kind, std::int64_t slots) {
    ExperimentConfig cfg{
        .pop = make_population(users, MeanRateRule::index, {}, RateModel::exponential())};
    cfg.beta = 0.1;
    cfg.policy.kind = kind;
    cfg.n_slots = slots;
    cfg.n_replications = 1;
    cfg.seed = 1;
    return cfg;
}

bool same_series(const MetricsSeries& a, const MetricsSeries& b) {
    return a.record_slots == b.record_slots && a.throughput_traj == b.throughput_traj &&
           a.utility_traj == b.utility_traj && a.selection_counts == b.selection_counts &&
           a.selection_counts_post == b.selection_counts_post &&
           a.probe_histogram == b.probe_histogram &&
           a.final_throughputs == b.final_throughputs && a.total_bits == b.total_bits &&
           a.post_mean_bits == b.post_mean_bits && a.window_utility == b.window_utility &&
           a.decisions == b.decisions;
}

}  // namespace

TEST_CASE("replications are deterministic given seed and index") {
    ExperimentConfig cfg = base_config(6, PolicyKind::jps_dynamic, 3000);
    cfg.record_decisions = true;
    const MetricsSeries a = run_replication(cfg, 2);
    const MetricsSeries b = run_replication(cfg, 2);
    CHECK(same_series(a, b));
    const MetricsSeries c = run_replication(cfg, 3);
    CHECK_FALSE(same_series(a, c));
    CHECK(a.decisions.size() == 3000);
}

TEST_CASE("round robin hand trace over four slots") {
    ExperimentConfig cfg{
        .pop = UserPopulation({1.0, 1.0}, RateModel::discrete({{1.0, 1.0}}))};
    cfg.beta = 0.1;
    cfg.policy.kind = PolicyKind::round_robin;
    cfg.n_slots = 4;
    cfg.burn_in_fraction = 0.0;
    const MetricsSeries m = run_replication(cfg, 0);
    CHECK(m.selection_counts == std::vector<std::int64_t>{2, 2});
    CHECK(m.final_throughputs[0] == doctest::Approx(0.5).epsilon(1e-8));
    CHECK(m.final_throughputs[1] == doctest::Approx(0.5).epsilon(1e-8));
}

TEST_CASE("a single genie user is selected every slot") {
    ExperimentConfig cfg = base_config(1, PolicyKind::genie_pf, 100);
    const MetricsSeries m = run_replication(cfg, 0);
    CHECK(m.selection_counts == std::vector<std::int64_t>{100});
}

TEST_CASE("incremental throughput equals the direct bit average") {
    for (PolicyKind kind :
         {PolicyKind::jps_dynamic, PolicyKind::genie_pf, PolicyKind::round_robin}) {
        ExperimentConfig cfg = base_config(5, kind, 1000);
        const MetricsSeries m = run_replication(cfg, 0);
        for (std::size_t k = 0; k < 5; ++k) {
            const double direct = m.total_bits[k] / 1000.0;
            CHECK(m.final_throughputs[k] ==
                  doctest::Approx(direct).epsilon(1e-9));
        }
    }
}

TEST_CASE("selection counts cover every slot") {
    ExperimentConfig cfg = base_config(7, PolicyKind::jps_dynamic, 4000);
    const MetricsSeries m = run_replication(cfg, 0);
    std::int64_t total = 0;
    for (auto c : m.selection_counts) total += c;
    CHECK(total == 4000);
}

TEST_CASE("probe counts stay within 1..J_max for the probing policies") {
    for (PolicyKind kind : {PolicyKind::jps_dynamic, PolicyKind::jlps}) {
        ExperimentConfig cfg = base_config(20, kind, 5000);
        const MetricsSeries m = run_replication(cfg, 0);
        REQUIRE(m.probe_histogram.size() <= 11);
        CHECK(m.probe_histogram[0] == 0);
        std::int64_t total = 0;
        for (auto c : m.probe_histogram) total += c;
        CHECK(total == cfg.n_slots - cfg.burn_in_slots());
    }
}

TEST_CASE("every user is selected a 1/K share of steady-state slots") {
    ExperimentConfig cfg = base_config(20, PolicyKind::jps_dynamic, 25000);
    cfg.burn_in_fraction = 0.2;  // post window = 20000 slots
    const MetricsSeries m = run_replication(cfg, 0);
    const double n = 20000.0;
    const double share = 1.0 / 20.0;
    const double band = 4.0 * std::sqrt(share * (1.0 - share) / n);
    for (std::int64_t c : m.selection_counts_post) {
        CHECK(static_cast<double>(c) / n >= share - band);
        CHECK(static_cast<double>(c) / n <= share + band);
    }
}

TEST_CASE("utility keeps improving after burn-in") {
    // deep into steady state the 1/sqrt(n) fluctuations of T fit the budget
    ExperimentConfig cfg = base_config(10, PolicyKind::jps_dynamic, 200000);
    cfg.burn_in_fraction = 0.5;
    const MetricsSeries m = run_replication(cfg, 0);
    REQUIRE(m.window_utility.size() >= 50);
    for (std::size_t i = 0; i + 1 < m.window_utility.size(); ++i)
        CHECK(m.window_utility[i + 1] >= m.window_utility[i] - 0.01);
}

TEST_CASE("delivered bits never exceed the one-probe bound") {
    ExperimentConfig cfg = base_config(6, PolicyKind::jps_dynamic, 500);
    cfg.record_decisions = true;
    const RateStream stream(cfg.seed, 0);
    const MetricsSeries m = run_replication(cfg, 0);

    PolicyState probe = make_policy_state(PolicyKind::jps_dynamic, 6);
    for (std::int64_t n = 1; n <= cfg.n_slots; ++n) {
        const SlotRates rates = stream.sample_slot_rates(cfg.pop, n);
        const double max_rate = *std::max_element(rates.rates.begin(), rates.rates.end());
        const SlotDecision d = run_slot(probe, rates, cfg.pop, cfg.beta);
        update_throughput(probe, d, n, cfg.pop);
        CHECK(d.delivered_bits <= (1.0 - cfg.beta) * max_rate + 1e-12);
        CHECK(d.stop_index == m.decisions[n - 1].first);
    }
}

TEST_CASE("worker thread count does not change the result") {
    ExperimentConfig cfg = base_config(8, PolicyKind::jps_dynamic, 4000);
    cfg.n_replications = 6;
    const ExperimentResult one = run_experiment(cfg, 1);
    const ExperimentResult four = run_experiment(cfg, 4);
    REQUIRE(one.replications.size() == four.replications.size());
    for (std::size_t r = 0; r < one.replications.size(); ++r)
        CHECK(same_series(one.replications[r], four.replications[r]));
    CHECK(one.report.gain_mean == four.report.gain_mean);
    CHECK(one.report.gain_std == four.report.gain_std);
}

TEST_CASE("static bootstrap reproduces the dynamic steady state") {
    ExperimentConfig dyn = base_config(10, PolicyKind::jps_dynamic, 20000);
    ExperimentConfig stat = dyn;
    stat.policy.kind = PolicyKind::jps_static;
    stat.policy.kappa_mode = KappaMode::bootstrap;
    stat.policy.burn_in_slots = 2000;
    const ExperimentResult a = run_experiment(dyn, 1);
    const ExperimentResult b = run_experiment(stat, 1);
    CHECK(b.report.gain_mean == doctest::Approx(a.report.gain_mean).epsilon(0.05));
}

TEST_CASE("static kappa from the closed form tracks the dynamic rule") {
    ExperimentConfig cfg = base_config(10, PolicyKind::jps_dynamic, 20000);
    const GainEstimate est =
        scheduling_gain_theorem4(cfg.pop.rate_model, cfg.beta, 10, 400000, cfg.seed);
    const ThresholdTable table =
        build_threshold_table(cfg.pop.rate_model, cfg.beta, 10, est.kappa);
    const PairedAgreement pa = paired_decision_agreement(cfg, table, 0);
    CHECK(pa.compared == 18000);
    CHECK(pa.agreement >= 0.95);
}

TEST_CASE("gain is invariant to the mean-rate profile") {
    ExperimentConfig idx = base_config(5, PolicyKind::jps_dynamic, 30000);
    ExperimentConfig eq = idx;
    eq.pop = make_population(5, MeanRateRule::equal, {}, RateModel::exponential());
    const ExperimentResult a = run_experiment(idx, 1);
    const ExperimentResult b = run_experiment(eq, 1);
    CHECK(a.report.gain_mean == doctest::Approx(b.report.gain_mean).epsilon(0.02));
}

TEST_CASE("sweep with one value matches run_experiment") {
    ExperimentConfig cfg = base_config(4, PolicyKind::genie_pf, 2000);
    const auto rows = sweep(cfg, MeanRateRule::index, SweepVariable::users, {4.0},
                            {cfg.policy}, 1);
    REQUIRE(rows.size() == 1);
    const ExperimentResult direct = run_experiment(cfg, 1);
    CHECK(rows[0].report.gain_mean == direct.report.gain_mean);
    CHECK(rows[0].report.kappa_mean == direct.report.kappa_mean);
}

TEST_CASE("probe-all gain vanishes once K reaches 1/beta") {
    ExperimentConfig cfg = base_config(5, PolicyKind::probe_all_pf, 4000);
    const auto rows = sweep(cfg, MeanRateRule::index, SweepVariable::users, {5.0, 10.0, 12.0},
                            {cfg.policy}, 2);
    REQUIRE(rows.size() == 3);
    CHECK(rows[0].report.gain_mean > 0.5);
    CHECK(rows[1].report.gain_mean == 0.0);
    CHECK(rows[2].report.gain_mean == 0.0);
}

TEST_CASE("sweeps over beta and n_slots run the right experiments") {
    ExperimentConfig cfg = base_config(6, PolicyKind::jps_dynamic, 4000);
    const auto by_beta = sweep(cfg, MeanRateRule::index, SweepVariable::beta, {0.2, 0.5},
                               {cfg.policy}, 1);
    REQUIRE(by_beta.size() == 2);
    CHECK(by_beta[0].report.gain_mean > by_beta[1].report.gain_mean);  // cheaper probes help
    CHECK(by_beta[1].report.gain_mean > 0.0);

    cfg.policy.kind = PolicyKind::genie_pf;
    const auto by_slots = sweep(cfg, MeanRateRule::index, SweepVariable::n_slots,
                                {1000.0, 4000.0}, {cfg.policy}, 1);
    REQUIRE(by_slots.size() == 2);
    CHECK(by_slots[0].value == 1000.0);
    CHECK(by_slots[0].report.gain_mean == doctest::Approx(by_slots[1].report.gain_mean)
                                              .epsilon(0.1));
}

TEST_CASE("scheduling gain rises with K and then flattens") {
    ExperimentConfig cfg = base_config(2, PolicyKind::jps_dynamic, 20000);
    const auto rows = sweep(cfg, MeanRateRule::index, SweepVariable::users,
                            {2.0, 6.0, 10.0, 20.0}, {cfg.policy}, 2);
    REQUIRE(rows.size() == 4);
    CHECK(rows[1].report.gain_mean > rows[0].report.gain_mean);
    CHECK(rows[3].report.gain_mean ==
          doctest::Approx(rows[2].report.gain_mean).epsilon(0.05));
}

TEST_CASE("jlps consumes its initialization slots and then learns") {
    ExperimentConfig cfg = base_config(20, PolicyKind::jlps, 6000);
    const MetricsSeries m = run_replication(cfg, 0);
    std::int64_t total = 0;
    for (auto c : m.selection_counts) total += c;
    CHECK(total == 6000);
    // initialization slots show up in the probe histogram budget
    CHECK(m.record_slots.front() == 1);
    CHECK(m.record_slots.back() == 6000);

    ExperimentConfig tiny = base_config(20, PolicyKind::jlps, 1);
    CHECK_THROWS_AS(run_replication(tiny, 0), std::invalid_argument);
}

TEST_CASE("trajectory thinning is densest at the start") {
    ExperimentConfig cfg = base_config(3, PolicyKind::genie_pf, 5000);
    const MetricsSeries m = run_replication(cfg, 0);
    REQUIRE(!m.record_slots.empty());
    CHECK(m.record_slots.front() == 1);
    CHECK(m.record_slots.back() == 5000);
    CHECK(std::is_sorted(m.record_slots.begin(), m.record_slots.end()));
    // the first 99 slots are all present
    CHECK(m.record_slots[98] == 99);
    // far fewer points overall than slots
    CHECK(m.record_slots.size() < 500);
    CHECK(m.throughput_traj.size() == m.record_slots.size());
    CHECK(m.utility_traj.size() == m.record_slots.size());
}

TEST_CASE("config validation") {
    ExperimentConfig cfg = base_config(4, PolicyKind::jps_dynamic, 100);
    cfg.beta = 1.5;
    CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
    cfg.beta = 0.1;
    cfg.n_slots = 0;
    CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
    cfg.n_slots = 100;
    cfg.burn_in_fraction = 1.0;
    CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
    cfg.burn_in_fraction = 0.1;
    cfg.policy.kind = PolicyKind::jps_static;
    cfg.policy.kappa_mode = KappaMode::fixed;
    cfg.policy.kappa = -1.0;
    CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
    cfg.policy.kappa = 0.5;
    CHECK_NOTHROW(cfg.validate());
    cfg.policy.kappa_mode = KappaMode::bootstrap;
    cfg.policy.burn_in_slots = 100;  // not < n_slots
    CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
}
