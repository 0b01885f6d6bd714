#include "probesched/sim.hpp"

#include <atomic>
#include <cmath>
#include <exception>
#include <mutex>
#include <stdexcept>
#include <thread>

namespace probesched {

namespace {

// ~90 recorded slots per decade: every slot below 100, every 10th below
// 1000, and so on.
std::int64_t decade_step(std::int64_t n) {
    std::int64_t step = 1;
    while (n >= step * 100) step *= 10;
    return step;
}

bool should_record(std::int64_t n, std::int64_t n_slots, std::int64_t interval) {
    if (n == n_slots) return true;
    if (interval > 0 && n % interval == 0) return true;
    return n % decade_step(n) == 0;
}

class Recorder {
  public:
    Recorder(const ExperimentConfig& cfg, MetricsSeries& out) : cfg_(cfg), out_(out) {
        const std::size_t count = cfg.pop.size();
        out_.n_slots = cfg.n_slots;
        out_.burn_in_slots = cfg.burn_in_slots();
        out_.selection_counts.assign(count, 0);
        out_.selection_counts_post.assign(count, 0);
        out_.total_bits.assign(count, 0.0);
        out_.post_mean_bits.assign(count, 0.0);
    }

    void slot(std::int64_t n, const SlotDecision& d, const std::vector<double>& throughputs) {
        out_.selection_counts[d.selected] += 1;
        out_.total_bits[d.selected] += d.delivered_bits;
        const bool post = n > out_.burn_in_slots;
        if (post) {
            out_.selection_counts_post[d.selected] += 1;
            out_.post_mean_bits[d.selected] += d.delivered_bits;
            if (out_.probe_histogram.size() <= d.stop_index)
                out_.probe_histogram.resize(d.stop_index + 1, 0);
            out_.probe_histogram[d.stop_index] += 1;
        }
        const double u = pf_utility(throughputs);
        if (post) {
            window_sum_ += u;
            if (++window_count_ == kWindow) {
                out_.window_utility.push_back(window_sum_ / kWindow);
                window_sum_ = 0.0;
                window_count_ = 0;
            }
        }
        if (should_record(n, cfg_.n_slots, cfg_.record_interval)) {
            out_.record_slots.push_back(n);
            out_.throughput_traj.push_back(throughputs);
            out_.utility_traj.push_back(u);
        }
        if (cfg_.record_decisions) out_.decisions.emplace_back(d.stop_index, d.selected);
    }

    void finish(const std::vector<double>& throughputs) {
        out_.final_throughputs = throughputs;
        const double post_slots =
            static_cast<double>(out_.n_slots - out_.burn_in_slots);
        if (post_slots > 0) {
            for (double& b : out_.post_mean_bits) b /= post_slots;
        }
    }

  private:
    static constexpr int kWindow = 1000;
    const ExperimentConfig& cfg_;
    MetricsSeries& out_;
    double window_sum_ = 0.0;
    int window_count_ = 0;
};

}  // namespace

void ExperimentConfig::validate() const {
    if (!(beta > 0.0) || !(beta < 1.0)) throw std::invalid_argument("beta must lie in (0, 1)");
    if (n_slots < 1) throw std::invalid_argument("n_slots must be >= 1");
    if (n_replications < 1) throw std::invalid_argument("n_replications must be >= 1");
    if (!(burn_in_fraction >= 0.0) || burn_in_fraction >= 1.0)
        throw std::invalid_argument("burn_in_fraction must lie in [0, 1)");
    if (record_interval < 0) throw std::invalid_argument("record_interval must be >= 0");
    if (policy.kind == PolicyKind::jps_static) {
        switch (policy.kappa_mode) {
            case KappaMode::fixed:
                if (!(policy.kappa > 0.0)) throw std::invalid_argument("kappa must be positive");
                break;
            case KappaMode::bootstrap:
                if (policy.burn_in_slots < 1 || policy.burn_in_slots >= n_slots)
                    throw std::invalid_argument(
                        "bootstrap burn_in_slots must lie in [1, n_slots)");
                break;
            case KappaMode::theorem4:
                if (policy.mc_samples < 1000)
                    throw std::invalid_argument("theorem4 mode needs mc_samples >= 1000");
                break;
        }
    }
    if (policy.kind == PolicyKind::jlps &&
        static_cast<std::size_t>(n_slots) < jlps_init_slots(pop.size(), beta))
        throw std::invalid_argument("jlps needs n_slots >= its initialization slots");
}

std::int64_t ExperimentConfig::burn_in_slots() const {
    return static_cast<std::int64_t>(std::floor(burn_in_fraction * static_cast<double>(n_slots)));
}

PolicySpec resolve_policy(const ExperimentConfig& cfg) {
    PolicySpec spec = cfg.policy;
    if (spec.kind != PolicyKind::jps_static || spec.table.has_value()) return spec;
    switch (spec.kappa_mode) {
        case KappaMode::fixed:
            spec.table =
                build_threshold_table(cfg.pop.rate_model, cfg.beta, cfg.pop.size(), spec.kappa);
            break;
        case KappaMode::theorem4: {
            const GainEstimate est = scheduling_gain_theorem4(
                cfg.pop.rate_model, cfg.beta, cfg.pop.size(), spec.mc_samples, cfg.seed);
            spec.kappa = est.kappa;
            spec.table =
                build_threshold_table(cfg.pop.rate_model, cfg.beta, cfg.pop.size(), est.kappa);
            break;
        }
        case KappaMode::bootstrap:
            break;  // resolved inside the replication
    }
    return spec;
}

MetricsSeries run_replication(const ExperimentConfig& cfg, std::size_t rep_index) {
    cfg.validate();
    const PolicySpec spec = resolve_policy(cfg);
    const RateStream stream(cfg.seed, rep_index);
    const UserPopulation& pop = cfg.pop;

    MetricsSeries out;
    Recorder recorder(cfg, out);

    PolicyState state;
    std::int64_t n = 0;

    if (spec.kind == PolicyKind::jlps) {
        JlpsInit init = jlps_initialize(pop, cfg.beta, stream);
        // replay the initialization slots through the recorder
        PolicyState replay = make_policy_state(PolicyKind::jlps, pop.size());
        for (const SlotDecision& d : init.decisions) {
            ++n;
            update_throughput(replay, d, n, pop);
            recorder.slot(n, d, replay.throughputs);
        }
        state = std::move(init.state);
    } else if (spec.kind == PolicyKind::jps_static &&
               spec.kappa_mode == KappaMode::bootstrap) {
        // dynamic phase, then freeze kappa = mean T_k/r_k and switch
        state = make_policy_state(PolicyKind::jps_dynamic, pop.size());
        const std::int64_t phase = std::min(spec.burn_in_slots, cfg.n_slots);
        for (; n < phase;) {
            ++n;
            const SlotRates rates = stream.sample_slot_rates(pop, n);
            const SlotDecision d = run_slot(state, rates, pop, cfg.beta);
            update_throughput(state, d, n, pop);
            recorder.slot(n, d, state.throughputs);
        }
        double kappa = 0.0;
        for (std::size_t k = 0; k < pop.size(); ++k)
            kappa += state.throughputs[k] / pop.mean_rates[k];
        kappa /= static_cast<double>(pop.size());
        state.kind = PolicyKind::jps_static;
        state.table = build_threshold_table(pop.rate_model, cfg.beta, pop.size(), kappa);
    } else {
        state = make_policy_state(spec.kind, pop.size());
        if (spec.kind == PolicyKind::jps_static) state.table = spec.table;
    }

    for (; n < cfg.n_slots;) {
        ++n;
        const SlotRates rates = stream.sample_slot_rates(pop, n);
        const SlotDecision d = run_slot(state, rates, pop, cfg.beta);
        update_throughput(state, d, n, pop);
        recorder.slot(n, d, state.throughputs);
    }

    recorder.finish(state.throughputs);
    return out;
}

ExperimentResult run_experiment(const ExperimentConfig& cfg, unsigned threads) {
    cfg.validate();
    ExperimentConfig resolved = cfg;
    resolved.policy = resolve_policy(cfg);

    ExperimentResult result;
    result.replications.resize(cfg.n_replications);

    if (threads == 0) threads = std::thread::hardware_concurrency();
    threads = std::max(1u, std::min<unsigned>(threads, cfg.n_replications));

    if (threads == 1) {
        for (std::size_t r = 0; r < cfg.n_replications; ++r)
            result.replications[r] = run_replication(resolved, r);
    } else {
        std::atomic<std::size_t> next{0};
        std::exception_ptr error;
        std::mutex error_mutex;
        auto worker = [&]() {
            for (;;) {
                const std::size_t r = next.fetch_add(1);
                if (r >= cfg.n_replications) return;
                try {
                    result.replications[r] = run_replication(resolved, r);
                } catch (...) {
                    std::lock_guard<std::mutex> lock(error_mutex);
                    if (!error) error = std::current_exception();
                    return;
                }
            }
        };
        std::vector<std::thread> pool;
        for (unsigned t = 0; t < threads; ++t) pool.emplace_back(worker);
        for (auto& t : pool) t.join();
        if (error) std::rethrow_exception(error);
    }

    result.report = empirical_report(result.replications, cfg.pop);
    return result;
}

UserPopulation make_population(std::size_t count, MeanRateRule rule,
                               const std::vector<double>& explicit_rates,
                               const RateModel& model) {
    if (count < 1) throw std::invalid_argument("population needs at least one user");
    std::vector<double> rates;
    switch (rule) {
        case MeanRateRule::explicit_list:
            if (explicit_rates.size() != count)
                throw std::invalid_argument("mean_rates length does not match user count");
            rates = explicit_rates;
            break;
        case MeanRateRule::index:
            rates.resize(count);
            for (std::size_t k = 0; k < count; ++k) rates[k] = static_cast<double>(k + 1);
            break;
        case MeanRateRule::equal:
            rates.assign(count, 1.0);
            break;
    }
    return UserPopulation(std::move(rates), model);
}

std::vector<SweepRow> sweep(const ExperimentConfig& base, MeanRateRule rule, SweepVariable var,
                            const std::vector<double>& values,
                            const std::vector<PolicySpec>& policies, unsigned threads) {
    if (values.empty()) throw std::invalid_argument("sweep needs at least one value");
    if (policies.empty()) throw std::invalid_argument("sweep needs at least one policy");

    std::vector<SweepRow> rows;
    rows.reserve(values.size() * policies.size());
    for (double value : values) {
        ExperimentConfig cfg = base;
        switch (var) {
            case SweepVariable::users: {
                const auto count = static_cast<std::size_t>(value);
                if (count < 1 || static_cast<double>(count) != value)
                    throw std::invalid_argument("user sweep values must be positive integers");
                cfg.pop = make_population(count, rule, base.pop.mean_rates,
                                          base.pop.rate_model);
                break;
            }
            case SweepVariable::beta:
                cfg.beta = value;
                break;
            case SweepVariable::n_slots:
                cfg.n_slots = static_cast<std::int64_t>(value);
                break;
        }
        for (const PolicySpec& spec : policies) {
            cfg.policy = spec;
            SweepRow row;
            row.value = value;
            row.policy = spec.kind;
            row.report = run_experiment(cfg, threads).report;
            rows.push_back(std::move(row));
        }
    }
    return rows;
}

PairedAgreement paired_decision_agreement(const ExperimentConfig& cfg,
                                          const ThresholdTable& table, std::size_t rep_index) {
    cfg.validate();
    const UserPopulation& pop = cfg.pop;
    const std::size_t jmax = max_probes(pop.size(), cfg.beta);
    if (table.j_max() != jmax)
        throw std::invalid_argument("threshold table was built for a different K or beta");

    const RateStream stream(cfg.seed, rep_index);
    PolicyState state = make_policy_state(PolicyKind::jps_dynamic, pop.size());
    const std::int64_t burn = cfg.burn_in_slots();

    PairedAgreement out;
    std::int64_t agreed = 0;
    for (std::int64_t n = 1; n <= cfg.n_slots; ++n) {
        const SlotRates rates = stream.sample_slot_rates(pop, n);
        const auto order = probe_order(state, pop);

        double w = 0.0;
        std::size_t best = order[0];
        std::size_t j_dyn = 0, j_stat = 0;
        std::size_t best_dyn = 0, best_stat = 0;
        for (std::size_t j = 1; j <= jmax; ++j) {
            const std::size_t k = order[j - 1];
            const double s = rates.rates[k] / state.throughputs[k];
            if (j == 1 || s > w || (s == w && k < best)) {
                w = s;
                best = k;
            }
            bool stop_dyn = j == jmax;
            bool stop_stat = j == jmax;
            if (j < jmax) {
                const std::size_t next = order[j];
                ProbeContext ctx{cfg.beta, jmax, j, w,
                                 pop.mean_rates[next] / state.throughputs[next]};
                stop_dyn = dynamic_should_stop(ctx, pop.rate_model);
                stop_stat = static_should_stop(table, j, w);
            }
            if (j_dyn == 0 && stop_dyn) {
                j_dyn = j;
                best_dyn = best;
            }
            if (j_stat == 0 && stop_stat) {
                j_stat = j;
                best_stat = best;
            }
            if (j_dyn != 0 && j_stat != 0) break;
        }

        SlotDecision d;
        d.stop_index = j_dyn;
        d.selected = best_dyn;
        d.delivered_bits =
            std::max(0.0, 1.0 - static_cast<double>(j_dyn) * cfg.beta) * rates.rates[best_dyn];
        update_throughput(state, d, n, pop);

        if (n > burn) {
            ++out.compared;
            if (j_dyn == j_stat && best_dyn == best_stat) ++agreed;
        }
    }
    out.agreement =
        out.compared > 0 ? static_cast<double>(agreed) / static_cast<double>(out.compared) : 0.0;
    return out;
}

}  // namespace probesched
