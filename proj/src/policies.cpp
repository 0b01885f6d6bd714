#include "probesched/policies.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace probesched {

namespace {

constexpr double kThroughputFloorScale = 1e-9;

void check_state(const PolicyState& state, const UserPopulation& pop) {
    if (state.throughputs.size() != pop.size())
        throw std::invalid_argument("policy state does not match population size");
    for (double t : state.throughputs)
        if (!(t > 0.0)) throw std::invalid_argument("throughputs must stay positive");
    if (state.kind == PolicyKind::jps_static && !state.table)
        throw std::invalid_argument("jps_static state needs a threshold table");
    if (state.kind == PolicyKind::jlps) {
        if (state.archives.size() != pop.size())
            throw std::invalid_argument("jlps archives do not match population size");
        for (const auto& a : state.archives)
            if (a.empty()) throw std::invalid_argument("jlps archives must be nonempty");
    }
}

std::vector<std::size_t> sort_by_index_desc(const std::vector<double>& index) {
    std::vector<std::size_t> order(index.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        if (index[a] != index[b]) return index[a] > index[b];
        return a < b;
    });
    return order;
}

// argmax of rates[k]/T[k] over all users, ties to the lowest index
std::size_t pf_argmax(const std::vector<double>& rates, const std::vector<double>& T) {
    std::size_t best = 0;
    double best_s = rates[0] / T[0];
    for (std::size_t k = 1; k < rates.size(); ++k) {
        const double s = rates[k] / T[k];
        if (s > best_s) {
            best_s = s;
            best = k;
        }
    }
    return best;
}

double slot_fraction(std::size_t probes, double beta) {
    return std::max(0.0, 1.0 - static_cast<double>(probes) * beta);
}

// empirical look-ahead of Algorithm 2: (1/M) sum max(w, R^{(m)} / T)
double archive_lookahead(const std::vector<double>& archive, double T, double w) {
    double acc = 0.0;
    for (double r : archive) acc += std::max(w, r / T);
    return acc / static_cast<double>(archive.size());
}

SlotDecision run_probe_loop(PolicyState& state, const SlotRates& slot, const UserPopulation& pop,
                            double beta) {
    const std::size_t jmax = max_probes(pop.size(), beta);
    if (state.kind == PolicyKind::jps_static &&
        (state.table->j_max() != jmax || state.table->beta != beta))
        throw std::invalid_argument("threshold table was built for a different K or beta");

    const auto order = probe_order(state, pop);
    SlotDecision d;
    d.probe_order.reserve(jmax);
    d.probed_rates.reserve(jmax);

    double w = 0.0;
    std::size_t best = order[0];
    for (std::size_t j = 1; j <= jmax; ++j) {
        const std::size_t k = order[j - 1];
        const double rate = slot.rates[k];
        d.probe_order.push_back(k);
        d.probed_rates.push_back(rate);
        if (state.kind == PolicyKind::jlps) state.archives[k].push_back(rate);

        const double s = rate / state.throughputs[k];
        if (j == 1 || s > w || (s == w && k < best)) {
            w = s;
            best = k;
        }
        d.stop_index = j;
        if (j == jmax) break;

        const std::size_t next = order[j];
        bool stop = false;
        switch (state.kind) {
            case PolicyKind::jps_dynamic: {
                ProbeContext ctx{beta, jmax, j, w,
                                 pop.mean_rates[next] / state.throughputs[next]};
                stop = dynamic_should_stop(ctx, pop.rate_model);
                break;
            }
            case PolicyKind::jps_static:
                stop = static_should_stop(*state.table, j, w);
                break;
            case PolicyKind::jlps: {
                const double e =
                    archive_lookahead(state.archives[next], state.throughputs[next], w);
                const double jd = static_cast<double>(j);
                stop = (1.0 - jd * beta) * w >= (1.0 - (jd + 1.0) * beta) * e;
                break;
            }
            default:
                throw std::logic_error("run_probe_loop on a non-probing policy");
        }
        if (stop) break;
    }

    d.selected = best;
    d.delivered_bits = slot_fraction(d.stop_index, beta) * slot.rates[best];
    return d;
}

}  // namespace

PolicyState make_policy_state(PolicyKind kind, std::size_t user_count) {
    PolicyState state;
    state.kind = kind;
    state.throughputs.assign(user_count, 1.0);
    if (kind == PolicyKind::jlps) state.archives.resize(user_count);
    return state;
}

std::vector<std::size_t> probe_order(const PolicyState& state, const UserPopulation& pop) {
    check_state(state, pop);
    const std::size_t count = pop.size();
    if (state.kind == PolicyKind::round_robin) {
        std::vector<std::size_t> order(count);
        for (std::size_t i = 0; i < count; ++i) order[i] = (state.rr_cursor + i) % count;
        return order;
    }
    std::vector<double> index(count);
    for (std::size_t k = 0; k < count; ++k) {
        if (state.kind == PolicyKind::jlps) {
            const auto& archive = state.archives[k];
            const double mean =
                std::accumulate(archive.begin(), archive.end(), 0.0) /
                static_cast<double>(archive.size());
            index[k] = mean / state.throughputs[k];
        } else {
            index[k] = pop.mean_rates[k] / state.throughputs[k];
        }
    }
    return sort_by_index_desc(index);
}

SlotDecision run_slot(PolicyState& state, const SlotRates& slot, const UserPopulation& pop,
                      double beta) {
    check_state(state, pop);
    if (slot.rates.size() != pop.size())
        throw std::invalid_argument("slot rates do not match population size");

    SlotDecision d;
    switch (state.kind) {
        case PolicyKind::jps_dynamic:
        case PolicyKind::jps_static:
        case PolicyKind::jlps:
            d = run_probe_loop(state, slot, pop, beta);
            break;
        case PolicyKind::round_robin:
            d.selected = state.rr_cursor;
            d.delivered_bits = slot.rates[d.selected];
            state.rr_cursor = (state.rr_cursor + 1) % pop.size();
            break;
        case PolicyKind::genie_pf:
            d.selected = pf_argmax(slot.rates, state.throughputs);
            d.delivered_bits = slot.rates[d.selected];
            break;
        case PolicyKind::probe_all_pf: {
            d.probe_order = probe_order(state, pop);
            d.probed_rates.resize(pop.size());
            for (std::size_t i = 0; i < pop.size(); ++i)
                d.probed_rates[i] = slot.rates[d.probe_order[i]];
            d.stop_index = pop.size();
            d.selected = pf_argmax(slot.rates, state.throughputs);
            d.delivered_bits = slot_fraction(pop.size(), beta) * slot.rates[d.selected];
            break;
        }
    }

    assert(d.delivered_bits >= 0.0);
#ifndef NDEBUG
    // the selected user must attain the best probed normalized rate
    for (std::size_t i = 0; i < d.probe_order.size(); ++i) {
        const std::size_t k = d.probe_order[i];
        if (i < d.stop_index)
            assert(slot.rates[k] / state.throughputs[k] <=
                   slot.rates[d.selected] / state.throughputs[d.selected] + 1e-12);
    }
#endif
    return d;
}

void update_throughput(PolicyState& state, const SlotDecision& decision, std::int64_t n,
                       const UserPopulation& pop) {
    if (n < 1) throw std::invalid_argument("slot index must be >= 1");
    const double nd = static_cast<double>(n);
    const double decay = (nd - 1.0) / nd;
    for (std::size_t k = 0; k < state.throughputs.size(); ++k) {
        const double bits = (k == decision.selected) ? decision.delivered_bits : 0.0;
        double t = decay * state.throughputs[k] + bits / nd;
        state.throughputs[k] = std::max(t, kThroughputFloorScale * pop.mean_rates[k]);
    }
}

JlpsInit jlps_initialize(const UserPopulation& pop, double beta, const RateStream& stream) {
    const std::size_t count = pop.size();
    const std::size_t jmax = max_probes(count, beta);

    JlpsInit init;
    init.state = make_policy_state(PolicyKind::jlps, count);

    std::size_t next_user = 0;
    std::int64_t n = 0;
    while (next_user < count) {
        ++n;
        const SlotRates slot = stream.sample_slot_rates(pop, n);
        SlotDecision d;
        const std::size_t probes = std::min(jmax, count - next_user);
        for (std::size_t i = 0; i < probes; ++i) {
            const std::size_t k = next_user++;
            d.probe_order.push_back(k);
            d.probed_rates.push_back(slot.rates[k]);
            init.state.archives[k].push_back(slot.rates[k]);
        }
        d.stop_index = probes;
        d.selected = d.probe_order[0];
        double best_s = 0.0;
        for (std::size_t k : d.probe_order) {
            const double s = slot.rates[k] / init.state.throughputs[k];
            if (s > best_s) {
                best_s = s;
                d.selected = k;
            }
        }
        d.delivered_bits = slot_fraction(probes, beta) * slot.rates[d.selected];
        update_throughput(init.state, d, n, pop);
        init.decisions.push_back(std::move(d));
    }

    // Algorithm restarts the averages once every archive is seeded.
    std::fill(init.state.throughputs.begin(), init.state.throughputs.end(), 1.0);
    return init;
}

}  // namespace probesched
