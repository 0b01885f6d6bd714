#pragma once

#include <cstddef>
#include <vector>

#include "probesched/rate_model.hpp"

namespace probesched {

// J_max = min(K, floor(1/beta)); the floor tolerates fp error when 1/beta is
// an integer (beta = 0.1 gives exactly 10 probes).
std::size_t max_probes(std::size_t user_count, double beta);

// State of the probe loop after `probed` users have been probed.
struct ProbeContext {
    double beta = 0.1;
    std::size_t j_max = 1;
    std::size_t probed = 0;    // j
    double best_rate = 0.0;    // w, largest normalized rate seen so far
    double next_mean = 1.0;    // r/T of the next candidate; unused at j_max
};

// E[w v m*X] = w + m * E[(X - w/m)+] for a candidate with normalized mean m.
double lookahead_expectation(const RateModel& model, double mean, double w);

// One-stage look-ahead rule: stop iff
//   (1 - j*beta) * w >= (1 - (j+1)*beta) * E[w v next],
// with a forced stop once j reaches j_max.
bool dynamic_should_stop(const ProbeContext& ctx, const RateModel& model);

// Stop-minus-continue margin f_j(w); nonnegative exactly when the dynamic
// rule stops at stage j < j_max. Nondecreasing in w with f_j(0) < 0.
double stop_margin(const RateModel& model, double beta, std::size_t probed,
                   double next_mean, double w);

// Threshold curve g_j(v) = (1/beta - (j+1)) * E[(X - v)+]; positive, strictly
// decreasing, and vanishing as v grows.
double threshold_curve(const RateModel& model, double beta, std::size_t probed, double v);

// Fixed point v_j of v = g_j(v), by bracketed bisection on v - g_j(v).
// Residual |v - g_j(v)| <= 1e-10. Returns 0 when g_j vanishes identically.
double solve_threshold(const RateModel& model, double beta, std::size_t probed);

// Static thresholds v_0 > v_1 > ... > v_{J_max-1} > v_{J_max} = 0, plus the
// throughput-to-mean-rate ratio kappa used to scale comparisons.
struct ThresholdTable {
    double beta = 0.1;
    double kappa = 1.0;
    std::vector<double> thresholds;  // size j_max()+1, last entry 0

    std::size_t j_max() const { return thresholds.empty() ? 0 : thresholds.size() - 1; }
};

ThresholdTable build_threshold_table(const RateModel& model, double beta,
                                     std::size_t user_count, double kappa);

// Static criterion after `probed` users: stop iff kappa * w >= v_probed.
bool static_should_stop(const ThresholdTable& table, std::size_t probed, double w);

}  // namespace probesched
