#include "probesched/stopping.hpp"

#include <cmath>
#include <stdexcept>

namespace probesched {

namespace {
constexpr double kResidualTol = 1e-10;
constexpr int kMaxBisectIters = 400;
}  // namespace

std::size_t max_probes(std::size_t user_count, double beta) {
    if (!(beta > 0.0) || !(beta < 1.0)) throw std::invalid_argument("beta must lie in (0, 1)");
    const auto cap = static_cast<std::size_t>(std::floor(1.0 / beta + 1e-9));
    return std::min(user_count, cap);
}

double lookahead_expectation(const RateModel& model, double mean, double w) {
    if (!(mean > 0.0)) throw std::invalid_argument("lookahead_expectation requires mean > 0");
    if (w < 0.0) throw std::invalid_argument("lookahead_expectation requires w >= 0");
    return w + mean * model.partial_expectation(w / mean);
}

bool dynamic_should_stop(const ProbeContext& ctx, const RateModel& model) {
    if (ctx.probed > ctx.j_max) throw std::invalid_argument("probed beyond j_max");
    if (ctx.probed == ctx.j_max) return true;
    const double j = static_cast<double>(ctx.probed);
    const double stay = (1.0 - j * ctx.beta) * ctx.best_rate;
    const double cont =
        (1.0 - (j + 1.0) * ctx.beta) * lookahead_expectation(model, ctx.next_mean, ctx.best_rate);
    return stay >= cont;
}

double stop_margin(const RateModel& model, double beta, std::size_t probed, double next_mean,
                   double w) {
    const double j = static_cast<double>(probed);
    return (1.0 - j * beta) * w -
           (1.0 - (j + 1.0) * beta) * lookahead_expectation(model, next_mean, w);
}

double threshold_curve(const RateModel& model, double beta, std::size_t probed, double v) {
    if (!(beta > 0.0) || !(beta < 1.0)) throw std::invalid_argument("beta must lie in (0, 1)");
    if (v < 0.0) throw std::invalid_argument("threshold_curve requires v >= 0");
    const double coef = 1.0 / beta - (static_cast<double>(probed) + 1.0);
    return coef * model.partial_expectation(v);
}

double solve_threshold(const RateModel& model, double beta, std::size_t probed) {
    const double coef = 1.0 / beta - (static_cast<double>(probed) + 1.0);
    if (coef <= 1e-9) return 0.0;  // g_j vanishes at j = 1/beta - 1

    auto g = [&](double v) { return coef * model.partial_expectation(v); };
    // g is decreasing and g(0) = coef > 0, so v - g(v) crosses zero once.
    double lo = 0.0;
    double hi = 1.0;
    int guard = 0;
    while (g(hi) > hi) {
        hi *= 2.0;
        if (++guard > 200) throw std::runtime_error("solve_threshold: bracket expansion failed");
    }
    double mid = hi;
    for (int i = 0; i < kMaxBisectIters; ++i) {
        mid = 0.5 * (lo + hi);
        const double resid = mid - g(mid);
        if (std::abs(resid) <= kResidualTol) return mid;
        (resid < 0.0 ? lo : hi) = mid;
        if (hi - lo <= 1e-15 * (1.0 + hi)) break;
    }
    if (std::abs(mid - g(mid)) > kResidualTol)
        throw std::runtime_error("solve_threshold: bisection did not converge");
    return mid;
}

ThresholdTable build_threshold_table(const RateModel& model, double beta, std::size_t user_count,
                                     double kappa) {
    if (!(kappa > 0.0)) throw std::invalid_argument("kappa must be positive");
    const std::size_t jmax = max_probes(user_count, beta);
    ThresholdTable table;
    table.beta = beta;
    table.kappa = kappa;
    table.thresholds.reserve(jmax + 1);
    for (std::size_t j = 0; j < jmax; ++j) {
        table.thresholds.push_back(solve_threshold(model, beta, j));
    }
    table.thresholds.push_back(0.0);  // v_{J_max}
    return table;
}

bool static_should_stop(const ThresholdTable& table, std::size_t probed, double w) {
    if (probed < 1 || probed > table.j_max())
        throw std::invalid_argument("static_should_stop requires 1 <= probed <= j_max");
    if (w < 0.0) throw std::invalid_argument("static_should_stop requires w >= 0");
    return table.kappa * w >= table.thresholds[probed];
}

}  // namespace probesched
