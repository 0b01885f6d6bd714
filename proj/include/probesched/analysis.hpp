#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "probesched/metrics.hpp"
#include "probesched/rate_model.hpp"
#include "probesched/stopping.hpp"

namespace probesched {

// Steady-state probabilities p_1..p_{J_max} that exactly j users are probed
// before transmission: p_j = F(v_{j-1})^{j-1} - F(v_j)^j, with the last term
// absorbing the forced stop. Entry 0 holds p_1.
std::vector<double> probe_count_distribution(const RateModel& model, double beta, std::size_t K);

struct GainEstimate {
    double kappa = 0.0;
    double gain = 0.0;       // kappa * K
    double std_error = 0.0;  // Monte Carlo standard error of the gain
};

// Closed-form scheduling gain kappa*K evaluated term by term: each stage j
// contributes p_j (1-j*beta) times the conditional expectation of the best
// probed value, estimated by conditional sampling with rejection for the
// outer truncation. Throws if the rejection acceptance rate falls under 1e-6.
GainEstimate scheduling_gain_theorem4(const RateModel& model, double beta, std::size_t K,
                                      std::size_t mc_samples, std::uint64_t seed);

// E[max of K unit-mean draws], the no-cost full-CQI gain.
double gain_genie(const RateModel& model, std::size_t K, std::size_t mc_samples,
                  std::uint64_t seed);

// max(1 - K*beta, 0) * gain_genie
double gain_probe_all(const RateModel& model, std::size_t K, double beta,
                      std::size_t mc_samples, std::uint64_t seed);

// sum of ln T_k; throws on nonpositive input
double pf_utility(std::span<const double> throughputs);

struct TheoryReport {
    double beta = 0.1;
    std::size_t user_count = 0;
    std::vector<double> probe_probs;  // p_1..p_{J_max}
    double kappa = 0.0;
    double gain_jps = 0.0;
    double gain_ga = 0.0;
    double gain_pa = 0.0;
    double gain_rr = 1.0;
    double mc_std_error = 0.0;
};

TheoryReport theory_report(const RateModel& model, double beta, std::size_t K,
                           std::size_t mc_samples, std::uint64_t seed);

// Aggregated view over replications. Gain and kappa come from post-burn-in
// mean delivered bits: kappa_hat = mean_k Tbar_k / r_k, gain = K * kappa_hat.
struct EmpiricalReport {
    std::size_t replications = 0;
    double gain_mean = 0.0;
    double gain_std = 0.0;
    double kappa_mean = 0.0;
    double kappa_std = 0.0;
    double sum_throughput_mean = 0.0;
    double sum_throughput_std = 0.0;
    std::vector<double> selection_freq;  // full-run share per user
    std::vector<double> probe_freq;      // post-burn-in share per probe count
};

EmpiricalReport empirical_report(std::span<const MetricsSeries> series,
                                 const UserPopulation& pop);

}  // namespace probesched
