#include "probesched/analysis.hpp"

#include <cmath>
#include <stdexcept>

namespace probesched {

namespace {
constexpr std::uint64_t kTheorem4Tag = 0x54483447;
constexpr std::uint64_t kGenieTag = 0x47454e49;
constexpr double kMinAcceptance = 1e-6;
}  // namespace

std::vector<double> probe_count_distribution(const RateModel& model, double beta, std::size_t K) {
    const std::size_t jmax = max_probes(K, beta);
    const ThresholdTable table = build_threshold_table(model, beta, K, 1.0);

    // q_j = Pr{at least j probed} = Pr{max of first j-1 < v_{j-1}}, strict
    // because the stop fires at equality.
    std::vector<double> q(jmax + 2, 0.0);
    q[1] = 1.0;
    for (std::size_t j = 2; j <= jmax; ++j) {
        q[j] = std::pow(model.cdf_left(table.thresholds[j - 1]), static_cast<double>(j - 1));
    }
    std::vector<double> p(jmax);
    for (std::size_t j = 1; j < jmax; ++j) p[j - 1] = q[j] - q[j + 1];
    p[jmax - 1] = q[jmax];
    return p;
}

GainEstimate scheduling_gain_theorem4(const RateModel& model, double beta, std::size_t K,
                                      std::size_t mc_samples, std::uint64_t seed) {
    if (mc_samples < 1) throw std::invalid_argument("mc_samples must be positive");
    const std::size_t jmax = max_probes(K, beta);
    const ThresholdTable table = build_threshold_table(model, beta, K, 1.0);
    const std::vector<double> p = probe_count_distribution(model, beta, K);

    double gain = 0.0;
    double var = 0.0;
    for (std::size_t j = 1; j <= jmax; ++j) {
        const double weight = p[j - 1] * (1.0 - static_cast<double>(j) * beta);
        if (p[j - 1] <= 1e-15 || weight == 0.0) continue;

        const double below_level = table.thresholds[j - 1];  // binds only for j >= 2
        const double accept_level = table.thresholds[j];
        RandomStream rng = RandomStream::keyed(seed, kTheorem4Tag, j);

        std::size_t accepted = 0;
        std::size_t attempts = 0;
        double sum = 0.0;
        double sumsq = 0.0;
        while (accepted < mc_samples) {
            ++attempts;
            double m = model.sample(rng);  // X_j, unconditioned
            for (std::size_t i = 1; i < j; ++i) {
                m = std::max(m, model.conditional_sample(Region::below, below_level, rng));
            }
            if (m >= accept_level) {
                ++accepted;
                sum += m;
                sumsq += m * m;
            }
            if (attempts >= 1000000 && attempts % 1000000 == 0 &&
                static_cast<double>(accepted) < kMinAcceptance * static_cast<double>(attempts)) {
                throw std::runtime_error("scheduling_gain_theorem4: rejection acceptance < 1e-6");
            }
        }
        const double mean = sum / static_cast<double>(accepted);
        const double term_var =
            std::max(0.0, sumsq / static_cast<double>(accepted) - mean * mean) /
            static_cast<double>(accepted);
        gain += weight * mean;
        var += weight * weight * term_var;
    }

    GainEstimate est;
    est.gain = gain;
    est.kappa = gain / static_cast<double>(K);
    est.std_error = std::sqrt(var);
    return est;
}

double gain_genie(const RateModel& model, std::size_t K, std::size_t mc_samples,
                  std::uint64_t seed) {
    if (K < 1) throw std::invalid_argument("K must be >= 1");
    if (mc_samples < 1) throw std::invalid_argument("mc_samples must be positive");
    RandomStream rng = RandomStream::keyed(seed, kGenieTag, K);
    double sum = 0.0;
    for (std::size_t s = 0; s < mc_samples; ++s) {
        double m = model.sample(rng);
        for (std::size_t k = 1; k < K; ++k) m = std::max(m, model.sample(rng));
        sum += m;
    }
    return sum / static_cast<double>(mc_samples);
}

double gain_probe_all(const RateModel& model, std::size_t K, double beta,
                      std::size_t mc_samples, std::uint64_t seed) {
    const double fraction = std::max(0.0, 1.0 - static_cast<double>(K) * beta);
    if (fraction == 0.0) return 0.0;
    return fraction * gain_genie(model, K, mc_samples, seed);
}

double pf_utility(std::span<const double> throughputs) {
    double u = 0.0;
    for (double t : throughputs) {
        if (!(t > 0.0)) throw std::invalid_argument("pf_utility requires positive throughputs");
        u += std::log(t);
    }
    return u;
}

TheoryReport theory_report(const RateModel& model, double beta, std::size_t K,
                           std::size_t mc_samples, std::uint64_t seed) {
    TheoryReport rep;
    rep.beta = beta;
    rep.user_count = K;
    rep.probe_probs = probe_count_distribution(model, beta, K);
    const GainEstimate est = scheduling_gain_theorem4(model, beta, K, mc_samples, seed);
    rep.kappa = est.kappa;
    rep.gain_jps = est.gain;
    rep.mc_std_error = est.std_error;
    rep.gain_ga = gain_genie(model, K, mc_samples, seed);
    rep.gain_pa = std::max(0.0, 1.0 - static_cast<double>(K) * beta) * rep.gain_ga;
    rep.gain_rr = 1.0;
    return rep;
}

namespace {

void mean_std(const std::vector<double>& xs, double& mean, double& std_out) {
    mean = 0.0;
    for (double x : xs) mean += x;
    mean /= static_cast<double>(xs.size());
    std_out = 0.0;
    if (xs.size() > 1) {
        double ss = 0.0;
        for (double x : xs) ss += (x - mean) * (x - mean);
        std_out = std::sqrt(ss / static_cast<double>(xs.size() - 1));
    }
}

}  // namespace

EmpiricalReport empirical_report(std::span<const MetricsSeries> series,
                                 const UserPopulation& pop) {
    if (series.empty()) throw std::invalid_argument("empirical_report needs >= 1 replication");
    const std::size_t K = pop.size();

    std::vector<double> gains, kappas, sums;
    gains.reserve(series.size());
    std::size_t hist_len = 0;
    for (const auto& s : series) hist_len = std::max(hist_len, s.probe_histogram.size());

    EmpiricalReport rep;
    rep.replications = series.size();
    rep.selection_freq.assign(K, 0.0);
    rep.probe_freq.assign(hist_len, 0.0);

    for (const auto& s : series) {
        double kappa_hat = 0.0;
        double sum_tp = 0.0;
        for (std::size_t k = 0; k < K; ++k) {
            kappa_hat += s.post_mean_bits[k] / pop.mean_rates[k];
            sum_tp += s.post_mean_bits[k];
        }
        kappa_hat /= static_cast<double>(K);
        kappas.push_back(kappa_hat);
        gains.push_back(kappa_hat * static_cast<double>(K));
        sums.push_back(sum_tp);

        for (std::size_t k = 0; k < K; ++k) {
            rep.selection_freq[k] += static_cast<double>(s.selection_counts[k]) /
                                     static_cast<double>(s.n_slots) /
                                     static_cast<double>(series.size());
        }
        std::int64_t post = 0;
        for (auto c : s.probe_histogram) post += c;
        if (post > 0) {
            for (std::size_t j = 0; j < s.probe_histogram.size(); ++j) {
                rep.probe_freq[j] += static_cast<double>(s.probe_histogram[j]) /
                                     static_cast<double>(post) /
                                     static_cast<double>(series.size());
            }
        }
    }

    mean_std(gains, rep.gain_mean, rep.gain_std);
    mean_std(kappas, rep.kappa_mean, rep.kappa_std);
    mean_std(sums, rep.sum_throughput_mean, rep.sum_throughput_std);
    return rep;
}

}  // namespace probesched
