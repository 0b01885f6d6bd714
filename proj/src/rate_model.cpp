#include "probesched/rate_model.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace probesched {

namespace {

constexpr double kMassTol = 1e-9;

// adaptive Simpson with absolute tolerance
double simpson(double fa, double fm, double fb, double a, double b) {
    return (b - a) / 6.0 * (fa + 4.0 * fm + fb);
}

template <typename F>
double adaptive_simpson_rec(const F& f, double a, double m, double b, double fa,
                            double fm, double fb, double whole, double tol, int depth) {
    const double lm = 0.5 * (a + m);
    const double rm = 0.5 * (m + b);
    const double flm = f(lm);
    const double frm = f(rm);
    const double left = simpson(fa, flm, fm, a, m);
    const double right = simpson(fm, frm, fb, m, b);
    const double delta = left + right - whole;
    if (depth <= 0 || std::abs(delta) <= 15.0 * tol) {
        return left + right + delta / 15.0;
    }
    return adaptive_simpson_rec(f, a, lm, m, fa, flm, fm, left, 0.5 * tol, depth - 1) +
           adaptive_simpson_rec(f, m, rm, b, fm, frm, fb, right, 0.5 * tol, depth - 1);
}

template <typename F>
double adaptive_simpson(const F& f, double a, double b, double tol) {
    if (b <= a) return 0.0;
    const double m = 0.5 * (a + b);
    const double fa = f(a);
    const double fm = f(m);
    const double fb = f(b);
    return adaptive_simpson_rec(f, a, m, b, fa, fm, fb, simpson(fa, fm, fb, a, b), tol, 48);
}

}  // namespace

RateModel RateModel::exponential() { return RateModel(Impl{Exponential{}}); }

RateModel RateModel::uniform_0_2() { return RateModel(Impl{Uniform02{}}); }

RateModel RateModel::discrete(std::vector<DiscreteAtom> atoms) {
    if (atoms.empty()) throw std::invalid_argument("discrete model needs at least one atom");
    double mass = 0.0;
    double mean = 0.0;
    for (const auto& a : atoms) {
        if (!(a.value >= 0.0) || !std::isfinite(a.value))
            throw std::invalid_argument("discrete atom values must be finite and nonnegative");
        if (!(a.prob > 0.0) || !std::isfinite(a.prob))
            throw std::invalid_argument("discrete atom probabilities must be positive");
        mass += a.prob;
        mean += a.prob * a.value;
    }
    if (std::abs(mass - 1.0) > kMassTol)
        throw std::invalid_argument("discrete atom probabilities must sum to 1");
    if (std::abs(mean - 1.0) > kMassTol)
        throw std::invalid_argument("discrete model must have unit mean");
    std::sort(atoms.begin(), atoms.end(),
              [](const DiscreteAtom& l, const DiscreteAtom& r) { return l.value < r.value; });
    return RateModel(Impl{Discrete{std::move(atoms)}});
}

bool RateModel::is_discrete() const { return std::holds_alternative<Discrete>(impl_); }

const std::vector<DiscreteAtom>& RateModel::atoms() const {
    if (const auto* d = std::get_if<Discrete>(&impl_)) return d->atoms;
    throw std::logic_error("atoms() called on a continuous model");
}

double RateModel::cdf(double x) const {
    return std::visit(
        [x](const auto& m) -> double {
            using T = std::decay_t<decltype(m)>;
            if constexpr (std::is_same_v<T, Exponential>) {
                return x < 0.0 ? 0.0 : -std::expm1(-x);
            } else if constexpr (std::is_same_v<T, Uniform02>) {
                return std::clamp(x * 0.5, 0.0, 1.0);
            } else {
                double c = 0.0;
                for (const auto& a : m.atoms)
                    if (a.value <= x) c += a.prob;
                return c;
            }
        },
        impl_);
}

double RateModel::cdf_left(double x) const {
    if (const auto* d = std::get_if<Discrete>(&impl_)) {
        double c = 0.0;
        for (const auto& a : d->atoms)
            if (a.value < x) c += a.prob;
        return c;
    }
    return cdf(x);
}

double RateModel::partial_expectation(double v) const {
    if (v < 0.0) throw std::invalid_argument("partial_expectation requires v >= 0");
    return std::visit(
        [v](const auto& m) -> double {
            using T = std::decay_t<decltype(m)>;
            if constexpr (std::is_same_v<T, Exponential>) {
                return std::exp(-v);
            } else if constexpr (std::is_same_v<T, Uniform02>) {
                if (v >= 2.0) return 0.0;
                return adaptive_simpson([v](double x) { return (x - v) * 0.5; }, v, 2.0, 1e-9);
            } else {
                double e = 0.0;
                for (const auto& a : m.atoms)
                    if (a.value > v) e += a.prob * (a.value - v);
                return e;
            }
        },
        impl_);
}

double RateModel::quantile(double u) const {
    if (!(u >= 0.0) || u >= 1.0) throw std::invalid_argument("quantile requires u in [0, 1)");
    return std::visit(
        [u](const auto& m) -> double {
            using T = std::decay_t<decltype(m)>;
            if constexpr (std::is_same_v<T, Exponential>) {
                return -std::log1p(-u);
            } else if constexpr (std::is_same_v<T, Uniform02>) {
                return 2.0 * u;
            } else {
                double c = 0.0;
                for (const auto& a : m.atoms) {
                    c += a.prob;
                    if (u < c) return a.value;
                }
                return m.atoms.back().value;
            }
        },
        impl_);
}

double RateModel::sample(RandomStream& rng) const { return quantile(rng.uniform()); }

double RateModel::conditional_sample(Region region, double v, RandomStream& rng) const {
    const double below_mass = cdf_left(v);
    if (region == Region::below) {
        if (below_mass <= 0.0)
            throw std::invalid_argument("conditional_sample: region {X < v} has zero probability");
        return quantile(rng.uniform() * below_mass);
    }
    const double above_mass = 1.0 - below_mass;
    if (above_mass <= 0.0)
        throw std::invalid_argument("conditional_sample: region {X >= v} has zero probability");
    return quantile(below_mass + rng.uniform() * above_mass);
}

UserPopulation::UserPopulation(std::vector<double> rates, RateModel model)
    : mean_rates(std::move(rates)), rate_model(std::move(model)) {
    if (mean_rates.empty()) throw std::invalid_argument("population needs at least one user");
    for (double r : mean_rates)
        if (!(r > 0.0) || !std::isfinite(r))
            throw std::invalid_argument("mean rates must be positive and finite");
}

double RateStream::sample_x(const RateModel& model, std::int64_t slot, std::size_t user) const {
    RandomStream rng = RandomStream::keyed(key_, static_cast<std::uint64_t>(slot),
                                           static_cast<std::uint64_t>(user));
    return model.sample(rng);
}

SlotRates RateStream::sample_slot_rates(const UserPopulation& pop, std::int64_t slot) const {
    SlotRates out;
    out.slot_index = slot;
    out.rates.resize(pop.size());
    for (std::size_t k = 0; k < pop.size(); ++k) {
        out.rates[k] = pop.mean_rates[k] * sample_x(pop.rate_model, slot, k);
    }
    return out;
}

}  // namespace probesched
