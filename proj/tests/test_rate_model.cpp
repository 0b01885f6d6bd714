#include <algorithm>
#include <cmath>
#include <vector>

#include "doctest.h"
#include "probesched/rate_model.hpp"

using namespace probesched;

namespace {

// independent oracle: E[(X - v)+] = integral of the survival function over
// [v, inf), evaluated by fixed-step Simpson on the cdf
double partial_expectation_by_quadrature(const RateModel& model, double v, double hi) {
    const int n = 20000;  // even
    const double h = (hi - v) / n;
    double acc = 0.0;
    for (int i = 0; i <= n; ++i) {
        const double x = v + i * h;
        const double f = 1.0 - model.cdf(x);
        const double w = (i == 0 || i == n) ? 1.0 : (i % 2 == 1 ? 4.0 : 2.0);
        acc += w * f;
    }
    return acc * h / 3.0;
}

RateModel two_atom_model() {
    return RateModel::discrete({{0.5, 0.5}, {1.5, 0.5}});
}

}  // namespace

TEST_CASE("exponential cdf closed form") {
    const RateModel m = RateModel::exponential();
    CHECK(m.cdf(0.0) == doctest::Approx(0.0));
    CHECK(m.cdf(-1.0) == 0.0);
    CHECK(m.cdf(1.0) == doctest::Approx(1.0 - std::exp(-1.0)).epsilon(1e-12));
    CHECK(m.cdf_left(1.0) == m.cdf(1.0));
}

TEST_CASE("uniform cdf") {
    const RateModel m = RateModel::uniform_0_2();
    CHECK(m.cdf(1.0) == doctest::Approx(0.5));
    CHECK(m.cdf(-0.1) == 0.0);
    CHECK(m.cdf(3.0) == 1.0);
}

TEST_CASE("discrete cdf left limits") {
    const RateModel m = two_atom_model();
    CHECK(m.cdf(0.5) == doctest::Approx(0.5));
    CHECK(m.cdf_left(0.5) == doctest::Approx(0.0));
    CHECK(m.cdf(1.5) == doctest::Approx(1.0));
    CHECK(m.cdf_left(1.5) == doctest::Approx(0.5));
}

TEST_CASE("partial expectation equals the unit mean at v = 0") {
    CHECK(RateModel::exponential().partial_expectation(0.0) ==
          doctest::Approx(1.0).epsilon(1e-12));
    CHECK(RateModel::uniform_0_2().partial_expectation(0.0) ==
          doctest::Approx(1.0).epsilon(1e-9));
    CHECK(two_atom_model().partial_expectation(0.0) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("partial expectation closed forms and quadrature oracle") {
    const RateModel expo = RateModel::exponential();
    CHECK(expo.partial_expectation(1.0) == doctest::Approx(std::exp(-1.0)).epsilon(1e-12));
    CHECK(expo.partial_expectation(10.0) == doctest::Approx(std::exp(-10.0)).epsilon(1e-9));
    CHECK(expo.partial_expectation(1.0) ==
          doctest::Approx(partial_expectation_by_quadrature(expo, 1.0, 60.0)).epsilon(1e-8));

    const RateModel uni = RateModel::uniform_0_2();
    for (double v : {0.0, 0.25, 0.5, 1.0, 1.5, 1.999}) {
        const double analytic = (2.0 - v) * (2.0 - v) / 4.0;
        CHECK(uni.partial_expectation(v) == doctest::Approx(analytic).epsilon(1e-9));
    }
    CHECK(uni.partial_expectation(2.0) == 0.0);
    CHECK(uni.partial_expectation(5.0) == 0.0);

    const RateModel disc = two_atom_model();
    CHECK(disc.partial_expectation(1.0) == doctest::Approx(0.25).epsilon(1e-12));
    CHECK(disc.partial_expectation(0.5) == doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("partial expectation is nonincreasing and vanishes") {
    for (const RateModel& m :
         {RateModel::exponential(), RateModel::uniform_0_2(), two_atom_model()}) {
        double prev = m.partial_expectation(0.0);
        for (double v = 0.1; v <= 12.0; v += 0.1) {
            const double cur = m.partial_expectation(v);
            CHECK(cur <= prev + 1e-12);
            prev = cur;
        }
        CHECK(m.partial_expectation(40.0) <= 1e-9);
    }
}

TEST_CASE("sampling is deterministic and keyed by slot and user") {
    const UserPopulation pop({1.0, 2.0, 3.0}, RateModel::exponential());
    const RateStream a(1234);
    const RateStream b(1234);
    const SlotRates ra = a.sample_slot_rates(pop, 17);
    const SlotRates rb = b.sample_slot_rates(pop, 17);
    CHECK(ra.rates == rb.rates);
    // a different slot or user gives a different draw
    CHECK(a.sample_x(pop.rate_model, 17, 0) != a.sample_x(pop.rate_model, 18, 0));
    CHECK(a.sample_x(pop.rate_model, 17, 0) != a.sample_x(pop.rate_model, 17, 1));
    // replications are independent streams
    const RateStream c(1234, 1);
    CHECK(c.sample_slot_rates(pop, 17).rates != ra.rates);
}

TEST_CASE("degenerate unit atom reproduces the mean rates") {
    const RateModel unit = RateModel::discrete({{1.0, 1.0}});
    const UserPopulation pop({1.0, 2.0}, unit);
    const SlotRates r = RateStream(7).sample_slot_rates(pop, 1);
    CHECK(r.rates[0] == doctest::Approx(1.0));
    CHECK(r.rates[1] == doctest::Approx(2.0));
}

TEST_CASE("exponential sample mean is 1 over a million draws") {
    const RateModel m = RateModel::exponential();
    RandomStream rng = RandomStream::keyed(99, 1);
    const int n = 1000000;
    double sum = 0.0;
    for (int i = 0; i < n; ++i) sum += m.sample(rng);
    CHECK(sum / n == doctest::Approx(1.0).epsilon(0.005));
}

TEST_CASE("empirical cdf matches within a KS distance of 0.01") {
    for (const RateModel& m :
         {RateModel::exponential(), RateModel::uniform_0_2(), two_atom_model()}) {
        RandomStream rng = RandomStream::keyed(5, 77);
        const int n = 100000;
        std::vector<double> xs(n);
        for (double& x : xs) x = m.sample(rng);
        std::sort(xs.begin(), xs.end());
        double ks = 0.0;
        std::size_t i = 0;
        while (i < xs.size()) {
            std::size_t j = i;
            while (j + 1 < xs.size() && xs[j + 1] == xs[i]) ++j;
            ks = std::max(ks, std::abs(m.cdf(xs[i]) - (j + 1.0) / n));
            ks = std::max(ks, std::abs(m.cdf_left(xs[i]) - static_cast<double>(i) / n));
            i = j + 1;
        }
        CHECK(ks <= 0.01);
    }
}

TEST_CASE("conditional sampling stays in the region") {
    for (const RateModel& m :
         {RateModel::exponential(), RateModel::uniform_0_2(), two_atom_model()}) {
        RandomStream rng = RandomStream::keyed(11, 3);
        for (double v : {0.2, 0.5, 1.0, 1.4}) {
            for (int i = 0; i < 2000; ++i) {
                if (m.cdf_left(v) > 0.0) CHECK(m.conditional_sample(Region::below, v, rng) < v);
                if (m.cdf_left(v) < 1.0) CHECK(m.conditional_sample(Region::above, v, rng) >= v);
            }
        }
    }
}

TEST_CASE("conditioning above zero is no conditioning at all") {
    const RateModel m = RateModel::exponential();
    RandomStream a = RandomStream::keyed(42);
    RandomStream b = RandomStream::keyed(42);
    for (int i = 0; i < 100; ++i) {
        CHECK(m.conditional_sample(Region::above, 0.0, a) == m.sample(b));
    }
}

TEST_CASE("truncated exponential mean below 1") {
    // E[X | X < 1] = (1 - 2/e) / (1 - 1/e)
    const double analytic = (1.0 - 2.0 * std::exp(-1.0)) / (1.0 - std::exp(-1.0));
    const RateModel m = RateModel::exponential();

    RandomStream rng = RandomStream::keyed(8, 15);
    const int n = 1000000;
    double sum = 0.0;
    for (int i = 0; i < n; ++i) sum += m.conditional_sample(Region::below, 1.0, rng);
    CHECK(sum / n == doctest::Approx(analytic).epsilon(0.005));

    // rejection oracle for the same quantity
    RandomStream rej = RandomStream::keyed(8, 16);
    double rsum = 0.0;
    int accepted = 0;
    while (accepted < 200000) {
        const double x = m.sample(rej);
        if (x < 1.0) {
            rsum += x;
            ++accepted;
        }
    }
    CHECK(rsum / accepted == doctest::Approx(analytic).epsilon(0.01));
}

TEST_CASE("discrete conditioning above picks the only qualifying atom") {
    const RateModel m = two_atom_model();
    RandomStream rng = RandomStream::keyed(21);
    for (int i = 0; i < 200; ++i) CHECK(m.conditional_sample(Region::above, 1.0, rng) == 1.5);
}

TEST_CASE("zero-probability regions are rejected") {
    RandomStream rng = RandomStream::keyed(3);
    CHECK_THROWS_AS(RateModel::exponential().conditional_sample(Region::below, 0.0, rng),
                    std::invalid_argument);
    CHECK_THROWS_AS(RateModel::uniform_0_2().conditional_sample(Region::above, 2.5, rng),
                    std::invalid_argument);
    CHECK_THROWS_AS(two_atom_model().conditional_sample(Region::below, 0.4, rng),
                    std::invalid_argument);
}

TEST_CASE("model and population validation") {
    CHECK_THROWS_AS(RateModel::discrete({}), std::invalid_argument);
    CHECK_THROWS_AS(RateModel::discrete({{0.5, 0.5}, {2.0, 0.5}}), std::invalid_argument);
    CHECK_THROWS_AS(RateModel::discrete({{0.5, 0.4}, {1.5, 0.5}}), std::invalid_argument);
    CHECK_THROWS_AS(RateModel::discrete({{-0.5, 0.5}, {2.5, 0.5}}), std::invalid_argument);
    CHECK_THROWS_AS(RateModel::discrete({{1.0, 0.0}, {1.0, 1.0}}), std::invalid_argument);
    CHECK_THROWS_AS(UserPopulation({1.0, 0.0}, RateModel::exponential()),
                    std::invalid_argument);
    CHECK_THROWS_AS(UserPopulation({}, RateModel::exponential()), std::invalid_argument);
    CHECK_NOTHROW(RateModel::discrete({{0.1, 0.25}, {0.7, 0.25}, {1.3, 0.25}, {1.9, 0.25}}));
}
