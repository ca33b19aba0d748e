#include <doctest.h>

#include <cmath>
#include <set>
#include <vector>

#include "chainscale/numeric.hpp"
#include "chainscale/rng.hpp"

using namespace chainscale;

TEST_CASE("extended-exponent reals agree with doubles in range") {
    Rng rng(2718);
    for (int i = 0; i < 500; ++i) {
        const double a = std::exp(rng.next_normal(0.0, 40.0));
        const double b = std::exp(rng.next_normal(0.0, 40.0));
        const WideReal wa(a), wb(b);
        CHECK((wa * wb).to_double() == doctest::Approx(a * b).epsilon(1e-12));
        CHECK((wa / wb).to_double() == doctest::Approx(a / b).epsilon(1e-12));
        CHECK((wa + wb).to_double() == doctest::Approx(a + b).epsilon(1e-12));
    }
}

TEST_CASE("extended-exponent reals survive far outside the double range") {
    // binomial(10^4, 5*10^3) ~ 10^3008 overflows double; its log must match
    // the lgamma route and products of such values must stay exact in ratio
    const WideReal big = wide_binomial(10000, 5000);
    CHECK(big.log() == doctest::Approx(log_binomial(10000, 5000)).epsilon(1e-12));
    const WideReal sq = big * big;
    CHECK(sq.log() == doctest::Approx(2.0 * log_binomial(10000, 5000)).epsilon(1e-12));
    CHECK((sq / big).log() == doctest::Approx(big.log()).epsilon(1e-12));
    CHECK(std::isinf(sq.to_double())); // honest saturation when narrowing
    const WideReal tiny = WideReal::one() / sq;
    CHECK(tiny.to_double() == 0.0);
    CHECK((tiny * sq).to_double() == doctest::Approx(1.0).epsilon(1e-12));
    // absorbing additions keep the dominant term
    CHECK((big + tiny).log() == doctest::Approx(big.log()).epsilon(1e-12));
}

TEST_CASE("log-space binomial pmfs stay normalized at committee sizes") {
    for (double p : {0.05, 0.25, 0.5, 0.9}) {
        const auto pmf = binomial_pmf(747, p);
        CHECK(total_sum(pmf) == doctest::Approx(1.0).epsilon(1e-12));
    }
    const auto hyper = hypergeometric_pmf(100000, 25000, 747);
    CHECK(total_sum(hyper) == doctest::Approx(1.0).epsilon(1e-10));
}

TEST_CASE("rng streams are reproducible and well-behaved") {
    Rng a = Rng::stream(42, "test", {7});
    Rng b = Rng::stream(42, "test", {7});
    Rng c = Rng::stream(42, "test", {8});
    bool all_equal = true;
    bool any_diff_from_c = false;
    for (int i = 0; i < 1000; ++i) {
        const std::uint64_t va = a.next_u64();
        all_equal = all_equal && va == b.next_u64();
        any_diff_from_c = any_diff_from_c || va != c.next_u64();
    }
    CHECK(all_equal);
    CHECK(any_diff_from_c);

    Rng r(99);
    double sum = 0.0;
    for (int i = 0; i < 20000; ++i) {
        const double u = r.next_unit();
        CHECK(u >= 0.0);
        CHECK(u < 1.0);
        sum += u;
    }
    CHECK(sum / 20000.0 == doctest::Approx(0.5).epsilon(0.02));

    std::uint64_t counts[7] = {};
    for (int i = 0; i < 14000; ++i)
        ++counts[r.next_below(7)];
    for (std::uint64_t count : counts) {
        CHECK(count > 1700);
        CHECK(count < 2300);
    }

    double mean = 0.0, var = 0.0;
    const int n = 20000;
    std::vector<double> xs(n);
    for (int i = 0; i < n; ++i) {
        xs[i] = r.next_normal(5.0, 2.0);
        mean += xs[i];
    }
    mean /= n;
    for (double x : xs)
        var += (x - mean) * (x - mean);
    var /= n;
    CHECK(mean == doctest::Approx(5.0).epsilon(0.02));
    CHECK(var == doctest::Approx(4.0).epsilon(0.05));
}

TEST_CASE("distinct-index sampling is a permutation prefix") {
    Rng r(4);
    const auto picked = r.sample_indices(50, 20);
    CHECK(picked.size() == 20);
    std::set<std::uint32_t> unique(picked.begin(), picked.end());
    CHECK(unique.size() == 20);
    for (std::uint32_t v : picked)
        CHECK(v < 50);
    CHECK(r.sample_indices(5, 9).size() == 5); // clamped to the population
}
