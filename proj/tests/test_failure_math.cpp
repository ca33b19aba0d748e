#include <doctest.h>

#include <cmath>
#include <functional>
#include <vector>

#include "chainscale/errors.hpp"
#include "chainscale/failure_math.hpp"
#include "chainscale/numeric.hpp"

using namespace chainscale;

#include "oracles.hpp"

TEST_CASE("weighted failure equals brute-force enumeration on small tuples") {
    CHECK(committee_failure_weighted({2, 2}, {0.5, 0.5}, 3) ==
          doctest::Approx(5.0 / 16.0).epsilon(1e-12));

    const std::vector<std::vector<std::int64_t>> ns = {
        {3}, {5}, {2, 2}, {4, 3}, {1, 5}, {3, 3, 3}, {2, 4, 6}, {5, 4, 3}};
    const std::vector<std::vector<double>> ps = {
        {0.0}, {1.0}, {0.3}, {0.5, 0.25}, {0.15, 0.9}, {0.1, 0.5, 0.9}};
    for (const auto& n : ns) {
        std::int64_t total = 0;
        for (auto v : n)
            total += v;
        if (total > 12)
            continue;
        for (const auto& p0 : ps) {
            std::vector<double> p(n.size());
            for (std::size_t i = 0; i < n.size(); ++i)
                p[i] = p0[i % p0.size()];
            for (std::int64_t theta = 0; theta <= total + 1; ++theta) {
                const double expect = oracles::weighted_failure(n, p, theta);
                const double got = committee_failure_weighted(n, p, theta);
                CHECK(std::fabs(expect - got) <= 1e-12);
            }
        }
    }
}

TEST_CASE("weighted failure edge cases") {
    CHECK(committee_failure_weighted({10}, {0.0}, 1) == 0.0);
    CHECK(committee_failure_weighted({10}, {0.0}, 5) == 0.0);
    CHECK_THROWS_AS(committee_failure_weighted({5}, {1.5}, 2), InvalidProbability);
}

TEST_CASE("hypergeometric failure equals subset enumeration on small tuples") {
    CHECK(committee_failure_exact_hypergeometric(5, {2}, {2}, 2) ==
          doctest::Approx(0.1).epsilon(1e-12));
    for (std::int64_t mu : {5, 8, 11}) {
        for (std::int64_t m = 0; m <= mu; m += 2) {
            for (std::int64_t n = 1; n <= std::min<std::int64_t>(mu, 6); ++n) {
                for (std::int64_t theta = 0; theta <= n + 1; ++theta) {
                    const double expect = oracles::hyper_failure(mu, m, n, theta);
                    const double got =
                        committee_failure_exact_hypergeometric(mu, {m}, {n}, theta);
                    CHECK(std::fabs(expect - got) <= 1e-12);
                }
            }
        }
    }
}

TEST_CASE("drawing a whole class is a point mass") {
    const auto dist = misbehaving_distribution_hypergeometric(10, {4}, {10});
    for (std::size_t x = 0; x < dist.size(); ++x) {
        if (x == 4)
            CHECK(dist[x] == doctest::Approx(1.0).epsilon(1e-12));
        else
            CHECK(dist[x] == doctest::Approx(0.0).epsilon(1e-12));
    }
}

TEST_CASE("binomial and hypergeometric calculators agree on the failure tail") {
    const std::vector<std::int64_t> n = {747};
    // sampling without replacement narrows the distribution; the absolute
    // gap at the 1e-3 tail shrinks roughly with n/mu (measured 2.1e-4 at
    // mu=2e4, 4.4e-5 at mu=1e5, 4.5e-6 at mu=1e6)
    for (std::int64_t mu : {100000L, 1000000L}) {
        for (std::int64_t theta : {224, 235, 249}) {
            const double b = committee_failure_weighted(n, {0.25}, theta);
            const double h = committee_failure_exact_hypergeometric(mu, {mu / 4}, n, theta);
            CHECK(std::fabs(b - h) <= 1e-4);
        }
    }
    // closer in, agreement is relative rather than absolute
    const double b = committee_failure_weighted(n, {0.25}, 224);
    const double h = committee_failure_exact_hypergeometric(20000, {5000}, n, 224);
    CHECK(std::fabs(b - h) / b < 0.25);
}

TEST_CASE("both misbehaving-count distributions are normalized") {
    const auto w = misbehaving_distribution_weighted({349, 249, 149}, {0.15, 0.25, 0.35});
    CHECK(std::fabs(total_sum(w) - 1.0) <= 1e-9);
    const auto h = misbehaving_distribution_hypergeometric(100000, {25000, 10000}, {400, 347});
    CHECK(std::fabs(total_sum(h) - 1.0) <= 1e-9);
}

TEST_CASE("weighted failure is monotone in class rates and in the threshold") {
    const std::vector<std::int64_t> n = {40, 30, 30};
    const std::vector<double> base = {0.1, 0.2, 0.3};
    const double ref = committee_failure_weighted(n, base, 30);
    for (std::size_t i = 0; i < base.size(); ++i) {
        auto bumped = base;
        bumped[i] += 0.1;
        CHECK(committee_failure_weighted(n, bumped, 30) >= ref);
    }
    double prev = 1.0 + 1e-12;
    for (std::int64_t theta = 0; theta <= 100; theta += 10) {
        const double f = committee_failure_weighted(n, base, theta);
        CHECK(f <= prev + 1e-12); // nonincreasing up to summation noise
        prev = f;
    }
}

TEST_CASE("the worked three-class committee reproduces its published failure probability") {
    // the 747-miner composition: random sortition fails around 1e-3 near
    // theta 224 while the weighted composition reaches 1.42e-12 at theta 249
    const double weighted =
        committee_failure_weighted({349, 249, 149}, {0.15, 0.25, 0.35}, 249);
    CHECK(weighted == doctest::Approx(1.42e-12).epsilon(0.01));
    const double random_committee =
        committee_failure_exact_hypergeometric(1000000, {250000}, {747}, 224);
    CHECK(random_committee > 5e-4);
    CHECK(random_committee < 2e-3);
}

TEST_CASE("autorecovery failure equals exhaustive committee enumeration") {
    CHECK(autorecovery_failure(6, 4, 3, 1, 2) == doctest::Approx(0.6).epsilon(1e-12));
    struct Case {
        std::int64_t n, s, kappa;
    };
    const std::vector<Case> cases = {{6, 3, 1}, {8, 2, 1}, {7, 3, 1}, {8, 4, 1},
                                     {6, 2, 2}, {9, 3, 2}, {8, 2, 3}};
    for (const auto& c : cases) {
        for (std::int64_t m = 0; m <= c.n; ++m) {
            for (std::int64_t theta = 1; theta <= c.s; ++theta) {
                const double expect = oracles::autorecovery_failure(c.n, m, c.s, c.kappa, theta);
                const double got = autorecovery_failure(c.n, m, c.s, c.kappa, theta);
                CHECK(std::fabs(expect - got) <= 1e-12);
            }
        }
    }
}

TEST_CASE("autorecovery edge cases and the single-committee reduction") {
    CHECK(autorecovery_failure(100, 0, 10, 3, 4) == 0.0);
    for (std::int64_t m : {0, 3, 8, 15}) {
        const double reduced = autorecovery_failure(20, m, 5, 0, 3);
        const double hyper = committee_failure_exact_hypergeometric(20, {m}, {5}, 3);
        CHECK(std::fabs(reduced - hyper) <= 1e-12);
    }
    CHECK_THROWS_AS(autorecovery_failure(10, 4, 5, 2, 3), InvalidCounts);
}

TEST_CASE("union bound over sidechains") {
    CHECK(chainscale_autorecovery_bound(1, 0.25) == 0.25);
    CHECK(chainscale_autorecovery_bound(4, 1e-6) == doctest::Approx(4e-6).epsilon(1e-12));
    CHECK(chainscale_autorecovery_bound(5, 0.3) == 1.0);
    CHECK_THROWS_AS(chainscale_autorecovery_bound(0, 0.5), InvalidCounts);
}

TEST_CASE("quota derivation meets the failure target greedily") {
    // vacuous target keeps the balanced split
    const auto balanced = derive_quotas({0.2, 0.3, 0.4}, 9, 1.0, 4);
    CHECK(balanced == std::vector<std::int64_t>{3, 3, 3});

    // single class: all seats or infeasible
    CHECK(derive_quotas({0.1}, 20, 0.9, 10) == std::vector<std::int64_t>{20});
    CHECK_THROWS_AS(derive_quotas({0.5}, 20, 1e-9, 5), Infeasible);

    // the worked composition target: result at least as safe as (349,249,149)
    const std::vector<double> rates = {0.15, 0.25, 0.35};
    const auto derived = derive_quotas(rates, 747, 1e-10, 224);
    std::int64_t total = 0;
    for (auto v : derived)
        total += v;
    CHECK(total == 747);
    const double derived_failure = committee_failure_weighted(derived, rates, 224);
    const double reference = committee_failure_weighted({349, 249, 149}, rates, 224);
    CHECK(derived_failure <= 1e-10);
    CHECK(derived_failure <= reference);
}
