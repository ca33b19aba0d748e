#pragma once

// Test-only brute-force oracles: literal nested sums and exhaustive draws,
// kept independent of the production calculators they cross-check.

#include <cmath>
#include <cstdint>
#include <functional>
#include <vector>

namespace chainscale::oracles {

// Literal nested-sum oracle over all per-class outcome vectors.
inline double weighted_failure(const std::vector<std::int64_t>& n, const std::vector<double>& p,
                               std::int64_t theta) {
    double fail = 0.0;
    std::function<void(std::size_t, double, std::int64_t)> rec =
        [&](std::size_t i, double prob, std::int64_t total) {
            if (i == n.size()) {
                if (total >= theta)
                    fail += prob;
                return;
            }
            for (std::int64_t xi = 0; xi <= n[i]; ++xi) {
                double term = 1.0;
                for (std::int64_t j = 0; j < xi; ++j)
                    term *= p[i] * static_cast<double>(n[i] - j) / static_cast<double>(j + 1);
                term *= std::pow(1.0 - p[i], static_cast<double>(n[i] - xi));
                rec(i + 1, prob * term, total + xi);
            }
        };
    rec(0, 1.0, 0);
    return fail;
}

// Exhaustive n-subset enumeration for one hypergeometric class; the first m
// population members misbehave.
inline double hyper_failure(std::int64_t mu, std::int64_t m, std::int64_t n, std::int64_t theta) {
    double fail = 0.0, total = 0.0;
    std::function<void(std::int64_t, std::int64_t, std::int64_t)> rec =
        [&](std::int64_t start, std::int64_t chosen, std::int64_t bad) {
            if (chosen == n) {
                total += 1.0;
                if (bad >= theta)
                    fail += 1.0;
                return;
            }
            for (std::int64_t v = start; v < mu; ++v)
                rec(v + 1, chosen + 1, bad + (v < m ? 1 : 0));
        };
    rec(0, 0, 0);
    return fail / total;
}

// Exhaustive enumeration of every way to seat kappa+1 disjoint committees.
inline double autorecovery_failure(std::int64_t n_total, std::int64_t m, std::int64_t s,
                                   std::int64_t kappa, std::int64_t theta) {
    double fail = 0.0, total = 0.0;
    std::vector<bool> used(static_cast<std::size_t>(n_total), false);
    std::function<void(std::int64_t, bool)> draw_committees = [&](std::int64_t k, bool all_bad) {
        if (k == kappa + 1) {
            total += 1.0;
            if (all_bad)
                fail += 1.0;
            return;
        }
        std::vector<std::int64_t> unused;
        for (std::int64_t i = 0; i < n_total; ++i)
            if (!used[static_cast<std::size_t>(i)])
                unused.push_back(i);
        std::vector<std::int64_t> pick;
        std::function<void(std::size_t, std::int64_t)> rec = [&](std::size_t start,
                                                                 std::int64_t bad) {
            if (static_cast<std::int64_t>(pick.size()) == s) {
                draw_committees(k + 1, all_bad && bad >= theta);
                return;
            }
            for (std::size_t v = start; v < unused.size(); ++v) {
                used[static_cast<std::size_t>(unused[v])] = true;
                pick.push_back(unused[v]);
                rec(v + 1, bad + (unused[v] < m ? 1 : 0));
                pick.pop_back();
                used[static_cast<std::size_t>(unused[v])] = false;
            }
        };
        rec(0, 0);
    };
    draw_committees(0, true);
    return fail / total;
}

} // namespace chainscale::oracles
