#include "chainscale/failure_math.hpp"

#include <algorithm>
#include <cstddef>

#include "chainscale/errors.hpp"
#include "chainscale/numeric.hpp"

namespace chainscale {

namespace {

void check_class_args(std::size_t n_classes, std::size_t p_classes) {
    if (n_classes == 0 || n_classes != p_classes)
        throw InvalidCounts("per-class counts and rates must be nonempty and equally sized");
}

std::vector<WideReal> wide_power(std::vector<WideReal> base, std::int64_t e) {
    std::vector<WideReal> acc{WideReal::one()};
    while (e > 0) {
        if (e & 1)
            acc = convolve(acc, base);
        e >>= 1;
        if (e > 0)
            base = convolve(base, base);
    }
    return acc;
}

} // namespace

std::vector<double> misbehaving_distribution_weighted(const std::vector<std::int64_t>& n,
                                                      const std::vector<double>& p) {
    check_class_args(n.size(), p.size());
    std::vector<double> dist{1.0};
    for (std::size_t i = 0; i < n.size(); ++i) {
        if (p[i] < 0.0 || p[i] > 1.0)
            throw InvalidProbability("class rate outside [0,1]");
        if (n[i] < 0)
            throw InvalidCounts("negative class draw count");
        if (n[i] == 0)
            continue;
        dist = convolve(dist, binomial_pmf(n[i], p[i]));
    }
    return dist;
}

std::vector<double> misbehaving_distribution_hypergeometric(std::int64_t mu,
                                                            const std::vector<std::int64_t>& m,
                                                            const std::vector<std::int64_t>& n) {
    check_class_args(n.size(), m.size());
    std::vector<double> dist{1.0};
    for (std::size_t i = 0; i < n.size(); ++i) {
        if (m[i] < 0 || m[i] > mu || n[i] < 0 || n[i] > mu)
            throw InvalidCounts("hypergeometric class parameters inconsistent with population");
        if (n[i] == 0)
            continue;
        dist = convolve(dist, hypergeometric_pmf(mu, m[i], n[i]));
    }
    return dist;
}

double committee_failure_weighted(const std::vector<std::int64_t>& n,
                                  const std::vector<double>& p,
                                  std::int64_t theta_l) {
    const auto dist = misbehaving_distribution_weighted(n, p);
    if (theta_l < 0)
        theta_l = 0;
    return tail_sum(dist, static_cast<std::size_t>(theta_l));
}

double committee_failure_exact_hypergeometric(std::int64_t mu,
                                              const std::vector<std::int64_t>& m,
                                              const std::vector<std::int64_t>& n,
                                              std::int64_t theta_l) {
    const auto dist = misbehaving_distribution_hypergeometric(mu, m, n);
    if (theta_l < 0)
        theta_l = 0;
    return tail_sum(dist, static_cast<std::size_t>(theta_l));
}

double autorecovery_failure(std::int64_t n_total,
                            std::int64_t m_misbehaving,
                            std::int64_t committee_size,
                            std::int64_t kappa,
                            std::int64_t theta_l) {
    if (committee_size <= 0 || kappa < 0 || theta_l < 0)
        throw InvalidCounts("committee size must be positive, kappa and theta_l nonnegative");
    if (m_misbehaving < 0 || m_misbehaving > n_total)
        throw InvalidCounts("misbehaving count outside population");
    const std::int64_t pool = (kappa + 1) * committee_size;
    if (pool > n_total)
        throw InvalidCounts("population too small for kappa+1 disjoint committees");
    if (theta_l > committee_size)
        return 0.0; // no committee can fail
    if (m_misbehaving == 0)
        return theta_l == 0 ? 1.0 : 0.0;

    // Base polynomial: committee tail coefficients C(S, i) y^i, i in [theta, S].
    std::vector<WideReal> base(static_cast<std::size_t>(committee_size) + 1);
    for (std::int64_t i = theta_l; i <= committee_size; ++i)
        base[static_cast<std::size_t>(i)] = wide_binomial(committee_size, i);
    const std::vector<WideReal> psi = wide_power(std::move(base), kappa + 1);

    const double log_denom_pool = log_binomial(n_total, pool);
    WideReal acc = WideReal::zero();
    const std::int64_t lo = (kappa + 1) * theta_l;
    const std::int64_t hi = std::min(pool, m_misbehaving);
    for (std::int64_t i = lo; i <= hi; ++i) {
        if (pool - i > n_total - m_misbehaving)
            continue;
        const WideReal coeff = psi[static_cast<std::size_t>(i)];
        if (coeff.is_zero())
            continue;
        // hypergeometric weight of drawing i misbehaving into the pool,
        // times the fraction of placements that fail every committee
        const WideReal weight = WideReal::from_log(
            log_binomial(m_misbehaving, i) +
            log_binomial(n_total - m_misbehaving, pool - i) - log_denom_pool);
        const WideReal placements = wide_binomial(pool, i);
        acc += weight * (coeff / placements);
    }
    const double result = acc.to_double();
    return std::min(result, 1.0);
}

double chainscale_autorecovery_bound(std::int64_t k, double per_sidechain_failure) {
    if (k < 1)
        throw InvalidCounts("at least one sidechain required");
    if (per_sidechain_failure < 0.0)
        throw InvalidProbability("negative failure probability");
    const double bound = static_cast<double>(k) * per_sidechain_failure;
    return bound < 1.0 ? bound : 1.0;
}

std::vector<std::int64_t> derive_quotas(const std::vector<double>& p,
                                        std::int64_t committee_size,
                                        double target_failure,
                                        std::int64_t theta_l,
                                        std::int64_t max_per_class) {
    if (p.empty())
        throw InvalidCounts("no classes");
    if (committee_size <= 0)
        throw InvalidCounts("committee size must be positive");
    for (double rate : p)
        if (rate < 0.0 || rate > 1.0)
            throw InvalidProbability("class rate outside [0,1]");
    const std::int64_t cap =
        max_per_class < 0 ? committee_size : std::min(max_per_class, committee_size);

    const std::size_t classes = p.size();
    std::vector<std::size_t> by_rate(classes);
    for (std::size_t i = 0; i < classes; ++i)
        by_rate[i] = i;
    std::stable_sort(by_rate.begin(), by_rate.end(),
                     [&](std::size_t a, std::size_t b) { return p[a] < p[b]; });

    // Balanced start; the remainder goes to the lowest-rate classes.
    std::vector<std::int64_t> n(classes, committee_size / static_cast<std::int64_t>(classes));
    std::int64_t rem = committee_size % static_cast<std::int64_t>(classes);
    for (std::size_t k = 0; k < classes && rem > 0; ++k, --rem)
        ++n[by_rate[k]];

    auto current_failure = [&] { return committee_failure_weighted(n, p, theta_l); };

    while (current_failure() > target_failure) {
        // take from the worst populated class, give to the best class with room
        std::size_t give = classes;
        for (std::size_t k = classes; k-- > 0;) {
            if (n[by_rate[k]] > 0 && k > 0) {
                give = by_rate[k];
                break;
            }
        }
        std::size_t take = classes;
        for (std::size_t k = 0; k < classes; ++k) {
            if (n[by_rate[k]] < cap && (give == classes || by_rate[k] != give) &&
                p[by_rate[k]] < (give == classes ? 2.0 : p[give])) {
                take = by_rate[k];
                break;
            }
        }
        if (give == classes || take == classes)
            throw Infeasible("no composition of this committee size meets the failure target");
        --n[give];
        ++n[take];
    }
    return n;
}

} // namespace chainscale
