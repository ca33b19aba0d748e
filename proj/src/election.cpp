#include "chainscale/election.hpp"

#include <algorithm>
#include <cmath>

#include "chainscale/errors.hpp"

namespace chainscale {

double compute_score(const MinerRecord& record, const ScoreWeights& w) {
    if (w.alpha < 0 || w.beta < 0 || w.gamma < 0 ||
        std::fabs(w.alpha + w.beta + w.gamma - 1.0) > 1e-12)
        throw InvalidWeights("score weights must be nonnegative and sum to 1");
    return w.alpha * record.mining_power + w.beta * static_cast<double>(record.participation) -
           w.gamma * static_cast<double>(record.disputes);
}

int class_of_rank(std::int64_t rank, std::int64_t population, int class_count) {
    // ceil(rank * C / N), clamped into [1, C]
    const std::int64_t c =
        (rank * static_cast<std::int64_t>(class_count) + population - 1) / population;
    return static_cast<int>(std::clamp<std::int64_t>(c, 1, class_count));
}

int assign_class(double score, std::uint64_t pk,
                 const std::vector<std::pair<double, std::uint64_t>>& scores_and_pks,
                 int class_count) {
    if (scores_and_pks.empty())
        throw EmptyPopulation("no scores to rank against");
    if (class_count < 1)
        throw InvalidCounts("at least one class required");
    // rank = 1 + number of miners strictly above in (score desc, pk asc) order
    std::int64_t above = 0;
    for (const auto& [s, other_pk] : scores_and_pks) {
        if (s > score || (s == score && other_pk < pk))
            ++above;
    }
    return class_of_rank(above + 1, static_cast<std::int64_t>(scores_and_pks.size()),
                         class_count);
}

std::optional<ChainId> quota_range_assignment(double unit, int klass,
                                              const ClassQuota& quotas) {
    const std::int64_t class_total = quotas.class_total(klass); // throws on a class gap
    if (class_total <= 0)
        return std::nullopt;
    std::int64_t cumulative = 0;
    for (std::size_t i = 0; i < quotas.chains.size(); ++i) {
        cumulative += quotas.needed[i][static_cast<std::size_t>(klass - 1)];
        if (unit < static_cast<double>(cumulative) / static_cast<double>(class_total))
            return quotas.chains[i];
    }
    return quotas.chains.empty() ? std::nullopt
                                 : std::optional<ChainId>(quotas.chains.back());
}

ElectionResult elect(std::uint64_t seed1, std::uint64_t seed2, const VrfKeypair& key,
                     double score, int klass, std::int64_t class_population,
                     const ClassQuota& quotas) {
    const std::int64_t n_all = quotas.class_total(klass);
    if (n_all > class_population)
        throw QuotaInfeasible("class quota exceeds class population");

    ElectionResult r;
    r.pk = key.pk();
    r.score = score;
    r.klass = klass;
    r.rnd1 = key.eval({seed1, key.pk()});

    // C(mu-1, n-1) / C(mu, n) = n / mu
    const double threshold = class_population > 0
        ? static_cast<double>(n_all) / static_cast<double>(class_population)
        : 0.0;
    r.elected = r.rnd1.unit() < threshold;
    if (r.elected) {
        r.rnd2 = key.eval({seed2, key.pk()});
        r.assignment = quota_range_assignment(r.rnd2.unit(), klass, quotas);
    }
    return r;
}

bool verify_election(const ElectionResult& result, std::uint64_t seed1, std::uint64_t seed2,
                     const std::vector<std::pair<double, std::uint64_t>>& scores_and_pks,
                     int class_count, std::int64_t class_population, const ClassQuota& quotas) {
    int klass = 0;
    try {
        klass = assign_class(result.score, result.pk, scores_and_pks, class_count);
    } catch (const std::exception&) {
        return false;
    }
    if (klass != result.klass)
        return false;
    if (!VrfKeypair::verify(result.pk, {seed1, result.pk}, result.rnd1))
        return false;

    std::int64_t n_all = 0;
    try {
        n_all = quotas.class_total(klass);
    } catch (const InvalidCounts&) {
        return false;
    }
    if (n_all > class_population)
        return false;
    const double threshold = class_population > 0
        ? static_cast<double>(n_all) / static_cast<double>(class_population)
        : 0.0;
    const bool should_be_elected = result.rnd1.unit() < threshold;
    if (should_be_elected != result.elected)
        return false;
    if (!result.elected)
        return !result.assignment.has_value();

    if (!VrfKeypair::verify(result.pk, {seed2, result.pk}, result.rnd2))
        return false;
    const auto expected = quota_range_assignment(result.rnd2.unit(), klass, quotas);
    return expected == result.assignment;
}

} // namespace chainscale
