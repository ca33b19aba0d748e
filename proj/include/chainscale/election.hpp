#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "chainscale/errors.hpp"
#include "chainscale/types.hpp"
#include "chainscale/vrf.hpp"

namespace chainscale {

struct ScoreWeights {
    double alpha = 0.5;
    double beta = 0.3;
    double gamma = 0.2;
};

// s = alpha*P_m + beta*C_s - gamma*D. Weights must sum to 1.
double compute_score(const MinerRecord& record, const ScoreWeights& w);

// Percentile class: ties broken by ascending pk so the assignment is total.
// scores_and_pks is the full public population. Returns a class in [1, C].
int assign_class(double score, std::uint64_t pk,
                 const std::vector<std::pair<double, std::uint64_t>>& scores_and_pks,
                 int class_count);

// Pure rank -> class map used by both assign_class and the epoch election:
// rank 1 is the top of the (score desc, pk asc) order.
int class_of_rank(std::int64_t rank, std::int64_t population, int class_count);

// Per-committee per-class draw quotas, one row per sidechain in a fixed
// order. n[c][chain]; all rows sized class_count.
struct ClassQuota {
    std::vector<ChainId> chains;
    std::vector<std::vector<std::int64_t>> needed; // [chain][class-1]

    std::int64_t class_total(int klass) const {
        std::int64_t total = 0;
        for (const auto& row : needed) {
            if (klass < 1 || static_cast<std::size_t>(klass) > row.size())
                throw InvalidCounts("quota table does not cover this class");
            total += row[static_cast<std::size_t>(klass - 1)];
        }
        return total;
    }
};

struct ElectionResult {
    std::uint64_t pk = 0;
    double score = 0.0;
    int klass = 1;
    VrfOutput rnd1;
    VrfOutput rnd2;
    bool elected = false;
    std::optional<ChainId> assignment;
};

// The sidechains needing class-c members partition [0,1) in fixed order,
// each sub-range sized n_c,chain / n_c,all.
std::optional<ChainId> quota_range_assignment(double unit, int klass, const ClassQuota& quotas);

// One miner's local sortition: biased-coin election at rate
// n_c,all / mu_c, then range assignment across the sidechains needing
// class-c members. mu_c is the miner's class population.
ElectionResult elect(std::uint64_t seed1, std::uint64_t seed2, const VrfKeypair& key,
                     double score, int klass, std::int64_t class_population,
                     const ClassQuota& quotas);

// Re-derives class from the public scores, checks both VRF proofs, the
// threshold comparison, and the range assignment. False on any mismatch.
bool verify_election(const ElectionResult& result, std::uint64_t seed1, std::uint64_t seed2,
                     const std::vector<std::pair<double, std::uint64_t>>& scores_and_pks,
                     int class_count, std::int64_t class_population, const ClassQuota& quotas);

} // namespace chainscale
