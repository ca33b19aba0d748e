#pragma once

#include <cstdint>
#include <map>
#include <vector>

#include "chainscale/election.hpp"
#include "chainscale/rng.hpp"
#include "chainscale/types.hpp"
#include "chainscale/vrf.hpp"

namespace chainscale {

// The miner population of one run. Mining power and dispute history are
// seeded once; participation accrues as committees serve.
class MinerPopulation {
public:
    MinerPopulation() = default;

    static MinerPopulation create(std::uint32_t count, std::uint64_t seed, double p_lazy,
                                  double p_malicious);

    std::size_t size() const { return records_.size(); }
    std::vector<MinerRecord>& records() { return records_; }
    const std::vector<MinerRecord>& records() const { return records_; }
    const VrfKeypair& key(MinerIndex i) const { return keys_[i]; }

    void recompute_scores(const ScoreWeights& w);

    // Ranks all miners (score desc, pk asc) and stores the class on each
    // record. Returns per-class populations.
    std::vector<std::int64_t> assign_classes(int class_count);

    std::vector<std::pair<double, std::uint64_t>> public_scores() const;

    MinerIndex index_of_pk(std::uint64_t pk) const;

private:
    std::vector<MinerRecord> records_;
    std::vector<VrfKeypair> keys_;
    std::map<std::uint64_t, MinerIndex> pk_index_;
};

struct EpochCommittees {
    // primary first, then backups by rank
    std::map<ChainId, std::vector<Committee>> by_chain;
};

// Full epoch election: local sortition per miner, verification, then
// deterministic trim/backfill by pk order so every committee lands exactly on
// its per-class quota. Draws kappa+1 committees per chain.
EpochCommittees run_epoch_election(MinerPopulation& pop, const ClassQuota& per_committee,
                                   int kappa, int class_count, std::uint64_t seed1,
                                   std::uint64_t seed2);

// Composition helpers for building quotas.
std::vector<std::int64_t> balanced_composition(std::int64_t committee_size, int class_count);
// top_share of the seats from class 1, the rest split evenly below.
std::vector<std::int64_t> plurality_composition(std::int64_t committee_size, int class_count,
                                                double top_share);

// Sync committee over a heavy module's sub-committees: drawn from the union
// of members with per-class proportions matching the aggregate composition.
Committee elect_sync_committee(const std::vector<Committee>& sub_committees,
                               const MinerPopulation& pop, std::size_t size, Rng& rng);

} // namespace chainscale
