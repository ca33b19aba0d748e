#pragma once

#include <cstdint>
#include <deque>
#include <map>
#include <memory>
#include <vector>

#include "chainscale/config.hpp"
#include "chainscale/metrics.hpp"
#include "chainscale/rng.hpp"
#include "chainscale/traffic.hpp"
#include "chainscale/types.hpp"

namespace chainscale {

// Randomly sharded comparator: uniform transaction placement, cross-shard
// inputs resolved by inter-committee forwarding, no pruning.
struct ShardState {
    std::uint32_t shard_id = 0;
    std::uint64_t blocks = 0;
    std::uint64_t block_bytes = 0; // never pruned
    std::deque<Transaction> mempool;
    std::deque<std::pair<Round, Transaction>> inbox; // (arrival side-round, tx)
};

std::uint32_t assign_to_shard(TxId id, std::uint32_t num_shards, std::uint64_t seed);

class ShardedMarket {
public:
    ShardedMarket(const ScenarioConfig& cfg, std::uint32_t num_shards,
                  bool keep_observations = false);

    MetricsReport run();

    // input shards of a transaction under contract lineage
    std::vector<std::uint32_t> inputs_of(const Transaction& tx) const;

    const std::vector<ShardState>& shards() const { return shards_; }
    const TrafficGenerator& traffic() const { return gen_; }
    MetricsCollector& metrics() { return *metrics_; }

private:
    void route(Transaction tx, Round main_round);
    void deliver_inbox(ShardState& shard, Round global_side, Round main_round);
    void shard_round(ShardState& shard, Round main_round, Round side_index);
    void forward(Transaction tx, std::uint32_t from, std::uint32_t to, Round global_side,
                 Round main_round, std::vector<std::uint32_t> remaining_hops);

    ScenarioConfig cfg_;
    std::uint32_t num_shards_;
    ModuleTable table_;
    TrafficGenerator gen_;
    std::vector<ShardState> shards_;
    std::map<ContractId, std::uint32_t> record_shard_; // latest service record
    std::map<ContractId, std::uint32_t> escrow_shard_;
    std::map<TxId, std::vector<std::uint32_t>> hop_plan_; // inputs left to visit
    std::unique_ptr<MetricsCollector> metrics_;
    std::uint64_t generated_ = 0;
    std::uint64_t forwards_ = 0;
};

MetricsReport run_sharded_market(const ScenarioConfig& cfg, std::uint32_t num_shards);

} // namespace chainscale
