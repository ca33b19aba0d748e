#include "chainscale/baselines.hpp"

#include <algorithm>

#include "chainscale/errors.hpp"

namespace chainscale {

namespace {

TrafficParams shard_traffic_params(const ScenarioConfig& cfg) {
    TrafficParams p;
    p.contracts = cfg.contracts;
    p.price_per_round = cfg.price_per_round;
    p.dispute_rate_per_epoch = cfg.dispute_rate;
    p.transfer_ratio = cfg.transfer_ratio;
    p.negotiation_mu = cfg.negotiation_mu;
    p.negotiation_sigma = cfg.negotiation_sigma;
    p.negotiation_clamp_max = cfg.negotiation_clamp_max;
    p.negotiation_msgs_per_round = cfg.negotiation_msgs_per_round;
    p.duration_min = cfg.duration_min;
    p.duration_max = cfg.duration_max;
    p.size_ask = cfg.size_ask;
    p.size_offer = cfg.size_offer;
    p.size_agreement = cfg.size_agreement;
    p.size_proof = cfg.size_proof;
    p.size_payment = cfg.size_payment;
    p.size_dispute = cfg.size_dispute;
    p.size_transfer = cfg.size_transfer;
    p.epoch_rounds = cfg.epoch_rounds;
    return p;
}

} // namespace

std::uint32_t assign_to_shard(TxId id, std::uint32_t num_shards, std::uint64_t seed) {
    if (num_shards == 0)
        throw InvalidCounts("at least one shard required");
    return static_cast<std::uint32_t>(digest64("shard-home", {seed, id}) % num_shards);
}

ShardedMarket::ShardedMarket(const ScenarioConfig& cfg, std::uint32_t num_shards,
                             bool keep_observations)
    : cfg_(cfg), num_shards_(num_shards), table_(default_module_table()),
      gen_(shard_traffic_params(cfg), table_, cfg.seed) {
    if (num_shards_ < 1)
        throw ConfigError("config key 'num_shards': must be at least 1");
    shards_.resize(num_shards_);
    for (std::uint32_t s = 0; s < num_shards_; ++s)
        shards_[s].shard_id = s;
    // every block ever produced stays on disk in this comparator
    metrics_ = std::make_unique<MetricsCollector>(cfg_.run_rounds, cfg_.seconds_per_round,
                                                  keep_observations, true);
    // genesis escrow records scatter uniformly, seeding the contract lineage
    for (std::uint64_t cid = 1; cid <= cfg_.contracts; ++cid) {
        const std::uint32_t home = assign_to_shard(digest64("escrow", {cid}), num_shards_,
                                                   cfg_.seed);
        escrow_shard_[cid] = home;
        record_shard_[cid] = home;
    }
}

std::vector<std::uint32_t> ShardedMarket::inputs_of(const Transaction& tx) const {
    std::vector<std::uint32_t> in;
    if (!tx.has_contract || tx.type == TxType::EscrowCreate || tx.type == TxType::Transfer)
        return in; // deposits and transfers spend account funds, not records
    auto rec = record_shard_.find(tx.contract_id);
    if (rec == record_shard_.end())
        return in; // nothing recorded for this contract yet
    in.push_back(rec->second);
    if (tx.type == TxType::ServicePayment) {
        auto esc = escrow_shard_.find(tx.contract_id);
        if (esc != escrow_shard_.end() && esc->second != rec->second)
            in.push_back(esc->second);
    }
    std::sort(in.begin(), in.end());
    in.erase(std::unique(in.begin(), in.end()), in.end());
    return in;
}

void ShardedMarket::forward(Transaction tx, std::uint32_t from, std::uint32_t to,
                            Round global_side, Round main_round,
                            std::vector<std::uint32_t> remaining_hops) {
    ++forwards_;
    metrics_->cross_chain_forward(
        main_round, ChainId{static_cast<ModuleId>(1), static_cast<std::uint16_t>(from)}, tx.id);
    if (!remaining_hops.empty())
        hop_plan_[tx.id] = std::move(remaining_hops);
    shards_[to].inbox.emplace_back(global_side + 1, std::move(tx));
}

void ShardedMarket::route(Transaction tx, Round main_round) {
    ++generated_;
    const Round global_side = main_round * cfg_.side_rounds_per_main;
    const std::uint32_t home = assign_to_shard(tx.id, num_shards_, cfg_.seed);
    // the transaction visits every shard holding one of its inputs and is
    // processed at the last stop
    std::vector<std::uint32_t> visits;
    for (std::uint32_t s : inputs_of(tx))
        if (s != home)
            visits.push_back(s);
    if (visits.empty()) {
        shards_[home].mempool.push_back(std::move(tx));
        return;
    }
    const std::uint32_t first = visits.front();
    visits.erase(visits.begin());
    forward(std::move(tx), home, first, global_side, main_round, std::move(visits));
}

void ShardedMarket::deliver_inbox(ShardState& shard, Round global_side, Round main_round) {
    while (!shard.inbox.empty() && shard.inbox.front().first <= global_side) {
        Transaction tx = std::move(shard.inbox.front().second);
        shard.inbox.pop_front();
        auto plan = hop_plan_.find(tx.id);
        if (plan == hop_plan_.end()) {
            shard.mempool.push_back(std::move(tx));
            continue;
        }
        const std::uint32_t next = plan->second.front();
        plan->second.erase(plan->second.begin());
        std::vector<std::uint32_t> rest = std::move(plan->second);
        hop_plan_.erase(plan);
        forward(std::move(tx), shard.shard_id, next, global_side, main_round, std::move(rest));
    }
}

void ShardedMarket::shard_round(ShardState& shard, Round main_round, Round side_index) {
    const Round global = main_round * cfg_.side_rounds_per_main + side_index;
    deliver_inbox(shard, global, main_round);
    std::uint64_t used = 0;
    std::uint64_t count = 0;
    const double frac = static_cast<double>(side_index + 1) /
                        static_cast<double>(cfg_.side_rounds_per_main);
    while (!shard.mempool.empty()) {
        const Transaction& head = shard.mempool.front();
        if (used + head.size_bytes > cfg_.side_block_bytes)
            break;
        Transaction tx = std::move(shard.mempool.front());
        shard.mempool.pop_front();
        used += tx.size_bytes;
        ++count;
        const double latency = static_cast<double>(main_round) + frac -
                               static_cast<double>(tx.created_round);
        metrics_->tx_confirmed(main_round,
                               ChainId{static_cast<ModuleId>(1),
                                       static_cast<std::uint16_t>(shard.shard_id)},
                               tx.id, latency, tx.size_bytes);
        // the confirmed record consolidates the contract's spent inputs here
        if (tx.has_contract) {
            if (tx.type == TxType::EscrowCreate) {
                escrow_shard_[tx.contract_id] = shard.shard_id;
            } else {
                record_shard_[tx.contract_id] = shard.shard_id;
                if (tx.type == TxType::ServicePayment)
                    escrow_shard_[tx.contract_id] = shard.shard_id;
            }
        }
    }
    ++shard.blocks;
    shard.block_bytes += used;
    metrics_->block_produced(main_round,
                             ChainId{static_cast<ModuleId>(1),
                                     static_cast<std::uint16_t>(shard.shard_id)},
                             used, count, count == 0);
}

MetricsReport ShardedMarket::run() {
    const Round hard_cap = cfg_.run_rounds * 30 + 2000;
    Round r = 0;
    for (;; ++r) {
        if (r > hard_cap)
            throw IncompleteRun("shard queues failed to drain within the round budget");
        const bool in_run = r < cfg_.run_rounds;
        if (in_run) {
            gen_.advance_contracts(r);
            for (auto& tx : gen_.gen_round_traffic(r))
                route(std::move(tx), r);
        }
        for (Round j = 0; j < cfg_.side_rounds_per_main; ++j) {
            for (auto& shard : shards_) {
                if (!in_run && shard.mempool.empty() && shard.inbox.empty())
                    continue;
                shard_round(shard, r, j);
            }
        }
        if (!in_run) {
            bool empty = true;
            for (const auto& shard : shards_)
                if (!shard.mempool.empty() || !shard.inbox.empty())
                    empty = false;
            if (empty)
                break;
        }
    }
    RunExternals ext;
    ext.generated = generated_;
    ext.rejected = 0;
    ext.drain_rounds = r + 1 - cfg_.run_rounds;
    metrics_->set_externals(ext);
    return metrics_->aggregate();
}

MetricsReport run_sharded_market(const ScenarioConfig& cfg, std::uint32_t num_shards) {
    ShardedMarket market(cfg, num_shards);
    return market.run();
}

} // namespace chainscale
