#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <set>
#include <string>
#include <vector>

#include "chainscale/chains.hpp"
#include "chainscale/config.hpp"
#include "chainscale/metrics.hpp"
#include "chainscale/recovery.hpp"
#include "chainscale/sortition.hpp"
#include "chainscale/traffic.hpp"

namespace chainscale {

// Epoch/round scheduler: election -> traffic -> meta-blocks -> main block ->
// sync confirmation -> prune -> heavy detection -> next-epoch allocation,
// then queue drain with no fresh traffic so every confirmation completes.
class Simulation {
public:
    struct Options {
        bool single_sidechain = false; // comparator: all service types on one chain
        bool keep_observations = false;
        bool prune_enabled = true;
    };

    explicit Simulation(const ScenarioConfig& cfg);
    Simulation(const ScenarioConfig& cfg, Options options);

    MetricsReport run();

    const MainchainState& mainchain() const { return main_; }
    const TrafficGenerator& traffic() const { return gen_; }
    const std::map<ChainId, SidechainState>& sidechains() const { return chains_; }
    const ModuleTable& table() const { return table_; }
    MetricsCollector& metrics() { return *metrics_; }
    std::uint64_t cross_chain_pending() const { return cross_pending_; }
    std::uint64_t syncs_issued() const { return syncs_issued_; }
    const std::map<ModuleId, std::uint32_t>& chain_counts() const { return chain_count_; }

    // Rebuilds the mainchain summary state from genesis plus the retained
    // meta-blocks; with pruning disabled this must reproduce state_vars.
    std::map<ContractId, ContractVars> recompute_state_from_metas() const;

    // Ledger snapshot: one row per block with sizes, for the storage metric.
    void export_ledger_csv(const std::string& path) const;

private:
    struct PendingSync {
        SyncTransaction payload;
        Round included_round = -1; // -1: still in the mempool
        bool confirmed = false;
    };

    void bootstrap();
    void route_transaction(Transaction tx);
    std::uint16_t pick_subchain(ModuleId module, const Transaction& tx) const;
    void run_side_round(Round main_round, Round side_index);
    void update_gating(Round global_side_round);
    void produce_on_chain(SidechainState& sc, Round main_round, Round side_index);
    void finalize_block_txs(const MetaBlock& block, Round main_round, Round side_index);
    void main_round_block(Round round);
    void confirm_syncs(Round round);
    void epoch_boundary(Round round, bool forced);
    void issue_module_sync(ModuleId module, Epoch epoch, Round round);
    void elect_epoch_committees(Epoch next_epoch, Round round);
    void apply_scripted_round_events(Round round);
    bool scripted_leader_failure(const SidechainState& sc, Round main_round) const;
    void apply_rollback(Round round, int depth);
    void replay_mainchain();
    std::vector<SidechainState*> module_chains(ModuleId module);
    std::vector<const SidechainState*> module_chains(ModuleId module) const;
    bool drained() const;
    bool fully_synced() const;
    std::uint64_t persistent_summary_bytes(const SummaryBlock& s) const;

    ScenarioConfig cfg_;
    Options options_;
    ModuleTable table_;
    std::vector<ModuleId> module_priority_; // allocation order
    MinerPopulation pop_;
    std::vector<MinerBehavior> behavior_of_;
    TrafficGenerator gen_;
    MainchainState main_;
    std::map<ChainId, SidechainState> chains_;
    std::map<ModuleId, std::uint32_t> chain_count_;
    std::map<ModuleId, Epoch> issued_through_;      // newest epoch covered by a live sync
    std::map<ModuleId, Epoch> newest_content_epoch_;
    std::map<ModuleId, std::uint32_t> pending_request_; // heavy requests for next epoch
    std::map<std::uint64_t, PendingSync> syncs_;        // by payload id
    std::map<ModuleId, std::map<ContractId, std::uint32_t>> pending_cids_;
    std::unique_ptr<MetricsCollector> metrics_;
    DependencyGraph deps_;
    Epoch current_epoch_ = 0;
    std::uint64_t cross_pending_ = 0;
    std::uint64_t rejected_ = 0;
    std::uint64_t generated_ = 0;
    std::uint64_t syncs_issued_ = 0;
    std::set<TxId> reconfirmable_; // rolled-back mainchain txs
    std::map<std::pair<ChainId, Epoch>, std::uint32_t> failover_episodes_;
    bool drain_mode_ = false;
    Round last_round_ = 0;
};

MetricsReport run_experiment(const ScenarioConfig& cfg);
MetricsReport run_single_sidechain(const ScenarioConfig& cfg);

} // namespace chainscale
