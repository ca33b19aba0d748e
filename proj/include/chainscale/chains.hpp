#pragma once

#include <cstdint>
#include <deque>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <vector>

#include "chainscale/types.hpp"

namespace chainscale {

// Carrier for an epoch's summaries; one sync-transaction may cover several
// epochs after an interruption (mass-syncing).
struct SyncTransaction {
    ModuleId module = 0;
    Epoch epoch = 0; // newest epoch covered
    std::vector<SummaryBlock> summaries; // ascending epoch order
    std::uint64_t issuer_pk = 0;
    std::uint64_t payload_id = 0;
    std::uint32_t requested_subchains = 1;

    std::size_t entry_count() const {
        std::size_t n = 0;
        for (const auto& s : summaries)
            n += s.entries.size();
        return n;
    }
};

struct SidechainState {
    ChainId id;
    Epoch epoch = 0;
    std::deque<Transaction> mempool;
    std::vector<MetaBlock> meta_blocks;       // pruned once the epoch's sync confirms
    std::vector<SummaryBlock> summary_blocks; // permanent
    std::vector<Committee> committees;        // primary first, then backups
    std::size_t active_committee = 0;
    bool exhausted = false; // every committee of this epoch failed
    bool gated = false;
    Round last_block_round = -1; // global sidechain round of the newest block
    Epoch pruned_through = -1;
    bool heavy = false;
    std::uint32_t requested_subchains = 1;
    std::uint64_t mempool_bytes = 0;
    // per-epoch production stats for heavy detection
    std::uint64_t blocks_this_epoch = 0;
    bool all_full_this_epoch = true;
    // scripted / detected failure handling
    int forced_failures = 0;        // committees of this epoch scripted to fail
    Round failed_rounds_pending = 0; // silent rounds since the active committee failed

    const Committee* committee() const {
        if (exhausted || committees.empty())
            return nullptr;
        return &committees[active_committee];
    }
    Committee* committee() {
        if (exhausted || committees.empty())
            return nullptr;
        return &committees[active_committee];
    }

    void push_mempool(Transaction tx) {
        mempool_bytes += tx.size_bytes;
        mempool.push_back(std::move(tx));
    }
};

struct ContractVars {
    std::uint64_t por_count = 0;
    Money payments_dispensed = 0;
    Money escrow = 0;
    bool terminated = false;
    Round terminated_from = -1; // first round whose transactions are refused
    std::uint64_t last_dispute_proof = 0;
    PartyId server = 0;
    PartyId client = 0;
    std::uint64_t terms = 0;

    friend bool operator==(const ContractVars&, const ContractVars&) = default;
};

struct MainchainState {
    std::vector<MainBlock> blocks;
    std::deque<Transaction> mempool;
    std::map<ContractId, ContractVars> state_vars;
    std::map<PartyId, Money> balances;
    std::map<ModuleId, Epoch> last_synced_epoch;
    Money default_party_balance = 1000;
    Money total_dispensed = 0;
    std::uint64_t rejected = 0;

    Money balance_of(PartyId p) const {
        auto it = balances.find(p);
        return it == balances.end() ? default_party_balance : it->second;
    }
    Money& balance_ref(PartyId p) {
        auto [it, inserted] = balances.emplace(p, default_party_balance);
        return it->second;
    }
};

struct SetupResult {
    MainchainState mainchain;
    std::vector<SidechainState> sidechains; // one per module, sub index 0
};

// Creates per-module sidechain genesis states, the mainchain summary state
// variables, and the genesis block carrying the initial escrow transactions.
SetupResult setup(const ModuleTable& table,
                  const std::vector<Transaction>& genesis_escrows,
                  std::uint64_t main_capacity_bytes);

// Record-lookup instrumentation: every validation lookup reports which store
// satisfied it; needing pending state of a different module counts as a
// cross-sidechain access (the quantity the design drives to zero).
struct ValidationContext {
    const MainchainState* main = nullptr;
    // pending contract ids per module other than the validating one
    std::function<bool(ContractId, ModuleId home)> pending_elsewhere;
    // invoked for every transaction leaving a mempool, included or rejected
    std::function<void(const Transaction&)> on_dequeue;
    std::uint64_t cross_chain_pending = 0;
    std::uint64_t rejected = 0;
};

bool validate_service_tx(const Transaction& tx, ModuleId home, ValidationContext& ctx);

enum class MetaBlockOutcome : std::uint8_t {
    Produced = 0,
    ViewChange,       // leader failed to propose; one round consumed
    ConsensusFailure, // insufficient votes
    NotSeated,        // no live committee remains this epoch
};

struct MetaBlockResult {
    MetaBlockOutcome outcome = MetaBlockOutcome::Produced;
    MetaBlock block;
};

// One PBFT round at vote-count granularity: the leader proposes, honest
// members vote, lazy members never vote, malicious members follow the
// configured strategy (withhold by default).
MetaBlockResult produce_meta_block(SidechainState& sc, Round global_side_round,
                                   Round round_in_epoch, std::uint64_t capacity_bytes,
                                   const std::vector<MinerBehavior>& behavior_of,
                                   ValidationContext& ctx);

// Applies the per-module summary rules over an epoch's meta-blocks.
SummaryBlock produce_summary_block(ModuleId module, Epoch epoch,
                                   const std::vector<const MetaBlock*>& epoch_metas);

SyncTransaction create_sync_tx(ModuleId module, Epoch epoch, std::vector<SummaryBlock> summaries,
                               std::uint64_t issuer_pk, std::uint32_t requested_subchains);

// Recomputes each covered summary from the still-present meta-blocks and
// compares byte-exact.
bool verify_sync_tx(const std::vector<SidechainState*>& module_chains,
                    const SyncTransaction& sync);

// Folds confirmed summaries into the mainchain state variables; payments are
// dispensed from contract escrow.
void apply_sync(MainchainState& main, const SyncTransaction& sync);

// Drops every meta-block with epoch <= confirmed_epoch. The caller asserts
// mainchain confirmation; prune refuses to run ahead of it.
void prune(SidechainState& sc, Epoch confirmed_epoch, Epoch last_confirmed_on_main,
           std::uint64_t* bytes_freed = nullptr);

struct MainBlockResult {
    MainBlock block;
    std::vector<Transaction> confirmed; // includes the syncs, in block order
};

MainBlockResult produce_main_block(MainchainState& main, Round round,
                                   std::uint64_t capacity_bytes);

// Heavy detection over a module's chains at epoch end.
std::uint32_t detect_heavy(bool all_blocks_full, std::uint64_t backlog_bytes,
                           std::uint64_t module_epoch_capacity,
                           std::uint64_t chain_epoch_capacity, std::uint32_t cap);

struct SubchainRequest {
    ModuleId module = 0;
    std::uint32_t requested = 1;
    std::vector<std::int64_t> per_subchain_quota; // per class
};

struct SubchainGrant {
    ModuleId module = 0;
    std::uint32_t granted = 1;
    std::vector<std::int64_t> quota; // per class, per sub-sidechain
    bool no_capacity = false;
};

// Grants each heavy module (in priority order) the largest number of full
// sub-sidechain quotas that fit the per-class pool while keeping one full
// quota reserved for every later heavy module; when not even one full quota
// fits, the composition is scaled down proportionally, respecting the
// minimum committee size.
std::vector<SubchainGrant> allocate_subchains(const std::vector<SubchainRequest>& requests,
                                              std::vector<std::int64_t> pool,
                                              std::int64_t min_committee_size);

} // namespace chainscale
