#include "chainscale/chains.hpp"

#include <algorithm>
#include <cmath>

#include "chainscale/errors.hpp"
#include "chainscale/rng.hpp"

namespace chainscale {

SetupResult setup(const ModuleTable& table, const std::vector<Transaction>& genesis_escrows,
                  std::uint64_t main_capacity_bytes) {
    if (table.modules.empty())
        throw BadModuleTable("no modules configured");
    // every service type must be owned by exactly one configured module
    for (std::size_t t = 0; t < tx_type_count; ++t) {
        const TxType type = static_cast<TxType>(t);
        const ModuleId owner = table.owner[t];
        if (owner == mainchain_module) {
            if (type != TxType::Transfer && type != TxType::Sync && type != TxType::EscrowCreate)
                throw BadModuleTable(std::string("service type unassigned: ") +
                                     tx_type_name(type));
        } else if (!table.has_module(owner)) {
            throw BadModuleTable("type assigned to unknown module");
        }
    }
    std::set<ModuleId> seen;
    for (const auto& m : table.modules) {
        if (m.id == mainchain_module || m.id > 0x3f)
            throw BadModuleTable("module id outside the 6-bit prefix range");
        if (!seen.insert(m.id).second)
            throw BadModuleTable("duplicate module id");
    }

    SetupResult out;
    // genesis block: escrow registrations become the initial market state
    MainBlock genesis;
    genesis.round = -1;
    genesis.capacity_bytes = main_capacity_bytes;
    for (const auto& tx : genesis_escrows) {
        ContractVars& vars = out.mainchain.state_vars[tx.contract_id];
        vars.escrow += tx.amount;
        vars.client = tx.issuer;
        genesis.bytes_used += tx.size_bytes;
        genesis.txs.push_back(tx);
    }
    out.mainchain.blocks.push_back(std::move(genesis));

    for (const auto& m : table.modules) {
        SidechainState sc;
        sc.id = ChainId{m.id, 0};
        out.sidechains.push_back(std::move(sc));
        out.mainchain.last_synced_epoch[m.id] = -1;
    }
    return out;
}

bool validate_service_tx(const Transaction& tx, ModuleId home, ValidationContext& ctx) {
    auto contract_lookup = [&](ContractId cid) -> const ContractVars* {
        auto it = ctx.main->state_vars.find(cid);
        if (it != ctx.main->state_vars.end())
            return &it->second;
        // Not on the mainchain: the record could only exist as pending state
        // on some other module's sidechain. That access is what the module
        // split is designed to make unnecessary.
        if (ctx.pending_elsewhere && ctx.pending_elsewhere(cid, home))
            ++ctx.cross_chain_pending;
        return nullptr;
    };

    switch (tx.type) {
    case TxType::ServiceProof:
    case TxType::ServicePayment:
    case TxType::Ask:
    case TxType::Offer:
    case TxType::Agreement: {
        const ContractVars* vars = contract_lookup(tx.contract_id);
        if (vars == nullptr)
            return false;
        // sanctions refuse traffic created from the published outcome on;
        // earlier transactions stay valid however late they are processed
        if (vars->terminated && tx.created_round >= vars->terminated_from)
            return false;
        if (tx.type == TxType::ServicePayment && vars->escrow < tx.amount)
            return false;
        return true;
    }
    case TxType::Dispute: {
        // the dispute carries its own evidence; only the contract must exist
        const ContractVars* vars = contract_lookup(tx.contract_id);
        return vars != nullptr && tx.valid;
    }
    default:
        return true;
    }
}

MetaBlockResult produce_meta_block(SidechainState& sc, Round global_side_round,
                                   Round round_in_epoch, std::uint64_t capacity_bytes,
                                   const std::vector<MinerBehavior>& behavior_of,
                                   ValidationContext& ctx) {
    MetaBlockResult res;
    Committee* com = sc.committee();
    if (com == nullptr) {
        res.outcome = MetaBlockOutcome::NotSeated;
        return res;
    }

    if (sc.gated) {
        // mines empty marker blocks until the dependency recovers
        res.block.sidechain_id = sc.id;
        res.block.epoch = sc.epoch;
        res.block.round = round_in_epoch;
        res.block.capacity_bytes = capacity_bytes;
        res.block.empty_marker = true;
        sc.last_block_round = global_side_round;
        ++sc.blocks_this_epoch;
        sc.all_full_this_epoch = false;
        return res;
    }

    const MinerBehavior leader_behavior = behavior_of[com->members[com->leader]];
    if (leader_behavior != MinerBehavior::Honest) {
        com->leader = (com->leader + 1) % com->members.size();
        res.outcome = MetaBlockOutcome::ViewChange;
        return res;
    }

    std::int64_t votes = 0;
    for (MinerIndex m : com->members)
        if (behavior_of[m] == MinerBehavior::Honest)
            ++votes;
    if (votes < com->votes_needed()) {
        res.outcome = MetaBlockOutcome::ConsensusFailure;
        return res;
    }

    MetaBlock& block = res.block;
    block.sidechain_id = sc.id;
    block.epoch = sc.epoch;
    block.round = round_in_epoch;
    block.capacity_bytes = capacity_bytes;
    while (!sc.mempool.empty()) {
        const Transaction& head = sc.mempool.front();
        if (block.bytes_used + head.size_bytes > capacity_bytes) {
            block.full = true;
            break;
        }
        Transaction tx = std::move(sc.mempool.front());
        sc.mempool.pop_front();
        sc.mempool_bytes -= tx.size_bytes;
        if (ctx.on_dequeue)
            ctx.on_dequeue(tx);
        if (!validate_service_tx(tx, sc.id.module, ctx)) {
            ++ctx.rejected;
            continue;
        }
        block.bytes_used += tx.size_bytes;
        block.txs.push_back(std::move(tx));
    }
    sc.last_block_round = global_side_round;
    ++sc.blocks_this_epoch;
    if (!block.full)
        sc.all_full_this_epoch = false;
    return res;
}

SummaryBlock produce_summary_block(ModuleId module, Epoch epoch,
                                   const std::vector<const MetaBlock*>& epoch_metas) {
    SummaryBlock s;
    s.module = module;
    s.epoch = epoch;
    std::set<std::uint16_t> subs;
    bool first = true;
    for (const MetaBlock* mb : epoch_metas) {
        subs.insert(mb->sidechain_id.sub);
        if (first || mb->round < s.covered_from)
            s.covered_from = mb->round;
        if (first || mb->round > s.covered_to)
            s.covered_to = mb->round;
        first = false;
        for (const auto& tx : mb->txs) {
            switch (tx.type) {
            case TxType::ServiceProof:
                ++s.entries[SummaryKey{SummaryGroup::Payment, tx.contract_id}].por_count;
                break;
            case TxType::ServicePayment:
                s.entries[SummaryKey{SummaryGroup::Payment, tx.contract_id}].payment_total +=
                    tx.amount;
                break;
            case TxType::Dispute: {
                SummaryEntry& e = s.entries[SummaryKey{SummaryGroup::Dispute, tx.contract_id}];
                e.dispute_proof = tx.ref_id;
                e.dispute_round = tx.created_round;
                e.dispute_outcome = tx.outcome;
                break;
            }
            case TxType::Agreement: {
                SummaryEntry& e = s.entries[SummaryKey{SummaryGroup::Match, tx.contract_id}];
                e.server = tx.issuer;
                e.client = tx.counterparty;
                e.terms = tx.terms;
                break;
            }
            default:
                break;
            }
        }
    }
    s.covered_chains = static_cast<std::uint32_t>(std::max<std::size_t>(1, subs.size()));
    return s;
}

SyncTransaction create_sync_tx(ModuleId module, Epoch epoch, std::vector<SummaryBlock> summaries,
                               std::uint64_t issuer_pk, std::uint32_t requested_subchains) {
    SyncTransaction sync;
    sync.module = module;
    sync.epoch = epoch;
    sync.summaries = std::move(summaries);
    sync.issuer_pk = issuer_pk;
    sync.requested_subchains = requested_subchains;
    sync.payload_id = digest64("sync", {static_cast<std::uint64_t>(module),
                                        static_cast<std::uint64_t>(static_cast<std::uint32_t>(epoch)),
                                        issuer_pk});
    return sync;
}

bool verify_sync_tx(const std::vector<SidechainState*>& module_chains,
                    const SyncTransaction& sync) {
    for (const SummaryBlock& claimed : sync.summaries) {
        std::vector<const MetaBlock*> metas;
        for (const SidechainState* sc : module_chains) {
            for (const MetaBlock& mb : sc->meta_blocks)
                if (mb.epoch == claimed.epoch)
                    metas.push_back(&mb);
        }
        const SummaryBlock recomputed = produce_summary_block(sync.module, claimed.epoch, metas);
        if (encode_summary_entries(recomputed) != encode_summary_entries(claimed))
            return false;
    }
    return true;
}

void apply_sync(MainchainState& main, const SyncTransaction& sync) {
    for (const SummaryBlock& s : sync.summaries) {
        for (const auto& [key, e] : s.entries) {
            ContractVars& vars = main.state_vars[key.cid];
            switch (key.group) {
            case SummaryGroup::Payment: {
                vars.por_count += e.por_count;
                if (e.payment_total > 0) {
                    if (vars.escrow < e.payment_total)
                        throw InvariantViolation("payment exceeds escrowed funds");
                    vars.escrow -= e.payment_total;
                    vars.payments_dispensed += e.payment_total;
                    main.total_dispensed += e.payment_total;
                    if (vars.server != 0)
                        main.balance_ref(vars.server) += e.payment_total;
                }
                break;
            }
            case SummaryGroup::Dispute:
                vars.last_dispute_proof = e.dispute_proof;
                if (e.dispute_outcome == DisputeOutcome::Penalize) {
                    vars.terminated = true;
                    vars.terminated_from = e.dispute_round + dispute_publication_lag;
                }
                break;
            case SummaryGroup::Match:
                vars.server = e.server;
                vars.client = e.client;
                vars.terms = e.terms;
                break;
            }
        }
        auto it = main.last_synced_epoch.find(sync.module);
        if (it == main.last_synced_epoch.end() || it->second < s.epoch)
            main.last_synced_epoch[sync.module] = s.epoch;
    }
}

void prune(SidechainState& sc, Epoch confirmed_epoch, Epoch last_confirmed_on_main,
           std::uint64_t* bytes_freed) {
    if (confirmed_epoch > last_confirmed_on_main)
        throw PruneBeforeConfirm("epoch's sync-transaction is not confirmed on the mainchain");
    std::uint64_t freed = 0;
    std::erase_if(sc.meta_blocks, [&](const MetaBlock& mb) {
        if (mb.epoch <= confirmed_epoch) {
            freed += mb.bytes_used;
            return true;
        }
        return false;
    });
    sc.pruned_through = std::max(sc.pruned_through, confirmed_epoch);
    if (bytes_freed != nullptr)
        *bytes_freed = freed;
}

MainBlockResult produce_main_block(MainchainState& main, Round round,
                                   std::uint64_t capacity_bytes) {
    MainBlockResult res;
    res.block.round = round;
    res.block.capacity_bytes = capacity_bytes;

    // sync-transactions jump the queue; FIFO within each class
    std::stable_partition(main.mempool.begin(), main.mempool.end(),
                          [](const Transaction& tx) { return tx.type == TxType::Sync; });

    while (!main.mempool.empty()) {
        const Transaction& head = main.mempool.front();
        if (res.block.bytes_used + head.size_bytes > capacity_bytes) {
            // a transaction larger than the block itself (a bulk sync after
            // a busy epoch) ships alone in a dedicated block
            if (!(res.block.txs.empty() && head.size_bytes > capacity_bytes))
                break;
        }
        Transaction tx = std::move(main.mempool.front());
        main.mempool.pop_front();

        bool ok = true;
        switch (tx.type) {
        case TxType::Transfer: {
            Money& from = main.balance_ref(tx.issuer);
            if (from < tx.amount) {
                ok = false;
            } else {
                from -= tx.amount;
                main.balance_ref(tx.counterparty) += tx.amount;
            }
            break;
        }
        case TxType::EscrowCreate: {
            Money& from = main.balance_ref(tx.issuer);
            if (from < tx.amount) {
                ok = false;
            } else {
                from -= tx.amount;
                main.state_vars[tx.contract_id].escrow += tx.amount;
            }
            break;
        }
        case TxType::Sync:
            break; // applied by the caller once the block is confirmed
        default:
            break;
        }
        if (!ok) {
            ++main.rejected;
            continue;
        }
        res.block.bytes_used += tx.size_bytes;
        res.confirmed.push_back(tx);
        res.block.txs.push_back(std::move(tx));
    }
    main.blocks.push_back(res.block);
    return res;
}

std::uint32_t detect_heavy(bool all_blocks_full, std::uint64_t backlog_bytes,
                           std::uint64_t module_epoch_capacity,
                           std::uint64_t chain_epoch_capacity, std::uint32_t cap) {
    if (!all_blocks_full || backlog_bytes <= module_epoch_capacity || chain_epoch_capacity == 0)
        return 1;
    const std::uint64_t needed =
        (backlog_bytes + chain_epoch_capacity - 1) / chain_epoch_capacity;
    return static_cast<std::uint32_t>(
        std::clamp<std::uint64_t>(needed, 1, cap == 0 ? 1 : cap));
}

std::vector<SubchainGrant> allocate_subchains(const std::vector<SubchainRequest>& requests,
                                              std::vector<std::int64_t> pool,
                                              std::int64_t min_committee_size) {
    std::vector<SubchainGrant> grants;
    grants.reserve(requests.size());
    const std::size_t classes = pool.size();

    for (std::size_t i = 0; i < requests.size(); ++i) {
        const SubchainRequest& req = requests[i];
        if (req.per_subchain_quota.size() != classes)
            throw InvalidCounts("quota class count disagrees with pool");
        SubchainGrant grant;
        grant.module = req.module;

        // hold back one full quota for every later heavy module
        std::vector<std::int64_t> avail = pool;
        for (std::size_t j = i + 1; j < requests.size(); ++j)
            for (std::size_t c = 0; c < classes; ++c)
                avail[c] -= requests[j].per_subchain_quota[c];

        std::int64_t k = req.requested;
        for (std::size_t c = 0; c < classes; ++c) {
            if (req.per_subchain_quota[c] <= 0)
                continue;
            k = std::min<std::int64_t>(k, std::max<std::int64_t>(0, avail[c]) /
                                              req.per_subchain_quota[c]);
        }

        if (k >= 1) {
            grant.granted = static_cast<std::uint32_t>(k);
            grant.quota = req.per_subchain_quota;
        } else {
            // not even one full quota after reservations: scale the
            // composition down proportionally against the unreserved pool
            double scale = 1.0;
            for (std::size_t c = 0; c < classes; ++c) {
                if (req.per_subchain_quota[c] <= 0)
                    continue;
                scale = std::min(scale, static_cast<double>(std::max<std::int64_t>(0, pool[c])) /
                                            static_cast<double>(req.per_subchain_quota[c]));
            }
            grant.granted = 1;
            grant.quota.resize(classes, 0);
            std::int64_t total = 0;
            for (std::size_t c = 0; c < classes; ++c) {
                grant.quota[c] = static_cast<std::int64_t>(
                    std::floor(scale * static_cast<double>(req.per_subchain_quota[c])));
                total += grant.quota[c];
            }
            if (total < min_committee_size) {
                grant.no_capacity = true;
                grant.quota = req.per_subchain_quota; // keeps its single sidechain
            }
        }
        if (!grant.no_capacity) {
            for (std::size_t c = 0; c < classes; ++c)
                pool[c] -= static_cast<std::int64_t>(grant.granted) * grant.quota[c];
        }
        grants.push_back(std::move(grant));
    }
    return grants;
}

} // namespace chainscale
