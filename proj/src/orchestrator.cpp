#include "chainscale/orchestrator.hpp"

#include <algorithm>
#include <cinttypes>
#include <cstdio>
#include <sstream>

#include "chainscale/errors.hpp"

namespace chainscale {

namespace {

TrafficParams traffic_params(const ScenarioConfig& cfg) {
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

DependencyGraph parse_dependencies(const std::string& text, const ModuleTable& table) {
    DependencyGraph g;
    if (text.empty())
        return g;
    auto module_by_name = [&](const std::string& name) -> ModuleId {
        for (const auto& m : table.modules)
            if (m.name == name)
                return m.id;
        return mainchain_module;
    };
    std::stringstream ss(text);
    std::string pair;
    while (std::getline(ss, pair, ',')) {
        const auto colon = pair.find(':');
        if (colon == std::string::npos)
            throw ConfigError("config key 'dependencies': expected source:target in '" + pair +
                              "'");
        const ModuleId src = module_by_name(pair.substr(0, colon));
        const ModuleId dst = module_by_name(pair.substr(colon + 1));
        if (src != mainchain_module && dst != mainchain_module)
            g.add(src, dst);
    }
    return g;
}

constexpr std::int64_t min_subchain_committee = 5;
constexpr std::uint64_t summary_block_header_bytes = 64;

} // namespace

Simulation::Simulation(const ScenarioConfig& cfg) : Simulation(cfg, Options{}) {}

Simulation::Simulation(const ScenarioConfig& cfg, Options options)
    : cfg_(cfg), options_(options),
      table_(options.single_sidechain ? single_sidechain_table() : default_module_table()),
      pop_(MinerPopulation::create(cfg.num_miners, cfg.seed, cfg.p_lazy, cfg.p_malicious)),
      gen_(traffic_params(cfg), table_, cfg.seed) {
    validate(cfg_);
    behavior_of_.reserve(pop_.size());
    for (const auto& r : pop_.records())
        behavior_of_.push_back(r.behavior);

    if (options_.single_sidechain) {
        module_priority_ = {table_.modules.front().id};
        deps_ = DependencyGraph{};
    } else {
        module_priority_ = {module_dispute, module_service_payment, module_market_match};
        deps_ = parse_dependencies(cfg_.dependencies, table_);
    }
    metrics_ = std::make_unique<MetricsCollector>(cfg_.run_rounds, cfg_.seconds_per_round,
                                                  options_.keep_observations, false);
    bootstrap();
}

std::uint64_t Simulation::persistent_summary_bytes(const SummaryBlock& s) const {
    return summary_block_header_bytes + cfg_.sync_per_entry_bytes * s.entries.size();
}

void Simulation::bootstrap() {
    // genesis escrows cover each contract's first active period
    std::vector<Transaction> escrows;
    escrows.reserve(cfg_.contracts);
    for (std::uint64_t cid = 1; cid <= cfg_.contracts; ++cid) {
        const auto& c = gen_.contracts().at(cid);
        Transaction tx;
        tx.id = digest64("genesis-escrow", {cfg_.seed, cid});
        tx.type = TxType::EscrowCreate;
        tx.prefix = annotate(TxType::EscrowCreate, table_);
        tx.has_contract = true;
        tx.contract_id = cid;
        tx.issuer = c.client;
        tx.amount = c.price_per_round * c.duration_rounds;
        tx.size_bytes = cfg_.size_transfer;
        tx.created_round = -1;
        escrows.push_back(tx);
    }
    auto result = setup(table_, escrows, cfg_.main_block_bytes);
    main_ = std::move(result.mainchain);
    for (auto& sc : result.sidechains) {
        chain_count_[sc.id.module] = 1;
        issued_through_[sc.id.module] = -1;
        newest_content_epoch_[sc.id.module] = -1;
        pending_request_[sc.id.module] = 1;
        chains_.emplace(sc.id, std::move(sc));
    }
    // clients are funded for every renewal escrow of the run
    for (std::uint64_t cid = 1; cid <= cfg_.contracts; ++cid) {
        const auto& c = gen_.contracts().at(cid);
        main_.balance_ref(c.client) =
            2 * cfg_.price_per_round * (cfg_.run_rounds + cfg_.duration_max);
    }
    metrics_->block_produced(-1, ChainId{}, main_.blocks.front().bytes_used,
                             main_.blocks.front().txs.size(), false);
    pop_.recompute_scores(
        ScoreWeights{cfg_.score_alpha, cfg_.score_beta, cfg_.score_gamma});
    elect_epoch_committees(0, -1);
    current_epoch_ = 0;
}

std::uint16_t Simulation::pick_subchain(ModuleId module, const Transaction& tx) const {
    const std::uint32_t count = chain_count_.at(module);
    if (count <= 1)
        return 0;
    const std::uint64_t key = tx.has_contract ? tx.contract_id : tx.id;
    return static_cast<std::uint16_t>(digest64("sub-assign", {key}) % count);
}

void Simulation::route_transaction(Transaction tx) {
    const ChainTarget target = classify(tx.prefix, table_);
    ++generated_;
    if (target.is_mainchain()) {
        main_.mempool.push_back(std::move(tx));
        return;
    }
    const ModuleId m = target.chain.module;
    const std::uint16_t sub = pick_subchain(m, tx);
    if (tx.has_contract)
        ++pending_cids_[m][tx.contract_id];
    chains_.at(ChainId{m, sub}).push_mempool(std::move(tx));
}

std::vector<SidechainState*> Simulation::module_chains(ModuleId module) {
    std::vector<SidechainState*> out;
    for (auto& [id, sc] : chains_)
        if (id.module == module)
            out.push_back(&sc);
    return out;
}

std::vector<const SidechainState*> Simulation::module_chains(ModuleId module) const {
    std::vector<const SidechainState*> out;
    for (const auto& [id, sc] : chains_)
        if (id.module == module)
            out.push_back(&sc);
    return out;
}

void Simulation::update_gating(Round global_side_round) {
    if (drain_mode_) {
        // no fresh traffic to protect; leaving chains gated would wedge the
        // queue drain behind a dependency that has nothing left to publish
        for (auto& [id, sc] : chains_)
            sc.gated = false;
        return;
    }
    for (auto& [id, sc] : chains_) {
        if (id.sub >= chain_count_.at(id.module))
            continue;
        const auto deps = deps_.dependencies_of(id.module);
        bool gated = false;
        for (ModuleId dep : deps) {
            Round newest = -1;
            for (const auto& [did, dsc] : chains_) {
                if (did.module == dep && did.sub < chain_count_.at(dep))
                    newest = std::max(newest, dsc.last_block_round);
            }
            if (global_side_round - newest >= cfg_.eta_rounds) {
                gated = true;
                break;
            }
        }
        sc.gated = gated;
    }
}

void Simulation::produce_on_chain(SidechainState& sc, Round main_round, Round side_index) {
    const Round global = main_round * cfg_.side_rounds_per_main + side_index;
    const Round round_in_epoch = global % cfg_.side_rounds_per_epoch();
    if (sc.exhausted)
        return;
    if (drain_mode_ && sc.mempool.empty())
        return; // the simulation stops minting empty blocks once traffic ends

    // scripted committee failures with immediate/withheld strategies play out
    // during the epoch; the worst case (invalid at last round) is resolved at
    // the boundary when the sync is due
    const bool forced = static_cast<int>(sc.active_committee) < sc.forced_failures &&
                        cfg_.adversary_strategy != AdversaryStrategy::InvalidAtLastRound;
    ValidationContext ctx;
    ctx.main = &main_;
    ctx.pending_elsewhere = [this](ContractId cid, ModuleId home) {
        for (const auto& [m, cids] : pending_cids_) {
            if (m == home)
                continue;
            auto it = cids.find(cid);
            if (it != cids.end() && it->second > 0)
                return true;
        }
        return false;
    };
    ctx.on_dequeue = [this](const Transaction& tx) {
        if (!tx.has_contract)
            return;
        const ModuleId m = table_.owner_of(tx.type);
        auto it = pending_cids_[m].find(tx.contract_id);
        if (it != pending_cids_[m].end() && it->second > 0)
            --it->second;
    };

    MetaBlockOutcome outcome;
    MetaBlockResult res;
    if (scripted_leader_failure(sc, main_round) && side_index == 0) {
        // a silent leader costs this round; the next member takes over
        if (Committee* com = sc.committee())
            view_change(*com);
        return;
    }
    if (forced) {
        outcome = MetaBlockOutcome::ConsensusFailure;
    } else {
        res = produce_meta_block(sc, global, round_in_epoch, cfg_.side_block_bytes, behavior_of_,
                                 ctx);
        outcome = res.outcome;
    }
    cross_pending_ += ctx.cross_chain_pending;
    rejected_ += ctx.rejected;

    switch (outcome) {
    case MetaBlockOutcome::Produced: {
        finalize_block_txs(res.block, main_round, side_index);
        metrics_->block_produced(main_round, sc.id, res.block.bytes_used, res.block.txs.size(),
                                 res.block.empty_marker);
        newest_content_epoch_[sc.id.module] =
            std::max(newest_content_epoch_[sc.id.module], sc.epoch);
        sc.meta_blocks.push_back(std::move(res.block));
        sc.failed_rounds_pending = 0;
        break;
    }
    case MetaBlockOutcome::ViewChange:
        break; // one round consumed by the leader change
    case MetaBlockOutcome::ConsensusFailure: {
        ++sc.failed_rounds_pending;
        const Round detect = cfg_.adversary_strategy == AdversaryStrategy::InvalidImmediately
            ? 1
            : cfg_.eta_rounds;
        if (sc.failed_rounds_pending >= detect) {
            sc.failed_rounds_pending = 0;
            metrics_->committee_failed(main_round, sc.id, sc.epoch,
                                       static_cast<int>(sc.active_committee));
            ++failover_episodes_[{sc.id, sc.epoch}];
            try {
                failover(sc, global);
            } catch (const AllCommitteesExhausted&) {
                // epoch lost for this chain; mass-syncing picks it up later
            }
        }
        break;
    }
    case MetaBlockOutcome::NotSeated:
        break;
    }
}

void Simulation::finalize_block_txs(const MetaBlock& block, Round main_round, Round side_index) {
    const double frac = static_cast<double>(side_index + 1) /
                        static_cast<double>(cfg_.side_rounds_per_main);
    for (const auto& tx : block.txs) {
        const double latency =
            static_cast<double>(main_round) + frac - static_cast<double>(tx.created_round);
        metrics_->tx_confirmed(main_round, block.sidechain_id, tx.id, latency, tx.size_bytes);
    }
}

void Simulation::run_side_round(Round main_round, Round side_index) {
    update_gating(main_round * cfg_.side_rounds_per_main + side_index);
    for (auto& [id, sc] : chains_) {
        if (id.sub >= chain_count_.at(id.module))
            continue;
        produce_on_chain(sc, main_round, side_index);
    }
}

void Simulation::main_round_block(Round round) {
    MainBlockResult res = produce_main_block(main_, round, cfg_.main_block_bytes);
    for (const auto& tx : res.confirmed) {
        if (tx.type == TxType::Sync) {
            // protocol overhead: carried in blocks and storage, not in the
            // workload throughput metrics
            auto it = syncs_.find(tx.ref_id);
            if (it == syncs_.end())
                throw InvariantViolation("sync carrier without payload");
            it->second.included_round = round;
            continue;
        }
        if (auto rc = reconfirmable_.find(tx.id); rc != reconfirmable_.end()) {
            reconfirmable_.erase(rc); // rolled back and re-included; first confirmation stands
            continue;
        }
        const double latency = static_cast<double>(round) + 1.0 -
                               static_cast<double>(tx.created_round);
        metrics_->tx_confirmed(round, ChainId{}, tx.id, latency, tx.size_bytes);
    }
    metrics_->block_produced(round, ChainId{}, res.block.bytes_used, res.block.txs.size(),
                             res.block.txs.empty());
}

void Simulation::confirm_syncs(Round round) {
    for (auto& [payload_id, pending] : syncs_) {
        if (pending.confirmed || pending.included_round < 0)
            continue;
        if (round - pending.included_round < cfg_.sync_confirm_depth - 1)
            continue;
        auto chains = module_chains(pending.payload.module);
        if (!verify_sync_tx(chains, pending.payload))
            throw InvariantViolation("honest sync-transaction failed verification");
        apply_sync(main_, pending.payload);
        pending.confirmed = true;
        metrics_->sync_confirmed(round, pending.payload.module, pending.payload.epoch);
        if (options_.prune_enabled) {
            for (SidechainState* sc : chains) {
                std::uint64_t freed = 0;
                prune(*sc, pending.payload.epoch,
                      main_.last_synced_epoch.at(pending.payload.module), &freed);
                if (freed > 0)
                    metrics_->pruned(round, sc->id, freed);
            }
        }
    }
}

void Simulation::issue_module_sync(ModuleId module, Epoch epoch, Round round) {
    if (issued_through_.at(module) >= epoch)
        return;
    auto chains = module_chains(module);
    // nothing worth syncing once the market has drained
    if (drain_mode_) {
        bool any_meta = false;
        for (const SidechainState* sc : chains)
            if (!sc->meta_blocks.empty())
                any_meta = true;
        if (!any_meta) {
            issued_through_[module] = epoch;
            return;
        }
    }

    // the issuing committee: single chain -> its active committee, heavy
    // module -> a sync committee drawn across the sub-committees
    const std::uint32_t count = chain_count_.at(module);
    SidechainState& first = chains_.at(ChainId{module, 0});

    // worst-case adversary: the committee completes the epoch but never
    // issues the sync; backups are consumed at the boundary
    if (cfg_.adversary_strategy == AdversaryStrategy::InvalidAtLastRound) {
        while (static_cast<int>(first.active_committee) < first.forced_failures) {
            metrics_->committee_failed(round, first.id, first.epoch,
                                       static_cast<int>(first.active_committee));
            ++failover_episodes_[{first.id, first.epoch}];
            try {
                failover(first, round);
            } catch (const AllCommitteesExhausted&) {
                return; // epoch unsynced; the next epoch mass-syncs
            }
        }
    }
    if (first.exhausted)
        return;

    std::uint64_t issuer_pk = 0;
    if (count > 1) {
        std::vector<Committee> primaries;
        for (std::uint32_t sub = 0; sub < count; ++sub) {
            const SidechainState& sc = chains_.at(ChainId{module, static_cast<std::uint16_t>(sub)});
            if (const Committee* com = sc.committee())
                primaries.push_back(*com);
        }
        if (primaries.empty())
            return;
        Rng rng = Rng::stream(cfg_.seed, "sync-committee",
                              {static_cast<std::uint64_t>(module),
                               static_cast<std::uint64_t>(static_cast<std::uint32_t>(epoch))});
        const Committee sync_com = elect_sync_committee(
            primaries, pop_, static_cast<std::size_t>(cfg_.committee_size), rng);
        issuer_pk = pop_.records()[sync_com.members[sync_com.leader]].pk;
    } else {
        const Committee* com = first.committee();
        if (com == nullptr)
            return;
        issuer_pk = pop_.records()[com->members[com->leader]].pk;
    }

    SyncTransaction sync = mass_sync(chains, module, epoch, issued_through_.at(module), issuer_pk,
                                     pending_request_.at(module));
    // permanent summary-blocks live on the sidechain; a mass-sync after a
    // rollback re-carries epochs whose summary-block already exists
    std::set<Epoch> already;
    for (const SummaryBlock& s : first.summary_blocks)
        already.insert(s.epoch);
    for (const SummaryBlock& s : sync.summaries) {
        if (already.count(s.epoch) > 0)
            continue;
        first.summary_blocks.push_back(s);
        metrics_->block_produced(round, ChainId{module, 0}, persistent_summary_bytes(s), 0, false,
                                 true);
    }

    Transaction carrier;
    carrier.id = digest64("sync-carrier", {sync.payload_id});
    carrier.type = TxType::Sync;
    carrier.prefix = annotate(TxType::Sync, table_);
    carrier.issuer = issuer_pk;
    carrier.ref_id = sync.payload_id;
    carrier.sync_module = module;
    carrier.sync_epoch = epoch;
    carrier.size_bytes = static_cast<std::uint32_t>(
        cfg_.sync_base_bytes + cfg_.sync_per_entry_bytes * sync.entry_count());
    carrier.created_round = round;
    ++syncs_issued_;
    syncs_.emplace(sync.payload_id, PendingSync{std::move(sync), -1, false});
    main_.mempool.push_back(std::move(carrier));
    issued_through_[module] = epoch;
}

void Simulation::elect_epoch_committees(Epoch next_epoch, Round round) {
    const int classes = cfg_.election_mode == ElectionMode::Weighted ? cfg_.classes : 1;
    pop_.recompute_scores(ScoreWeights{cfg_.score_alpha, cfg_.score_beta, cfg_.score_gamma});
    const auto class_sizes = pop_.assign_classes(classes);

    auto composition_of = [&](ModuleId m) {
        if (cfg_.election_mode == ElectionMode::Weighted && m == module_dispute)
            return plurality_composition(cfg_.committee_size, classes, cfg_.critical_top_share);
        return balanced_composition(cfg_.committee_size, classes);
    };
    auto cap_of = [&](ModuleId m) -> std::uint32_t {
        if (options_.single_sidechain)
            return 1;
        if (m == module_service_payment)
            return cfg_.cap_payment;
        if (m == module_market_match)
            return cfg_.cap_match;
        if (m == module_dispute)
            return cfg_.cap_dispute;
        return 1;
    };

    // non-heavy modules reserve their quotas first; heavy requests compete
    // for what remains, in priority order
    std::vector<std::int64_t> pool(class_sizes.begin(), class_sizes.end());
    std::vector<SubchainRequest> heavy;
    std::map<ModuleId, std::vector<std::int64_t>> comp;
    for (ModuleId m : module_priority_) {
        comp[m] = composition_of(m);
        const std::uint32_t req = std::min(pending_request_.at(m), cap_of(m));
        if (req <= 1) {
            for (std::size_t c = 0; c < pool.size(); ++c)
                pool[c] -= (cfg_.backups + 1) * comp[m][c];
        } else {
            heavy.push_back(SubchainRequest{m, req, comp[m]});
        }
    }
    for (auto& v : pool)
        v = std::max<std::int64_t>(0, v) / (cfg_.backups + 1);

    std::map<ModuleId, SubchainGrant> grants;
    for (auto& g : allocate_subchains(heavy, pool, min_subchain_committee))
        grants.emplace(g.module, std::move(g));

    // desired chain counts and per-chain compositions for the next epoch
    ClassQuota quota;
    std::map<ModuleId, std::uint32_t> new_count;
    for (const auto& entry : table_.modules) {
        const ModuleId m = entry.id;
        std::uint32_t count = 1;
        std::vector<std::int64_t> row = comp[m];
        if (auto it = grants.find(m); it != grants.end() && !it->second.no_capacity) {
            count = it->second.granted;
            row = it->second.quota;
        }
        new_count[m] = count;
        for (std::uint32_t sub = 0; sub < count; ++sub) {
            quota.chains.push_back(ChainId{m, static_cast<std::uint16_t>(sub)});
            quota.needed.push_back(row);
        }
    }

    EpochCommittees committees = run_epoch_election(
        pop_, quota, cfg_.backups, classes, digest64("seed1", {cfg_.seed, static_cast<std::uint64_t>(
                                                    static_cast<std::uint32_t>(next_epoch))}),
        digest64("seed2", {cfg_.seed, static_cast<std::uint64_t>(
                                          static_cast<std::uint32_t>(next_epoch))}));

    const Round global_side = (round + 1) * cfg_.side_rounds_per_main - 1;
    for (const auto& entry : table_.modules) {
        const ModuleId m = entry.id;
        const std::uint32_t old_count = chain_count_.at(m);
        const std::uint32_t count = new_count.at(m);

        // gather and re-deal pending traffic when the chain count changes
        std::vector<Transaction> carried;
        if (count != old_count) {
            for (std::uint32_t sub = 0; sub < old_count; ++sub) {
                auto it = chains_.find(ChainId{m, static_cast<std::uint16_t>(sub)});
                if (it == chains_.end())
                    continue;
                while (!it->second.mempool.empty()) {
                    carried.push_back(std::move(it->second.mempool.front()));
                    it->second.mempool.pop_front();
                }
                it->second.mempool_bytes = 0;
            }
        }
        chain_count_[m] = count;

        for (std::uint32_t sub = 0; sub < count; ++sub) {
            const ChainId id{m, static_cast<std::uint16_t>(sub)};
            auto [it, created] = chains_.try_emplace(id);
            SidechainState& sc = it->second;
            if (created) {
                sc.id = id;
                sc.last_block_round = global_side;
            }
            sc.epoch = next_epoch;
            sc.active_committee = 0;
            sc.exhausted = false;
            sc.blocks_this_epoch = 0;
            sc.all_full_this_epoch = true;
            sc.failed_rounds_pending = 0;
            sc.forced_failures = 0;
            auto found = committees.by_chain.find(id);
            if (found == committees.by_chain.end())
                throw InvariantViolation("election returned no committees for a chain");
            sc.committees = found->second;
        }
        for (auto& tx : carried)
            chains_.at(ChainId{m, pick_subchain(m, tx)}).push_mempool(std::move(tx));
        // dormant chains keep retained meta-blocks until their epochs prune
        for (auto& [id, sc] : chains_) {
            if (id.module == m && id.sub >= count)
                sc.epoch = next_epoch;
        }
    }

    // scripted failures for the incoming epoch
    for (const auto& ev : cfg_.scripted_events) {
        if (ev.kind == ScriptedEvent::Kind::CommitteeFailure && ev.epoch == next_epoch) {
            for (SidechainState* sc : module_chains(ev.module))
                sc->forced_failures = ev.committees;
        }
    }
}

void Simulation::epoch_boundary(Round round, bool) {
    const Epoch e = current_epoch_;

    // participation accrues for the committees that served
    for (const auto& entry : table_.modules) {
        for (std::uint32_t sub = 0; sub < chain_count_.at(entry.id); ++sub) {
            const SidechainState& sc =
                chains_.at(ChainId{entry.id, static_cast<std::uint16_t>(sub)});
            if (const Committee* com = sc.committee()) {
                for (MinerIndex mi : com->members)
                    pop_.records()[mi].participation +=
                        static_cast<std::uint64_t>(cfg_.side_rounds_per_epoch());
            }
        }
    }

    // heavy detection feeding next epoch's allocation
    for (const auto& entry : table_.modules) {
        const ModuleId m = entry.id;
        const std::uint32_t count = chain_count_.at(m);
        bool all_full = true;
        bool any_blocks = false;
        std::uint64_t backlog = 0;
        for (std::uint32_t sub = 0; sub < count; ++sub) {
            const SidechainState& sc = chains_.at(ChainId{m, static_cast<std::uint16_t>(sub)});
            all_full = all_full && sc.all_full_this_epoch && sc.blocks_this_epoch > 0;
            any_blocks = any_blocks || sc.blocks_this_epoch > 0;
            backlog += sc.mempool_bytes;
        }
        const std::uint64_t chain_cap =
            cfg_.side_block_bytes * static_cast<std::uint64_t>(cfg_.side_rounds_per_epoch());
        std::uint32_t cap = 1;
        if (!options_.single_sidechain) {
            cap = m == module_service_payment ? cfg_.cap_payment
                : m == module_market_match    ? cfg_.cap_match
                                              : cfg_.cap_dispute;
        }
        pending_request_[m] =
            detect_heavy(all_full && any_blocks, backlog, chain_cap * count, chain_cap, cap);
    }

    // summaries + sync-transactions (mass-syncing any unsynced epochs)
    for (const auto& entry : table_.modules)
        issue_module_sync(entry.id, e, round);

    elect_epoch_committees(e + 1, round);
    current_epoch_ = e + 1;
}

void Simulation::apply_scripted_round_events(Round round) {
    for (const auto& ev : cfg_.scripted_events) {
        if (ev.kind == ScriptedEvent::Kind::Rollback && ev.round == round)
            apply_rollback(round, ev.depth);
    }
}

bool Simulation::scripted_leader_failure(const SidechainState& sc, Round main_round) const {
    for (const auto& ev : cfg_.scripted_events) {
        if (ev.kind == ScriptedEvent::Kind::LeaderFailure && ev.epoch == sc.epoch &&
            ev.round == main_round && ev.module == sc.id.module)
            return true;
    }
    return false;
}

void Simulation::apply_rollback(Round round, int depth) {
    // never drops the genesis block
    const int droppable =
        static_cast<int>(main_.blocks.size()) - 1;
    depth = std::min(depth, droppable);
    if (depth <= 0)
        return;
    std::vector<MainBlock> dropped;
    for (int i = 0; i < depth; ++i) {
        dropped.push_back(std::move(main_.blocks.back()));
        main_.blocks.pop_back();
    }
    std::uint64_t dropped_bytes = 0;
    // oldest dropped block first so mempool order stays sensible
    std::deque<Transaction> requeue;
    for (auto it = dropped.rbegin(); it != dropped.rend(); ++it) {
        dropped_bytes += it->bytes_used;
        for (auto& tx : it->txs) {
            if (tx.type == TxType::Sync) {
                auto found = syncs_.find(tx.ref_id);
                if (found != syncs_.end()) {
                    const Epoch first_covered = found->second.payload.summaries.empty()
                        ? found->second.payload.epoch
                        : found->second.payload.summaries.front().epoch;
                    for (const SidechainState* sc : module_chains(found->second.payload.module))
                        if (sc->pruned_through >= first_covered)
                            throw MissingMetaBlocks(
                                "rollback dropped a sync whose meta-blocks were pruned");
                    issued_through_[found->second.payload.module] = std::min(
                        issued_through_[found->second.payload.module], first_covered - 1);
                    syncs_.erase(found);
                }
                continue; // a fresh mass-sync will cover these epochs
            }
            reconfirmable_.insert(tx.id);
            requeue.push_back(std::move(tx));
        }
    }
    for (auto it = requeue.rbegin(); it != requeue.rend(); ++it)
        main_.mempool.push_front(std::move(*it));
    metrics_->pruned(round, ChainId{}, dropped_bytes);
    replay_mainchain();
}

void Simulation::replay_mainchain() {
    // mainchain state is a pure fold over the surviving blocks
    main_.balances.clear();
    main_.state_vars.clear();
    for (auto& [m, e] : main_.last_synced_epoch)
        e = -1;
    main_.total_dispensed = 0;

    const MainBlock genesis = main_.blocks.front();
    for (const auto& tx : genesis.txs) {
        ContractVars& vars = main_.state_vars[tx.contract_id];
        vars.escrow += tx.amount;
        vars.client = tx.issuer;
    }
    for (std::uint64_t cid = 1; cid <= cfg_.contracts; ++cid) {
        const auto& c = gen_.contracts().at(cid);
        main_.balance_ref(c.client) =
            2 * cfg_.price_per_round * (cfg_.run_rounds + cfg_.duration_max);
    }
    for (auto& [id, pending] : syncs_) {
        pending.confirmed = false;
        pending.included_round = -1;
    }
    std::vector<std::pair<Round, std::uint64_t>> included; // (round, payload)
    for (std::size_t b = 1; b < main_.blocks.size(); ++b) {
        const MainBlock& block = main_.blocks[b];
        for (const auto& tx : block.txs) {
            switch (tx.type) {
            case TxType::Transfer: {
                main_.balance_ref(tx.issuer) -= tx.amount;
                main_.balance_ref(tx.counterparty) += tx.amount;
                break;
            }
            case TxType::EscrowCreate: {
                main_.balance_ref(tx.issuer) -= tx.amount;
                main_.state_vars[tx.contract_id].escrow += tx.amount;
                break;
            }
            case TxType::Sync:
                included.emplace_back(block.round, tx.ref_id);
                break;
            default:
                break;
            }
        }
    }
    const Round tip = main_.blocks.back().round;
    for (const auto& [inc_round, payload_id] : included) {
        auto it = syncs_.find(payload_id);
        if (it == syncs_.end())
            continue;
        it->second.included_round = inc_round;
        if (tip - inc_round >= cfg_.sync_confirm_depth - 1) {
            apply_sync(main_, it->second.payload);
            it->second.confirmed = true;
        }
    }
}

bool Simulation::drained() const {
    if (!main_.mempool.empty())
        return false;
    for (const auto& [id, sc] : chains_)
        if (!sc.mempool.empty())
            return false;
    for (const auto& [pid, pending] : syncs_)
        if (!pending.confirmed)
            return false;
    return true;
}

bool Simulation::fully_synced() const {
    for (const auto& [m, newest] : newest_content_epoch_) {
        Epoch synced = -1;
        auto it = main_.last_synced_epoch.find(m);
        if (it != main_.last_synced_epoch.end())
            synced = it->second;
        if (synced < newest)
            return false;
    }
    return true;
}

MetricsReport Simulation::run() {
    const Round hard_cap = cfg_.run_rounds * 30 + 2000;
    Round r = 0;
    for (;; ++r) {
        if (r > hard_cap)
            throw IncompleteRun("queues failed to drain within the round budget");
        drain_mode_ = r >= cfg_.run_rounds;
        if (!drain_mode_) {
            gen_.advance_contracts(r);
            for (auto& tx : gen_.gen_round_traffic(r))
                route_transaction(std::move(tx));
        }
        apply_scripted_round_events(r);

        for (Round j = 0; j < cfg_.side_rounds_per_main; ++j)
            run_side_round(r, j);

        main_round_block(r);
        confirm_syncs(r);

        const bool natural_boundary = (r + 1) % cfg_.epoch_rounds == 0;
        if (natural_boundary) {
            epoch_boundary(r, false);
        } else if (drain_mode_ && drained() && !fully_synced()) {
            // trailing partial epoch still summarizes and syncs
            epoch_boundary(r, true);
        }

        if (drain_mode_ && drained() && fully_synced())
            break;
    }
    last_round_ = r;

    RunExternals ext;
    ext.generated = generated_;
    ext.rejected = rejected_ + main_.rejected;
    ext.cross_chain_pending = cross_pending_;
    ext.drain_rounds = last_round_ + 1 - cfg_.run_rounds;
    // mean time to recover across interruption episodes: each consecutive
    // run of failed committees on one chain-epoch is one episode
    if (!failover_episodes_.empty()) {
        double total = 0.0;
        for (const auto& [key, failures] : failover_episodes_)
            total += static_cast<double>(failures) * cfg_.step_in_minutes;
        ext.recovery_time_min = total / static_cast<double>(failover_episodes_.size());
    }
    metrics_->set_externals(ext);
    return metrics_->aggregate();
}

std::map<ContractId, ContractVars> Simulation::recompute_state_from_metas() const {
    MainchainState rebuilt;
    const MainBlock& genesis = main_.blocks.front();
    for (const auto& tx : genesis.txs) {
        ContractVars& vars = rebuilt.state_vars[tx.contract_id];
        vars.escrow += tx.amount;
        vars.client = tx.issuer;
    }
    for (std::size_t b = 1; b < main_.blocks.size(); ++b) {
        for (const auto& tx : main_.blocks[b].txs) {
            if (tx.type == TxType::EscrowCreate)
                rebuilt.state_vars[tx.contract_id].escrow += tx.amount;
        }
    }
    for (const auto& entry : table_.modules) {
        const ModuleId m = entry.id;
        std::map<Epoch, std::vector<const MetaBlock*>> by_epoch;
        for (const auto& [id, sc] : chains_) {
            if (id.module != m)
                continue;
            for (const MetaBlock& mb : sc.meta_blocks)
                by_epoch[mb.epoch].push_back(&mb);
        }
        for (const auto& [epoch, metas] : by_epoch) {
            const SummaryBlock s = produce_summary_block(m, epoch, metas);
            SyncTransaction sync;
            sync.module = m;
            sync.epoch = epoch;
            sync.summaries = {s};
            apply_sync(rebuilt, sync);
        }
    }
    return rebuilt.state_vars;
}

void Simulation::export_ledger_csv(const std::string& path) const {
    std::FILE* f = std::fopen(path.c_str(), "w");
    if (f == nullptr)
        throw std::runtime_error("cannot open " + path);
    std::fprintf(f, "# ledger schema v1\n");
    std::fprintf(f, "chain,kind,epoch,round,bytes,txs\n");
    for (const auto& block : main_.blocks)
        std::fprintf(f, "main,block,-,%" PRId64 ",%" PRIu64 ",%zu\n", block.round,
                     block.bytes_used, block.txs.size());
    for (const auto& [id, sc] : chains_) {
        for (const auto& mb : sc.meta_blocks)
            std::fprintf(f, "%s,meta,%d,%" PRId64 ",%" PRIu64 ",%zu\n", id.name().c_str(),
                         mb.epoch, mb.round, mb.bytes_used, mb.txs.size());
        for (const auto& s : sc.summary_blocks)
            std::fprintf(f, "%s,summary,%d,-,%" PRIu64 ",%zu\n", id.name().c_str(), s.epoch,
                         persistent_summary_bytes(s), s.entries.size());
    }
    std::fclose(f);
}

MetricsReport run_experiment(const ScenarioConfig& cfg) {
    Simulation sim(cfg);
    return sim.run();
}

MetricsReport run_single_sidechain(const ScenarioConfig& cfg) {
    Simulation sim(cfg, Simulation::Options{true, false, true});
    return sim.run();
}

} // namespace chainscale
