#include <doctest.h>

#include <set>

#include "chainscale/chains.hpp"
#include "chainscale/errors.hpp"
#include "chainscale/rng.hpp"
#include "chainscale/sortition.hpp"
#include "chainscale/traffic.hpp"

using namespace chainscale;

namespace {

Transaction service_tx(TxType type, ContractId cid, std::uint32_t size, TxId id) {
    Transaction tx;
    tx.id = id;
    tx.type = type;
    tx.prefix = annotate(type, default_module_table());
    tx.has_contract = true;
    tx.contract_id = cid;
    tx.size_bytes = size;
    return tx;
}

MainchainState main_with_contract(ContractId cid, Money escrow) {
    MainchainState main;
    ContractVars vars;
    vars.escrow = escrow;
    vars.server = 11;
    vars.client = 22;
    main.state_vars[cid] = vars;
    return main;
}

Committee committee_of(std::size_t size, ChainId chain) {
    Committee com;
    com.sidechain_id = chain;
    for (std::size_t i = 0; i < size; ++i)
        com.members.push_back(static_cast<MinerIndex>(i));
    return com;
}

SidechainState chain_with_committee(ChainId id, std::size_t committee_size) {
    SidechainState sc;
    sc.id = id;
    sc.committees = {committee_of(committee_size, id)};
    return sc;
}

} // namespace

TEST_CASE("setup builds one sidechain per module and seeds escrow state") {
    std::vector<Transaction> escrows;
    for (ContractId cid = 1; cid <= 3; ++cid) {
        Transaction tx = service_tx(TxType::EscrowCreate, cid, 100, cid);
        tx.prefix = annotate(TxType::EscrowCreate, default_module_table());
        tx.has_contract = true;
        tx.issuer = 100 + cid;
        tx.amount = 50;
        escrows.push_back(tx);
    }
    const SetupResult result = setup(default_module_table(), escrows, 1000000);
    CHECK(result.sidechains.size() == 3);
    CHECK(result.mainchain.blocks.size() == 1);
    CHECK(result.mainchain.state_vars.size() == 3);
    CHECK(result.mainchain.state_vars.at(2).escrow == 50);

    ModuleTable empty;
    CHECK_THROWS_AS(setup(empty, {}, 1000000), BadModuleTable);

    ModuleTable unassigned = default_module_table();
    unassigned.owner[static_cast<std::size_t>(TxType::Dispute)] = mainchain_module;
    CHECK_THROWS_AS(setup(unassigned, {}, 1000000), BadModuleTable);

    ModuleTable duplicate = default_module_table();
    duplicate.modules.push_back({module_dispute, "dispute-again"});
    CHECK_THROWS_AS(setup(duplicate, {}, 1000000), BadModuleTable);
}

TEST_CASE("meta-block production follows votes and FIFO byte budget") {
    const ChainId pay{module_service_payment, 0};
    MainchainState main = main_with_contract(7, 1000);
    ValidationContext ctx;
    ctx.main = &main;

    SUBCASE("full honesty produces, under-full keeps FIFO order") {
        SidechainState sc = chain_with_committee(pay, 8); // 3f+2 with f=2
        std::vector<MinerBehavior> behavior(8, MinerBehavior::Honest);
        sc.push_mempool(service_tx(TxType::ServiceProof, 7, 200, 1));
        sc.push_mempool(service_tx(TxType::ServiceProof, 7, 200, 2));
        sc.push_mempool(service_tx(TxType::ServicePayment, 7, 120, 3));
        const auto res = produce_meta_block(sc, 0, 0, 1000, behavior, ctx);
        REQUIRE(res.outcome == MetaBlockOutcome::Produced);
        REQUIRE(res.block.txs.size() == 3);
        CHECK(res.block.txs[0].id == 1);
        CHECK(res.block.txs[1].id == 2);
        CHECK(res.block.txs[2].id == 3);
        CHECK_FALSE(res.block.full);
        CHECK(res.block.bytes_used == 520);
        CHECK(res.block.bytes_used <= res.block.capacity_bytes);
    }

    SUBCASE("byte budget closes the block and marks it full") {
        SidechainState sc = chain_with_committee(pay, 8);
        std::vector<MinerBehavior> behavior(8, MinerBehavior::Honest);
        for (TxId i = 1; i <= 5; ++i)
            sc.push_mempool(service_tx(TxType::ServiceProof, 7, 200, i));
        const auto res = produce_meta_block(sc, 0, 0, 450, behavior, ctx);
        REQUIRE(res.outcome == MetaBlockOutcome::Produced);
        CHECK(res.block.txs.size() == 2);
        CHECK(res.block.full);
        CHECK(sc.mempool.size() == 3);
    }

    SUBCASE("too many silent members fail consensus") {
        SidechainState sc = chain_with_committee(pay, 8); // needs 2f+2 = 6 votes
        std::vector<MinerBehavior> behavior(8, MinerBehavior::Honest);
        behavior[1] = MinerBehavior::Lazy;
        behavior[2] = MinerBehavior::Lazy;
        behavior[3] = MinerBehavior::Malicious; // 5 honest votes < 6
        sc.committees[0].leader = 0;
        const auto res = produce_meta_block(sc, 0, 0, 1000, behavior, ctx);
        CHECK(res.outcome == MetaBlockOutcome::ConsensusFailure);
    }

    SUBCASE("misbehaving leader costs one round via view change") {
        SidechainState sc = chain_with_committee(pay, 8);
        std::vector<MinerBehavior> behavior(8, MinerBehavior::Honest);
        behavior[0] = MinerBehavior::Lazy;
        const auto res = produce_meta_block(sc, 0, 0, 1000, behavior, ctx);
        CHECK(res.outcome == MetaBlockOutcome::ViewChange);
        CHECK(sc.committees[0].leader == 1);
    }

    SUBCASE("invalid transactions are rejected, not blocked on") {
        SidechainState sc = chain_with_committee(pay, 8);
        std::vector<MinerBehavior> behavior(8, MinerBehavior::Honest);
        sc.push_mempool(service_tx(TxType::ServiceProof, 999, 200, 1)); // unknown contract
        sc.push_mempool(service_tx(TxType::ServiceProof, 7, 200, 2));
        const auto res = produce_meta_block(sc, 0, 0, 1000, behavior, ctx);
        REQUIRE(res.outcome == MetaBlockOutcome::Produced);
        CHECK(res.block.txs.size() == 1);
        CHECK(res.block.txs[0].id == 2);
        CHECK(ctx.rejected == 1);
    }

    SUBCASE("gated chains mine empty marker blocks") {
        SidechainState sc = chain_with_committee(pay, 8);
        std::vector<MinerBehavior> behavior(8, MinerBehavior::Honest);
        sc.gated = true;
        sc.push_mempool(service_tx(TxType::ServiceProof, 7, 200, 1));
        const auto res = produce_meta_block(sc, 3, 3, 1000, behavior, ctx);
        REQUIRE(res.outcome == MetaBlockOutcome::Produced);
        CHECK(res.block.empty_marker);
        CHECK(res.block.txs.empty());
        CHECK(sc.mempool.size() == 1);
    }
}

TEST_CASE("cross-chain instrumentation counts pending lookups elsewhere") {
    MainchainState main; // contract unknown on the mainchain
    ValidationContext ctx;
    ctx.main = &main;
    bool pending = false;
    ctx.pending_elsewhere = [&](ContractId, ModuleId) { return pending; };

    const Transaction tx = service_tx(TxType::ServiceProof, 31, 200, 1);
    CHECK_FALSE(validate_service_tx(tx, module_service_payment, ctx));
    CHECK(ctx.cross_chain_pending == 0);

    pending = true; // the record exists only as pending state on another module
    CHECK_FALSE(validate_service_tx(tx, module_service_payment, ctx));
    CHECK(ctx.cross_chain_pending == 1);
}

TEST_CASE("summary rules per module") {
    const ChainId pay{module_service_payment, 0};

    SUBCASE("service-payment counts proofs and sums payments per contract") {
        MetaBlock mb;
        mb.sidechain_id = pay;
        mb.epoch = 0;
        for (TxId i = 1; i <= 3; ++i)
            mb.txs.push_back(service_tx(TxType::ServiceProof, 7, 200, i));
        Transaction p1 = service_tx(TxType::ServicePayment, 7, 120, 4);
        p1.amount = 5;
        Transaction p2 = service_tx(TxType::ServicePayment, 7, 120, 5);
        p2.amount = 10;
        mb.txs.push_back(p1);
        mb.txs.push_back(p2);
        const SummaryBlock s = produce_summary_block(module_service_payment, 0, {&mb});
        REQUIRE(s.entries.size() == 1);
        const SummaryEntry& e = s.entries.at(SummaryKey{SummaryGroup::Payment, 7});
        CHECK(e.por_count == 3);
        CHECK(e.payment_total == 15);
    }

    SUBCASE("empty epoch yields an empty summary") {
        MetaBlock mb;
        mb.sidechain_id = pay;
        const SummaryBlock s = produce_summary_block(module_service_payment, 0, {&mb});
        CHECK(s.entries.empty());
        const SummaryBlock none = produce_summary_block(module_service_payment, 0, {});
        CHECK(none.entries.empty());
    }

    SUBCASE("dispute records proof and outcome") {
        MetaBlock mb;
        mb.sidechain_id = ChainId{module_dispute, 0};
        Transaction d = service_tx(TxType::Dispute, 9, 515, 8);
        d.ref_id = 42;
        d.outcome = DisputeOutcome::Penalize;
        mb.txs.push_back(d);
        const SummaryBlock s = produce_summary_block(module_dispute, 0, {&mb});
        const SummaryEntry& e = s.entries.at(SummaryKey{SummaryGroup::Dispute, 9});
        CHECK(e.dispute_proof == 42);
        CHECK(e.dispute_outcome == DisputeOutcome::Penalize);
    }

    SUBCASE("market matching records the deal parties and terms") {
        MetaBlock mb;
        mb.sidechain_id = ChainId{module_market_match, 0};
        Transaction deal = service_tx(TxType::Agreement, 5, 716, 9);
        deal.issuer = 77;       // server
        deal.counterparty = 88; // client
        deal.terms = 3;
        mb.txs.push_back(deal);
        const SummaryBlock s = produce_summary_block(module_market_match, 0, {&mb});
        const SummaryEntry& e = s.entries.at(SummaryKey{SummaryGroup::Match, 5});
        CHECK(e.server == 77);
        CHECK(e.client == 88);
        CHECK(e.terms == 3);
    }
}

TEST_CASE("summary recomputation is byte-identical") {
    Rng rng(7);
    for (int trial = 0; trial < 500; ++trial) {
        MetaBlock mb;
        mb.sidechain_id = ChainId{module_service_payment, 0};
        const int count = 1 + static_cast<int>(rng.next_below(20));
        for (int i = 0; i < count; ++i) {
            const ContractId cid = 1 + rng.next_below(5);
            if (rng.next_bernoulli(0.7)) {
                mb.txs.push_back(service_tx(TxType::ServiceProof, cid, 200,
                                            rng.next_u64()));
            } else {
                Transaction p = service_tx(TxType::ServicePayment, cid, 120, rng.next_u64());
                p.amount = static_cast<Money>(rng.next_below(100));
                mb.txs.push_back(p);
            }
        }
        const SummaryBlock a = produce_summary_block(module_service_payment, 0, {&mb});
        const SummaryBlock b = produce_summary_block(module_service_payment, 0, {&mb});
        CHECK(encode_summary_entries(a) == encode_summary_entries(b));
    }
}

TEST_CASE("sync-transaction verification and application") {
    const ChainId pay{module_service_payment, 0};
    SidechainState sc;
    sc.id = pay;
    MetaBlock mb;
    mb.sidechain_id = pay;
    mb.epoch = 0;
    for (TxId i = 1; i <= 3; ++i)
        mb.txs.push_back(service_tx(TxType::ServiceProof, 7, 200, i));
    Transaction p = service_tx(TxType::ServicePayment, 7, 120, 4);
    p.amount = 30;
    mb.txs.push_back(p);
    sc.meta_blocks.push_back(mb);

    SummaryBlock s = produce_summary_block(module_service_payment, 0, {&mb});
    SyncTransaction sync = create_sync_tx(module_service_payment, 0, {s}, 999, 1);

    CHECK(verify_sync_tx({&sc}, sync));

    SUBCASE("inflated payment fails verification") {
        SyncTransaction bad = sync;
        bad.summaries[0].entries[SummaryKey{SummaryGroup::Payment, 7}].payment_total += 1;
        CHECK_FALSE(verify_sync_tx({&sc}, bad));
    }

    SUBCASE("application dispenses payments from escrow") {
        MainchainState main = main_with_contract(7, 100);
        apply_sync(main, sync);
        const ContractVars& vars = main.state_vars.at(7);
        CHECK(vars.por_count == 3);
        CHECK(vars.payments_dispensed == 30);
        CHECK(vars.escrow == 70);
        CHECK(main.balance_of(11) == main.default_party_balance + 30);
        CHECK(main.last_synced_epoch.at(module_service_payment) == 0);
    }

    SUBCASE("empty summary application is the identity on state") {
        MainchainState main = main_with_contract(7, 100);
        const auto before = main.state_vars;
        SyncTransaction empty = create_sync_tx(module_service_payment, 0, {SummaryBlock{}}, 1, 1);
        apply_sync(main, empty);
        CHECK(main.state_vars == before);
    }

    SUBCASE("payments above escrow are an invariant violation") {
        MainchainState main = main_with_contract(7, 10);
        CHECK_THROWS_AS(apply_sync(main, sync), InvariantViolation);
    }
}

TEST_CASE("pruning is guarded, complete, and idempotent") {
    SidechainState sc;
    sc.id = ChainId{module_service_payment, 0};
    for (Epoch e = 0; e < 3; ++e) {
        MetaBlock mb;
        mb.sidechain_id = sc.id;
        mb.epoch = e;
        mb.bytes_used = 100;
        sc.meta_blocks.push_back(mb);
    }
    CHECK_THROWS_AS(prune(sc, 1, 0), PruneBeforeConfirm);

    std::uint64_t freed = 0;
    prune(sc, 1, 1, &freed);
    CHECK(freed == 200);
    CHECK(sc.meta_blocks.size() == 1);
    CHECK(sc.meta_blocks.front().epoch == 2);
    CHECK(sc.pruned_through == 1);

    prune(sc, 1, 1, &freed); // idempotent
    CHECK(freed == 0);
    CHECK(sc.meta_blocks.size() == 1);
}

TEST_CASE("main block production prioritizes syncs and guards balances") {
    MainchainState main;
    Transaction t1;
    t1.id = 1;
    t1.type = TxType::Transfer;
    t1.issuer = 5;
    t1.counterparty = 6;
    t1.amount = 10;
    t1.size_bytes = 100;
    Transaction sync;
    sync.id = 2;
    sync.type = TxType::Sync;
    sync.ref_id = 77;
    sync.size_bytes = 1024;
    main.mempool.push_back(t1);
    main.mempool.push_back(sync);

    SUBCASE("sync first") {
        const auto res = produce_main_block(main, 0, 1000000);
        REQUIRE(res.block.txs.size() == 2);
        CHECK(res.block.txs[0].type == TxType::Sync);
        CHECK(res.block.txs[1].type == TxType::Transfer);
    }

    SUBCASE("an oversized sync ships alone in a dedicated block") {
        Transaction bulk;
        bulk.id = 9;
        bulk.type = TxType::Sync;
        bulk.ref_id = 88;
        bulk.size_bytes = 5000; // wider than the block capacity below
        main.mempool.push_back(bulk);
        const auto first = produce_main_block(main, 0, 2000);
        REQUIRE(first.block.txs.size() == 1); // strict FIFO: the bulk sync blocks the rest
        CHECK(first.block.txs[0].id == 2);
        const auto second = produce_main_block(main, 1, 2000);
        REQUIRE(second.block.txs.size() == 1);
        CHECK(second.block.txs[0].id == 9);
        CHECK(second.block.bytes_used == 5000);
        const auto third = produce_main_block(main, 2, 2000);
        REQUIRE(third.block.txs.size() == 1);
        CHECK(third.block.txs[0].id == 1);
    }

    SUBCASE("empty mempool, empty block") {
        main.mempool.clear();
        const auto res = produce_main_block(main, 0, 1000000);
        CHECK(res.block.txs.empty());
    }

    SUBCASE("transfers above the sender balance are excluded") {
        Transaction big;
        big.id = 3;
        big.type = TxType::Transfer;
        big.issuer = 5;
        big.counterparty = 6;
        big.amount = main.default_party_balance + 1000;
        big.size_bytes = 100;
        main.mempool.push_back(big);
        const auto res = produce_main_block(main, 0, 1000000);
        CHECK(res.block.txs.size() == 2);
        CHECK(main.rejected == 1);
    }
}

TEST_CASE("heavy detection requests the backlog-clearing chain count") {
    const std::uint64_t epoch_cap = 1000;
    CHECK(detect_heavy(true, 2400, epoch_cap, epoch_cap, 3) == 3);
    CHECK(detect_heavy(false, 2400, epoch_cap, epoch_cap, 3) == 1);
    CHECK(detect_heavy(true, 0, epoch_cap, epoch_cap, 3) == 1);
    CHECK(detect_heavy(true, 900, epoch_cap, epoch_cap, 3) == 1); // backlog below one epoch
    CHECK(detect_heavy(true, 9000, epoch_cap, epoch_cap, 3) == 3); // capped
    CHECK(detect_heavy(true, 4800, 2 * epoch_cap, epoch_cap, 8) == 5);
}

TEST_CASE("sub-sidechain allocation grants full quotas within pools") {
    // two heavy modules competing for (25,35,35,40): the first takes four
    // full (4,3,2,1) quotas once one (9,12,3,6) quota is held back
    std::vector<SubchainRequest> requests = {
        {module_service_payment, 5, {4, 3, 2, 1}},
        {module_market_match, 3, {9, 12, 3, 6}},
    };
    const auto grants = allocate_subchains(requests, {25, 35, 35, 40}, 5);
    REQUIRE(grants.size() == 2);
    CHECK(grants[0].granted == 4);
    CHECK(grants[0].quota == std::vector<std::int64_t>{4, 3, 2, 1});
    CHECK(grants[1].granted == 1);
    CHECK(grants[1].quota == std::vector<std::int64_t>{9, 12, 3, 6});

    SUBCASE("a single request with ample miners gets its full quota") {
        const auto single = allocate_subchains({{module_dispute, 1, {4, 4}}}, {50, 50}, 5);
        REQUIRE(single.size() == 1);
        CHECK(single[0].granted == 1);
        CHECK_FALSE(single[0].no_capacity);
        CHECK(single[0].quota == std::vector<std::int64_t>{4, 4});
    }

    SUBCASE("a cramped pool scales the composition down proportionally") {
        const auto scaled = allocate_subchains({{module_dispute, 2, {12, 6}}}, {8, 4}, 5);
        REQUIRE(scaled.size() == 1);
        CHECK(scaled[0].granted == 1);
        CHECK_FALSE(scaled[0].no_capacity);
        CHECK(scaled[0].quota == std::vector<std::int64_t>{8, 4});
    }

    SUBCASE("a pool below the minimum committee has no capacity") {
        const auto none = allocate_subchains({{module_dispute, 2, {12, 6}}}, {2, 1}, 5);
        REQUIRE(none.size() == 1);
        CHECK(none[0].no_capacity);
        CHECK(none[0].granted == 1);
    }
}

TEST_CASE("sync committee matches the aggregate sub-committee composition") {
    MinerPopulation pop = MinerPopulation::create(100, 9, 0.0, 0.0);
    pop.recompute_scores(ScoreWeights{0.5, 0.3, 0.2});
    pop.assign_classes(2);

    // build two sub-committees of composition (4 class-1, 2 class-2) each
    std::vector<MinerIndex> class1, class2;
    for (MinerIndex i = 0; i < pop.size(); ++i)
        (pop.records()[i].klass == 1 ? class1 : class2).push_back(i);
    std::vector<Committee> subs(2);
    std::size_t c1 = 0, c2 = 0;
    for (auto& com : subs) {
        com.sidechain_id = ChainId{module_service_payment, static_cast<std::uint16_t>(&com - subs.data())};
        for (int k = 0; k < 4; ++k)
            com.members.push_back(class1[c1++]);
        for (int k = 0; k < 2; ++k)
            com.members.push_back(class2[c2++]);
    }

    Rng rng(5);
    const Committee sync = elect_sync_committee(subs, pop, 6, rng);
    std::map<int, int> by_class;
    for (MinerIndex m : sync.members)
        ++by_class[pop.records()[m].klass];
    CHECK(sync.members.size() == 6);
    CHECK(by_class[1] == 4);
    CHECK(by_class[2] == 2);
    CHECK(sync.role == CommitteeRole::SyncCommittee);

    // one sub-committee: the sync committee is that committee
    const Committee same = elect_sync_committee({subs[0]}, pop, 6, rng);
    CHECK(same.members == subs[0].members);

    // summary over two sub-sidechains equals the summary over their
    // concatenated meta-blocks
    MetaBlock a, b;
    a.sidechain_id = ChainId{module_service_payment, 0};
    b.sidechain_id = ChainId{module_service_payment, 1};
    a.txs.push_back(service_tx(TxType::ServiceProof, 3, 200, 1));
    b.txs.push_back(service_tx(TxType::ServiceProof, 3, 200, 2));
    const SummaryBlock split = produce_summary_block(module_service_payment, 0, {&a, &b});
    MetaBlock merged = a;
    merged.txs.push_back(b.txs[0]);
    const SummaryBlock joint = produce_summary_block(module_service_payment, 0, {&merged});
    CHECK(encode_summary_entries(split) == encode_summary_entries(joint));
}
