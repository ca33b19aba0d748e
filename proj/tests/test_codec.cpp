#include <doctest.h>

#include "chainscale/codec.hpp"
#include "chainscale/rng.hpp"
#include "chainscale/traffic.hpp"

using namespace chainscale;

namespace {

Transaction random_tx(Rng& rng) {
    Transaction tx;
    const TxType types[] = {TxType::Ask,        TxType::Offer,    TxType::Agreement,
                            TxType::ServiceProof, TxType::ServicePayment, TxType::Dispute,
                            TxType::Transfer,   TxType::Sync,     TxType::EscrowCreate};
    tx.type = types[rng.next_below(9)];
    tx.prefix = annotate(tx.type, default_module_table());
    tx.id = rng.next_u64();
    tx.has_contract = rng.next_bernoulli(0.7);
    tx.contract_id = tx.has_contract ? rng.next_below(1 << 20) : 0;
    tx.issuer = rng.next_u64();
    tx.counterparty = rng.next_u64();
    tx.amount = static_cast<Money>(rng.next_below(1 << 30));
    tx.terms = rng.next_below(1000);
    tx.ref_id = rng.next_u64();
    tx.valid = rng.next_bernoulli(0.9);
    tx.size_bytes = tx_header_bytes + static_cast<std::uint32_t>(rng.next_below(700));
    tx.created_round = static_cast<Round>(rng.next_below(1000));
    tx.outcome = rng.next_bernoulli(0.2) ? DisputeOutcome::Penalize : DisputeOutcome::None;
    tx.sync_module = static_cast<ModuleId>(rng.next_below(4));
    tx.sync_epoch = static_cast<Epoch>(rng.next_below(100));
    return tx;
}

} // namespace

TEST_CASE("dispute and contract-deal transactions encode at their declared sizes") {
    Transaction dispute;
    dispute.type = TxType::Dispute;
    dispute.prefix = annotate(TxType::Dispute, default_module_table());
    dispute.has_contract = true;
    dispute.contract_id = 7;
    dispute.size_bytes = 515;
    CHECK(encode_transaction(dispute).size() == 515);

    Transaction deal;
    deal.type = TxType::Agreement;
    deal.prefix = annotate(TxType::Agreement, default_module_table());
    deal.has_contract = true;
    deal.contract_id = 7;
    deal.size_bytes = 716;
    CHECK(encode_transaction(deal).size() == 716);
}

TEST_CASE("encode/decode round-trips field for field") {
    Rng rng(1234);
    for (int i = 0; i < 500; ++i) {
        const Transaction tx = random_tx(rng);
        const auto bytes = encode_transaction(tx);
        CHECK(bytes.size() == tx.size_bytes);
        const Transaction back = decode_transaction(bytes);
        CHECK(back == tx);
    }
}

TEST_CASE("identical transactions encode to identical bytes") {
    Rng rng(99);
    const Transaction tx = random_tx(rng);
    CHECK(encode_transaction(tx) == encode_transaction(tx));
}

TEST_CASE("decode rejects malformed input") {
    CHECK_THROWS_AS(decode_transaction(std::vector<std::uint8_t>{}), MalformedEncoding);

    Rng rng(5);
    Transaction tx = random_tx(rng);
    auto bytes = encode_transaction(tx);

    SUBCASE("truncated") {
        bytes.resize(bytes.size() - 1);
        CHECK_THROWS_AS(decode_transaction(bytes), MalformedEncoding);
    }
    SUBCASE("prefix byte inconsistent with type") {
        bytes[0] ^= 0x01;
        CHECK_THROWS_AS(decode_transaction(bytes), MalformedEncoding);
    }
    SUBCASE("declared size disagrees") {
        bytes.push_back(0);
        CHECK_THROWS_AS(decode_transaction(bytes), MalformedEncoding);
    }
    SUBCASE("garbled padding") {
        if (bytes.size() > tx_header_bytes) {
            bytes.back() = 0xFF;
            CHECK_THROWS_AS(decode_transaction(bytes), MalformedEncoding);
        }
    }
    SUBCASE("unknown type tag") {
        bytes[1] = 0x7F;
        CHECK_THROWS_AS(decode_transaction(bytes), MalformedEncoding);
    }
}

TEST_CASE("summary entries encode deterministically") {
    SummaryBlock s;
    s.module = module_service_payment;
    s.epoch = 3;
    SummaryEntry e;
    e.por_count = 3;
    e.payment_total = 15;
    s.entries[SummaryKey{SummaryGroup::Payment, 7}] = e;
    SummaryEntry d;
    d.dispute_proof = 42;
    d.dispute_outcome = DisputeOutcome::Penalize;
    s.entries[SummaryKey{SummaryGroup::Dispute, 9}] = d;

    const auto bytes = encode_summary_entries(s);
    CHECK(bytes == encode_summary_entries(s));
    CHECK(bytes.size() == 2 * 64);

    SummaryBlock tampered = s;
    tampered.entries[SummaryKey{SummaryGroup::Payment, 7}].payment_total = 16;
    CHECK(bytes != encode_summary_entries(tampered));
}
