#include "chainscale/types.hpp"

#include <cstring>

namespace chainscale {

const char* tx_type_name(TxType t) {
    switch (t) {
    case TxType::Ask: return "ask";
    case TxType::Offer: return "offer";
    case TxType::Agreement: return "agreement";
    case TxType::ServiceProof: return "proof";
    case TxType::ServicePayment: return "payment";
    case TxType::Dispute: return "dispute";
    case TxType::Transfer: return "transfer";
    case TxType::Sync: return "sync";
    case TxType::EscrowCreate: return "escrow";
    }
    return "?";
}

std::string ChainId::name() const {
    if (is_mainchain())
        return "main";
    std::string s = "m" + std::to_string(static_cast<int>(module));
    s += "." + std::to_string(static_cast<int>(sub));
    return s;
}

namespace {

void put_u64(std::vector<std::uint8_t>& out, std::uint64_t v) {
    for (int i = 0; i < 8; ++i)
        out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
    for (int i = 0; i < 4; ++i)
        out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

} // namespace

std::vector<std::uint8_t> encode_summary_entries(const SummaryBlock& s) {
    std::vector<std::uint8_t> out;
    out.reserve(s.entries.size() * 64);
    for (const auto& [key, e] : s.entries) {
        put_u64(out, key.cid);
        out.push_back(static_cast<std::uint8_t>(key.group));
        out.push_back(static_cast<std::uint8_t>(e.dispute_outcome));
        out.push_back(0);
        out.push_back(0);
        put_u32(out, e.por_count);
        put_u64(out, static_cast<std::uint64_t>(e.payment_total));
        put_u64(out, e.dispute_proof);
        put_u64(out, static_cast<std::uint64_t>(e.dispute_round));
        put_u64(out, e.server);
        put_u64(out, e.client);
        put_u64(out, e.terms);
    }
    return out;
}

ModuleTable default_module_table() {
    ModuleTable t;
    t.modules = {{module_market_match, "match"},
                 {module_service_payment, "pay"},
                 {module_dispute, "dispute"}};
    t.owner[static_cast<std::size_t>(TxType::Ask)] = module_market_match;
    t.owner[static_cast<std::size_t>(TxType::Offer)] = module_market_match;
    t.owner[static_cast<std::size_t>(TxType::Agreement)] = module_market_match;
    t.owner[static_cast<std::size_t>(TxType::ServiceProof)] = module_service_payment;
    t.owner[static_cast<std::size_t>(TxType::ServicePayment)] = module_service_payment;
    t.owner[static_cast<std::size_t>(TxType::Dispute)] = module_dispute;
    t.owner[static_cast<std::size_t>(TxType::Transfer)] = mainchain_module;
    t.owner[static_cast<std::size_t>(TxType::Sync)] = mainchain_module;
    t.owner[static_cast<std::size_t>(TxType::EscrowCreate)] = mainchain_module;
    return t;
}

ModuleTable single_sidechain_table() {
    ModuleTable t;
    t.modules = {{1, "service"}};
    for (TxType type : {TxType::Ask, TxType::Offer, TxType::Agreement, TxType::ServiceProof,
                        TxType::ServicePayment, TxType::Dispute})
        t.owner[static_cast<std::size_t>(type)] = 1;
    t.owner[static_cast<std::size_t>(TxType::Transfer)] = mainchain_module;
    t.owner[static_cast<std::size_t>(TxType::Sync)] = mainchain_module;
    t.owner[static_cast<std::size_t>(TxType::EscrowCreate)] = mainchain_module;
    return t;
}

} // namespace chainscale
