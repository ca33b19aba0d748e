#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "chainscale/errors.hpp"

namespace chainscale {

using TxId = std::uint64_t;
using ContractId = std::uint64_t;
using PartyId = std::uint64_t;
using MinerIndex = std::uint32_t;
using Money = std::int64_t;
using Round = std::int64_t;
using Epoch = std::int32_t;

enum class TxType : std::uint8_t {
    Ask = 0,
    Offer,
    Agreement,      // contract-deal
    ServiceProof,   // proof of retrievability
    ServicePayment,
    Dispute,
    Transfer,
    Sync,
    EscrowCreate,
};

constexpr std::size_t tx_type_count = 9;

const char* tx_type_name(TxType t);

enum class DisputeOutcome : std::uint8_t {
    None = 0,
    Penalize = 1,
};

// Module id occupies the low 6 bits of a sidechain prefix byte (0xC0 | id).
using ModuleId = std::uint8_t;
constexpr ModuleId mainchain_module = 0;

struct ChainId {
    ModuleId module = mainchain_module;
    std::uint16_t sub = 0; // sub-sidechain index within the module

    bool is_mainchain() const { return module == mainchain_module; }

    friend bool operator==(const ChainId&, const ChainId&) = default;
    friend auto operator<=>(const ChainId&, const ChainId&) = default;

    std::string name() const;
};

struct Transaction {
    TxId id = 0;
    std::uint8_t prefix = 0;
    TxType type = TxType::Transfer;
    bool has_contract = false;
    ContractId contract_id = 0;
    PartyId issuer = 0;
    PartyId counterparty = 0;
    Money amount = 0;
    std::uint64_t terms = 0;   // agreed price per round for contract-deals
    std::uint64_t ref_id = 0;  // referenced tx: disputed proof, negotiated ask, sync payload
    bool valid = true;         // models cryptographic validity of carried proofs
    std::uint32_t size_bytes = 0;
    Round created_round = 0;
    DisputeOutcome outcome = DisputeOutcome::None;
    ModuleId sync_module = 0;
    Epoch sync_epoch = 0;

    friend bool operator==(const Transaction&, const Transaction&) = default;
};

struct MetaBlock {
    ChainId sidechain_id;
    Epoch epoch = 0;
    Round round = 0; // sidechain round index within the epoch
    std::vector<Transaction> txs;
    std::uint64_t capacity_bytes = 0;
    bool empty_marker = false; // produced while gated on a stalled dependency
    bool full = false;         // closed because the next pending tx did not fit
    std::uint64_t bytes_used = 0;
};

enum class SummaryGroup : std::uint8_t {
    Payment = 0, // proof counts and payment totals
    Dispute = 1,
    Match = 2,
};

struct SummaryKey {
    SummaryGroup group = SummaryGroup::Payment;
    ContractId cid = 0;

    friend bool operator==(const SummaryKey&, const SummaryKey&) = default;
    friend auto operator<=>(const SummaryKey&, const SummaryKey&) = default;
};

// Rounds from a dispute's creation to its published outcome; contract
// sanctions take effect from that round.
constexpr Round dispute_publication_lag = 1;

struct SummaryEntry {
    std::uint32_t por_count = 0;
    Money payment_total = 0;
    std::uint64_t dispute_proof = 0;
    Round dispute_round = 0;
    DisputeOutcome dispute_outcome = DisputeOutcome::None;
    PartyId server = 0;
    PartyId client = 0;
    std::uint64_t terms = 0;

    friend bool operator==(const SummaryEntry&, const SummaryEntry&) = default;
};

struct SummaryBlock {
    ModuleId module = 0;
    Epoch epoch = 0;
    std::map<SummaryKey, SummaryEntry> entries;
    Round covered_from = 0; // global sidechain round range of the covered meta-blocks
    Round covered_to = -1;
    std::uint32_t covered_chains = 1;

    std::uint64_t size_bytes(std::uint64_t base, std::uint64_t per_entry) const {
        return base + per_entry * entries.size();
    }

    friend bool operator==(const SummaryBlock&, const SummaryBlock&) = default;
};

// Canonical fixed-width rendering of the entries; summary determinism checks
// compare these bytes.
std::vector<std::uint8_t> encode_summary_entries(const SummaryBlock& s);

enum class MinerBehavior : std::uint8_t {
    Honest = 0,
    Lazy,     // never votes, never leads
    Malicious,
};

struct MinerRecord {
    std::uint64_t pk = 0;
    double mining_power = 0.0;   // P_m
    std::uint64_t participation = 0; // C_s, sidechain consensus rounds served
    std::uint64_t disputes = 0;      // D
    double score = 0.0;
    int klass = 1; // 1 = top class
    MinerBehavior behavior = MinerBehavior::Honest;
};

enum class CommitteeRole : std::uint8_t {
    Primary = 0,
    Backup,
    SyncCommittee,
};

struct Committee {
    ChainId sidechain_id;
    std::vector<MinerIndex> members;
    std::size_t leader = 0;
    CommitteeRole role = CommitteeRole::Primary;
    int backup_rank = 0;

    std::size_t size() const { return members.size(); }

    // committee sized 3f+2; f floors for sizes off the lattice
    std::int64_t fault_bound() const {
        const std::int64_t s = static_cast<std::int64_t>(members.size());
        return s >= 2 ? (s - 2) / 3 : 0;
    }

    std::int64_t votes_needed() const { return 2 * fault_bound() + 2; }
};

struct MainBlock {
    Round round = 0;
    std::vector<Transaction> txs;
    std::uint64_t capacity_bytes = 0;
    std::uint64_t bytes_used = 0;
};

// Traffic assignment fixed at setup: which module owns each transaction type.
struct ModuleTable {
    struct Entry {
        ModuleId id = 0;
        std::string name;
    };

    std::vector<Entry> modules; // sidechain modules, priority order
    std::array<ModuleId, tx_type_count> owner{}; // per TxType; 0 = mainchain

    bool has_module(ModuleId m) const {
        for (const auto& e : modules)
            if (e.id == m)
                return true;
        return false;
    }

    ModuleId owner_of(TxType t) const { return owner[static_cast<std::size_t>(t)]; }
};

// Storage-market default: matching, service-payment exchange, dispute.
ModuleTable default_module_table();
// Single-sidechain comparator: every service type on one sidechain.
ModuleTable single_sidechain_table();

constexpr ModuleId module_market_match = 1;
constexpr ModuleId module_service_payment = 2;
constexpr ModuleId module_dispute = 3;

} // namespace chainscale
