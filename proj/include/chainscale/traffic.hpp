#pragma once

#include <cstdint>
#include <map>
#include <unordered_map>
#include <vector>

#include "chainscale/rng.hpp"
#include "chainscale/types.hpp"

namespace chainscale {

struct ChainTarget {
    ChainId chain; // module-level; sub-sidechain fan-out happens at enqueue

    bool is_mainchain() const { return chain.is_mainchain(); }
};

// Prefix byte: 00xxxxxx routes to the mainchain, 11cccccc to module c's
// sidechain. Throws UnknownPrefix / UnassignedType respectively.
ChainTarget classify(std::uint8_t prefix, const ModuleTable& table);
std::uint8_t annotate(TxType type, const ModuleTable& table);

inline ChainTarget classify(const Transaction& tx, const ModuleTable& table) {
    return classify(tx.prefix, table);
}

enum class ContractState : std::uint8_t {
    Active = 0,
    Expired,
    Negotiating,
    Terminated,
};

struct ServiceContract {
    ContractId id = 0;
    PartyId server = 0;
    PartyId client = 0;
    ContractState state = ContractState::Active;
    Round duration_rounds = 0;        // remaining active rounds
    Round negotiation_remaining = 0;  // rounds left in the negotiation phase
    Money price_per_round = 0;
    Round active_since = 0;
    Round active_rounds_elapsed = 0;  // accrued across the current active period
    bool misbehaves_this_epoch = false;
    Round misbehave_round = -1;       // round whose proof is submitted invalid
};

struct TrafficParams {
    std::uint64_t contracts = 64000;
    Money price_per_round = 1;
    double dispute_rate_per_epoch = 0.10;
    double transfer_ratio = 2.0 / 98.0;      // transfers per service tx, by count
    double negotiation_mu = 3.0;             // sidechain rounds, normal distribution
    double negotiation_sigma = 1.0;
    Round negotiation_clamp_max = 10;
    int negotiation_msgs_per_round = 2;      // one ask + one offer by default
    Round duration_min = 5;
    Round duration_max = 15;
    std::uint32_t size_ask = 150;
    std::uint32_t size_offer = 150;
    std::uint32_t size_agreement = 716;
    std::uint32_t size_proof = 200;
    std::uint32_t size_payment = 120;
    std::uint32_t size_dispute = 515;
    std::uint32_t size_transfer = 100;
    std::uint64_t parties = 2000;            // transfer endpoints
    Round epoch_rounds = 10;                 // mainchain rounds per epoch
};

// Deterministic market workload: contract lifecycle, proof stream, payments,
// negotiations, disputes. Owns its rng; one instance per run.
class TrafficGenerator {
public:
    TrafficGenerator(const TrafficParams& params, const ModuleTable& table, std::uint64_t seed);

    // All transactions for one mainchain round, created at its start.
    std::vector<Transaction> gen_round_traffic(Round round);

    // Lifecycle stepping: expiry, negotiation draw, reactivation, scheduled
    // dispute terminations. The schedule depends only on the seed, so every
    // compared system consumes the identical stream.
    void advance_contracts(Round round);

    const std::unordered_map<ContractId, ServiceContract>& contracts() const {
        return contracts_;
    }

    std::uint64_t next_tx_id() { return ++tx_seq_; }

    std::uint64_t generated_count() const { return generated_; }
    std::uint64_t service_count() const { return service_generated_; }
    std::uint64_t transfer_count() const { return transfer_generated_; }

    // Escrow top-up requests produced alongside reactivation deals.
    Transaction make_transfer(Round round);

private:
    Transaction base_tx(TxType type, Round round);
    void schedule_epoch_misbehavior(Round round);

    TrafficParams params_;
    ModuleTable table_;
    Rng rng_;
    std::unordered_map<ContractId, ServiceContract> contracts_;
    std::vector<ContractId> contract_order_; // stable iteration order
    std::map<Round, std::vector<Transaction>> scheduled_disputes_;
    std::map<Round, std::vector<ContractId>> scheduled_terminations_;
    std::uint64_t tx_seq_ = 0;
    std::uint64_t generated_ = 0;
    std::uint64_t service_generated_ = 0;
    std::uint64_t transfer_generated_ = 0;
};

} // namespace chainscale
