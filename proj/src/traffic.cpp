#include "chainscale/traffic.hpp"

#include <algorithm>
#include <cmath>

#include "chainscale/errors.hpp"

namespace chainscale {

ChainTarget classify(std::uint8_t prefix, const ModuleTable& table) {
    const std::uint8_t hi = prefix >> 6;
    if (hi == 0b00)
        return ChainTarget{ChainId{mainchain_module, 0}};
    if (hi == 0b11) {
        const ModuleId module = prefix & 0x3f;
        if (!table.has_module(module))
            throw UnknownPrefix("prefix names an unconfigured module sidechain");
        return ChainTarget{ChainId{module, 0}};
    }
    throw UnknownPrefix("prefix outside the configured classification table");
}

std::uint8_t annotate(TxType type, const ModuleTable& table) {
    const ModuleId owner = table.owner_of(type);
    if (owner == mainchain_module) {
        // Transfer / escrow / sync always belong somewhere; a service type
        // mapped to the mainchain means the table was never configured.
        if (type != TxType::Transfer && type != TxType::Sync && type != TxType::EscrowCreate)
            throw UnassignedType("transaction type is not assigned to any module");
        return 0x00;
    }
    if (!table.has_module(owner))
        throw UnassignedType("transaction type assigned to an unconfigured module");
    return static_cast<std::uint8_t>(0xC0 | owner);
}

TrafficGenerator::TrafficGenerator(const TrafficParams& params, const ModuleTable& table,
                                   std::uint64_t seed)
    : params_(params), table_(table), rng_(Rng::stream(seed, "traffic")) {
    contracts_.reserve(params_.contracts);
    contract_order_.reserve(params_.contracts);
    for (std::uint64_t i = 0; i < params_.contracts; ++i) {
        ServiceContract c;
        c.id = i + 1;
        c.server = digest64("server", {seed, c.id});
        c.client = digest64("client", {seed, c.id});
        c.state = ContractState::Active;
        // stagger initial expiry so renewals spread across rounds
        c.duration_rounds = params_.duration_min +
            static_cast<Round>(rng_.next_below(static_cast<std::uint64_t>(
                params_.duration_max - params_.duration_min + 1)));
        c.price_per_round = params_.price_per_round;
        c.active_since = 0;
        contracts_.emplace(c.id, c);
        contract_order_.push_back(c.id);
    }
}

Transaction TrafficGenerator::base_tx(TxType type, Round round) {
    Transaction tx;
    tx.id = next_tx_id();
    tx.type = type;
    tx.prefix = annotate(type, table_);
    tx.created_round = round;
    switch (type) {
    case TxType::Ask: tx.size_bytes = params_.size_ask; break;
    case TxType::Offer: tx.size_bytes = params_.size_offer; break;
    case TxType::Agreement: tx.size_bytes = params_.size_agreement; break;
    case TxType::ServiceProof: tx.size_bytes = params_.size_proof; break;
    case TxType::ServicePayment: tx.size_bytes = params_.size_payment; break;
    case TxType::Dispute: tx.size_bytes = params_.size_dispute; break;
    case TxType::Transfer: tx.size_bytes = params_.size_transfer; break;
    default: tx.size_bytes = params_.size_transfer; break;
    }
    return tx;
}

Transaction TrafficGenerator::make_transfer(Round round) {
    Transaction tx = base_tx(TxType::Transfer, round);
    tx.issuer = digest64("party", {rng_.next_below(params_.parties)});
    tx.counterparty = digest64("party", {rng_.next_below(params_.parties)});
    tx.amount = 1 + static_cast<Money>(rng_.next_below(10));
    ++generated_;
    ++transfer_generated_;
    return tx;
}

void TrafficGenerator::schedule_epoch_misbehavior(Round round) {
    for (ContractId cid : contract_order_) {
        auto& c = contracts_[cid];
        c.misbehaves_this_epoch = false;
        c.misbehave_round = -1;
        if (c.state == ContractState::Terminated)
            continue;
        if (rng_.next_unit() < params_.dispute_rate_per_epoch) {
            c.misbehaves_this_epoch = true;
            c.misbehave_round =
                round + static_cast<Round>(rng_.next_below(
                            static_cast<std::uint64_t>(params_.epoch_rounds)));
        }
    }
}

void TrafficGenerator::advance_contracts(Round round) {
    if (round % params_.epoch_rounds == 0)
        schedule_epoch_misbehavior(round);
    // dispute outcomes published one round after the dispute was issued
    if (auto it = scheduled_terminations_.find(round); it != scheduled_terminations_.end()) {
        for (ContractId cid : it->second) {
            auto c = contracts_.find(cid);
            if (c != contracts_.end())
                c->second.state = ContractState::Terminated;
        }
        scheduled_terminations_.erase(it);
    }
    for (ContractId cid : contract_order_) {
        auto& c = contracts_[cid];
        if (c.state == ContractState::Active && c.duration_rounds <= 0) {
            // expiry and negotiation entry happen within the same round
            c.state = ContractState::Expired;
        }
        if (c.state == ContractState::Expired) {
            c.state = ContractState::Negotiating;
            double len = rng_.next_normal(params_.negotiation_mu, params_.negotiation_sigma);
            Round rounds = static_cast<Round>(std::llround(len));
            rounds = std::clamp<Round>(rounds, 1, params_.negotiation_clamp_max);
            c.negotiation_remaining = rounds;
        }
    }
}

std::vector<Transaction> TrafficGenerator::gen_round_traffic(Round round) {
    std::vector<Transaction> out;
    out.reserve(contracts_.size() + 16);
    std::uint64_t service_this_round = 0;

    auto push_service = [&](Transaction tx) {
        ++generated_;
        ++service_generated_;
        ++service_this_round;
        out.push_back(std::move(tx));
    };

    // disputes scheduled when an invalid proof went out the round before
    if (auto it = scheduled_disputes_.find(round); it != scheduled_disputes_.end()) {
        for (Transaction& d : it->second) {
            d.created_round = round;
            push_service(std::move(d));
        }
        scheduled_disputes_.erase(it);
    }

    for (ContractId cid : contract_order_) {
        auto& c = contracts_[cid];
        if (c.state == ContractState::Active) {
            if (c.duration_rounds > 0) {
                Transaction proof = base_tx(TxType::ServiceProof, round);
                proof.has_contract = true;
                proof.contract_id = c.id;
                proof.issuer = c.server;
                proof.valid = !(c.misbehaves_this_epoch && round == c.misbehave_round);
                if (!proof.valid) {
                    // an observer disputes it next round; the outcome lands
                    // one round later and terminates the contract
                    Transaction d = base_tx(TxType::Dispute, round + 1);
                    d.has_contract = true;
                    d.contract_id = c.id;
                    d.issuer = digest64("observer", {proof.id});
                    d.ref_id = proof.id;
                    d.outcome = DisputeOutcome::Penalize;
                    scheduled_disputes_[round + 1].push_back(std::move(d));
                    scheduled_terminations_[round + 1 + dispute_publication_lag].push_back(c.id);
                }
                push_service(std::move(proof));
                --c.duration_rounds;
                ++c.active_rounds_elapsed;
                if (c.duration_rounds == 0) {
                    // contract ends: dispense the accrued service payment
                    Transaction pay = base_tx(TxType::ServicePayment, round);
                    pay.has_contract = true;
                    pay.contract_id = c.id;
                    pay.issuer = c.server;
                    pay.amount = c.price_per_round * c.active_rounds_elapsed;
                    push_service(std::move(pay));
                }
            }
        } else if (c.state == ContractState::Negotiating) {
            const int asks = (params_.negotiation_msgs_per_round + 1) / 2;
            const int offers = params_.negotiation_msgs_per_round / 2;
            for (int i = 0; i < asks; ++i) {
                Transaction ask = base_tx(TxType::Ask, round);
                ask.has_contract = true;
                ask.contract_id = c.id;
                ask.issuer = c.client;
                push_service(std::move(ask));
            }
            for (int i = 0; i < offers; ++i) {
                Transaction offer = base_tx(TxType::Offer, round);
                offer.has_contract = true;
                offer.contract_id = c.id;
                offer.issuer = c.server;
                push_service(std::move(offer));
            }
            --c.negotiation_remaining;
            if (c.negotiation_remaining <= 0) {
                // negotiation ends with the issuance of a contract-deal
                Transaction deal = base_tx(TxType::Agreement, round);
                deal.has_contract = true;
                deal.contract_id = c.id;
                deal.issuer = c.server;
                deal.counterparty = c.client;
                deal.terms = static_cast<std::uint64_t>(c.price_per_round);
                push_service(std::move(deal));
                c.state = ContractState::Active;
                c.active_since = round;
                c.active_rounds_elapsed = 0;
                c.duration_rounds = params_.duration_min +
                    static_cast<Round>(rng_.next_below(static_cast<std::uint64_t>(
                        params_.duration_max - params_.duration_min + 1)));

                // renewal escrow top-up, processed on the mainchain
                Transaction escrow = base_tx(TxType::EscrowCreate, round);
                escrow.size_bytes = params_.size_transfer;
                escrow.has_contract = true;
                escrow.contract_id = c.id;
                escrow.issuer = c.client;
                escrow.amount = c.price_per_round * c.duration_rounds;
                ++generated_;
                out.push_back(std::move(escrow));
            }
        }
    }

    // keep service:transfer counts at the configured ratio
    const std::uint64_t transfers = static_cast<std::uint64_t>(
        std::ceil(static_cast<double>(service_this_round) * params_.transfer_ratio));
    for (std::uint64_t i = 0; i < transfers; ++i)
        out.push_back(make_transfer(round));
    return out;
}

} // namespace chainscale
