#include "chainscale/codec.hpp"

#include "chainscale/errors.hpp"
#include "chainscale/traffic.hpp"

namespace chainscale {

namespace {

void put_u8(std::vector<std::uint8_t>& out, std::uint8_t v) { out.push_back(v); }

void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
    for (int i = 0; i < 4; ++i)
        out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

void put_u64(std::vector<std::uint8_t>& out, std::uint64_t v) {
    for (int i = 0; i < 8; ++i)
        out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

std::uint32_t get_u32(std::span<const std::uint8_t> in, std::size_t at) {
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i)
        v |= static_cast<std::uint32_t>(in[at + i]) << (8 * i);
    return v;
}

std::uint64_t get_u64(std::span<const std::uint8_t> in, std::size_t at) {
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i)
        v |= static_cast<std::uint64_t>(in[at + i]) << (8 * i);
    return v;
}

constexpr std::uint8_t flag_valid = 0x01;
constexpr std::uint8_t flag_has_contract = 0x02;

} // namespace

std::vector<std::uint8_t> encode_transaction(const Transaction& tx, const ModuleTable& table) {
    if (tx.size_bytes < tx_header_bytes)
        throw InvariantViolation("transaction size smaller than canonical header");
    if (tx.prefix != annotate(tx.type, table))
        throw InvariantViolation("prefix inconsistent with transaction type");
    std::vector<std::uint8_t> out;
    out.reserve(tx.size_bytes);
    put_u8(out, tx.prefix);
    put_u8(out, static_cast<std::uint8_t>(tx.type));
    std::uint8_t flags = 0;
    if (tx.valid)
        flags |= flag_valid;
    if (tx.has_contract)
        flags |= flag_has_contract;
    put_u8(out, flags);
    put_u8(out, static_cast<std::uint8_t>(tx.outcome));
    put_u64(out, tx.id);
    put_u64(out, tx.contract_id);
    put_u64(out, tx.issuer);
    put_u64(out, tx.counterparty);
    put_u64(out, static_cast<std::uint64_t>(tx.amount));
    put_u64(out, tx.terms);
    put_u64(out, tx.ref_id);
    put_u64(out, static_cast<std::uint64_t>(tx.created_round));
    put_u32(out, tx.sync_module);
    put_u32(out, static_cast<std::uint32_t>(tx.sync_epoch));
    put_u32(out, tx.size_bytes);
    out.resize(tx.size_bytes, 0);
    return out;
}

Transaction decode_transaction(std::span<const std::uint8_t> bytes, const ModuleTable& table) {
    if (bytes.size() < tx_header_bytes)
        throw MalformedEncoding("truncated transaction");
    Transaction tx;
    tx.prefix = bytes[0];
    const std::uint8_t raw_type = bytes[1];
    if (raw_type >= tx_type_count)
        throw MalformedEncoding("unknown transaction type tag");
    tx.type = static_cast<TxType>(raw_type);
    const std::uint8_t flags = bytes[2];
    if (flags & ~(flag_valid | flag_has_contract))
        throw MalformedEncoding("unknown flag bits");
    tx.valid = flags & flag_valid;
    tx.has_contract = flags & flag_has_contract;
    if (bytes[3] > static_cast<std::uint8_t>(DisputeOutcome::Penalize))
        throw MalformedEncoding("unknown dispute outcome");
    tx.outcome = static_cast<DisputeOutcome>(bytes[3]);
    tx.id = get_u64(bytes, 4);
    tx.contract_id = get_u64(bytes, 12);
    tx.issuer = get_u64(bytes, 20);
    tx.counterparty = get_u64(bytes, 28);
    tx.amount = static_cast<Money>(get_u64(bytes, 36));
    tx.terms = get_u64(bytes, 44);
    tx.ref_id = get_u64(bytes, 52);
    tx.created_round = static_cast<Round>(get_u64(bytes, 60));
    tx.sync_module = static_cast<ModuleId>(get_u32(bytes, 68));
    tx.sync_epoch = static_cast<Epoch>(get_u32(bytes, 72));
    tx.size_bytes = get_u32(bytes, 76);
    if (tx.size_bytes != bytes.size())
        throw MalformedEncoding("declared size disagrees with encoded length");
    for (std::size_t i = tx_header_bytes; i < bytes.size(); ++i)
        if (bytes[i] != 0)
            throw MalformedEncoding("nonzero padding");
    if (tx.prefix != annotate(tx.type, table))
        throw MalformedEncoding("prefix inconsistent with transaction type");
    return tx;
}

} // namespace chainscale
