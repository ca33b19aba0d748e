#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "chainscale/types.hpp"

namespace chainscale {

// Canonical transaction layout: an 80-byte little-endian header followed by
// zero padding up to the declared size. Field order and widths are documented
// in docs/encoding.md and are stable within a major release.
constexpr std::uint32_t tx_header_bytes = 80;

std::vector<std::uint8_t> encode_transaction(const Transaction& tx, const ModuleTable& table);

// Exact inverse of encode_transaction; throws MalformedEncoding on truncated,
// padded-garbage, or prefix-inconsistent input.
Transaction decode_transaction(std::span<const std::uint8_t> bytes, const ModuleTable& table);

inline std::vector<std::uint8_t> encode_transaction(const Transaction& tx) {
    return encode_transaction(tx, default_module_table());
}

inline Transaction decode_transaction(std::span<const std::uint8_t> bytes) {
    return decode_transaction(bytes, default_module_table());
}

} // namespace chainscale
