#pragma once

#include <cstdint>
#include <initializer_list>

#include "chainscale/rng.hpp"

namespace chainscale {

// Keyed-PRF stand-in for a verifiable random function. eval is a pure
// function of (sk, input); verify structurally binds output and proof to
// (pk, input) so that flipping any bit of (input, output, proof) is
// rejected. It is not a cryptographic VRF: the binding uses public mixing
// rather than algebraic proofs.
struct VrfOutput {
    std::uint64_t value = 0;       // the random output, normalized as value / 2^64
    std::uint64_t proof_key = 0;   // per-input derived key
    std::uint64_t proof_bind = 0;  // binds (proof_key, pk, input)

    double unit() const { return static_cast<double>(value) * 0x1.0p-64; }
};

class VrfKeypair {
public:
    VrfKeypair() = default;

    explicit VrfKeypair(std::uint64_t sk_seed)
        : sk_a_(mix64(sk_seed ^ 0x517cc1b727220a95ULL)),
          sk_b_(mix64(sk_seed + 0x2545f4914f6cdd1dULL)),
          pk_(digest64("vrf-pk", {sk_a_, sk_b_})) {}

    std::uint64_t pk() const { return pk_; }

    VrfOutput eval(std::initializer_list<std::uint64_t> input) const {
        VrfOutput out;
        out.proof_key = digest64("vrf-key", {sk_a_, sk_b_, digest64(input)});
        out.value = mix64(out.proof_key ^ 0xa0761d6478bd642fULL);
        out.proof_bind = digest64("vrf-bind", {out.proof_key, pk_, digest64(input)});
        return out;
    }

    static bool verify(std::uint64_t pk, std::initializer_list<std::uint64_t> input,
                       const VrfOutput& out) {
        if (out.value != mix64(out.proof_key ^ 0xa0761d6478bd642fULL))
            return false;
        return out.proof_bind == digest64("vrf-bind", {out.proof_key, pk, digest64(input)});
    }

private:
    std::uint64_t sk_a_ = 0;
    std::uint64_t sk_b_ = 0;
    std::uint64_t pk_ = 0;
};

} // namespace chainscale
