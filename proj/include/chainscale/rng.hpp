#pragma once

#include <cmath>
#include <cstdint>
#include <initializer_list>
#include <string_view>
#include <vector>

namespace chainscale {

// splitmix64; used for seeding and as the mixing step of stream derivation.
inline std::uint64_t splitmix64(std::uint64_t& state) {
    std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

inline std::uint64_t mix64(std::uint64_t x) {
    return splitmix64(x);
}

// Deterministic 64-bit digest of a word sequence. Not cryptographic; it only
// has to be stable across runs and well distributed.
inline std::uint64_t digest64(std::initializer_list<std::uint64_t> words) {
    std::uint64_t h = 0x6a09e667f3bcc909ULL;
    for (std::uint64_t w : words) {
        h ^= mix64(w + 0x9e3779b97f4a7c15ULL * (h & 0xffff));
        h = mix64(h);
    }
    return h;
}

inline std::uint64_t digest64(std::string_view tag, std::initializer_list<std::uint64_t> words) {
    std::uint64_t h = 0x2545f4914f6cdd1dULL;
    for (char c : tag)
        h = mix64(h ^ static_cast<std::uint64_t>(static_cast<unsigned char>(c)));
    for (std::uint64_t w : words)
        h = mix64(h ^ w);
    return h;
}

// xoshiro256** with explicit state; every simulator stream owns one instance
// so runs are reproducible regardless of call interleaving.
class Rng {
public:
    Rng() : Rng(0) {}

    explicit Rng(std::uint64_t seed) {
        std::uint64_t sm = seed;
        for (auto& word : state_)
            word = splitmix64(sm);
    }

    // Derives an independent stream: same (seed, tag, words) -> same stream.
    static Rng stream(std::uint64_t seed, std::string_view tag,
                      std::initializer_list<std::uint64_t> words = {}) {
        return Rng(digest64(tag, {seed}) ^ digest64(words));
    }

    std::uint64_t next_u64() {
        const std::uint64_t result = rotl(state_[1] * 5, 7) * 9;
        const std::uint64_t t = state_[1] << 17;
        state_[2] ^= state_[0];
        state_[3] ^= state_[1];
        state_[1] ^= state_[2];
        state_[0] ^= state_[3];
        state_[2] ^= t;
        state_[3] = rotl(state_[3], 45);
        return result;
    }

    // Unbiased integer in [0, bound) via Lemire's method.
    std::uint64_t next_below(std::uint64_t bound) {
        if (bound == 0)
            return 0;
        while (true) {
            const std::uint64_t x = next_u64();
            const unsigned __int128 m = static_cast<unsigned __int128>(x) * bound;
            const std::uint64_t low = static_cast<std::uint64_t>(m);
            if (low >= bound || low >= (0 - bound) % bound)
                return static_cast<std::uint64_t>(m >> 64);
        }
    }

    // Uniform in [0, 1) with 53 random bits.
    double next_unit() {
        return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    }

    double next_unit_positive() {
        double u;
        do {
            u = next_unit();
        } while (u <= 0.0);
        return u;
    }

    // Box-Muller; implemented by hand so streams do not depend on libstdc++
    // distribution internals.
    double next_normal(double mu, double sigma) {
        if (!have_spare_) {
            const double u1 = next_unit_positive();
            const double u2 = next_unit();
            const double r = std::sqrt(-2.0 * std::log(u1));
            const double theta = 2.0 * 3.14159265358979323846 * u2;
            spare_ = r * std::sin(theta);
            have_spare_ = true;
            return mu + sigma * r * std::cos(theta);
        }
        have_spare_ = false;
        return mu + sigma * spare_;
    }

    bool next_bernoulli(double p) {
        return next_unit() < p;
    }

    template <typename T>
    void shuffle(std::vector<T>& v) {
        for (std::size_t i = v.size(); i > 1; --i) {
            const std::size_t j = static_cast<std::size_t>(next_below(i));
            std::swap(v[i - 1], v[j]);
        }
    }

    // k distinct indices from [0, n): the prefix of a partial Fisher-Yates pass.
    std::vector<std::uint32_t> sample_indices(std::uint32_t n, std::uint32_t k) {
        std::vector<std::uint32_t> idx(n);
        for (std::uint32_t i = 0; i < n; ++i)
            idx[i] = i;
        if (k > n)
            k = n;
        for (std::uint32_t i = 0; i < k; ++i) {
            const std::uint32_t j = i + static_cast<std::uint32_t>(next_below(n - i));
            std::swap(idx[i], idx[j]);
        }
        idx.resize(k);
        return idx;
    }

private:
    static std::uint64_t rotl(std::uint64_t x, int k) {
        return (x << k) | (x >> (64 - k));
    }

    std::uint64_t state_[4] = {};
    bool have_spare_ = false;
    double spare_ = 0.0;
};

} // namespace chainscale
