#pragma once

// Philox4x32-10 (Salmon et al., "Parallel random numbers: as easy as 1, 2, 3").
// A counter-based generator: the output block is a pure function of
// (key, counter), so independent substreams are obtained by fixing part of
// the counter to a stream id. Results never depend on thread scheduling.

#include <array>
#include <cstdint>
#include <limits>

namespace convwalk {

using Philox4x32Counter = std::array<std::uint32_t, 4>;
using Philox4x32Key = std::array<std::uint32_t, 2>;

constexpr Philox4x32Counter philox4x32_10(Philox4x32Counter ctr, Philox4x32Key key) {
    constexpr std::uint32_t kM0 = 0xD2511F53u, kM1 = 0xCD9E8D57u;
    constexpr std::uint32_t kW0 = 0x9E3779B9u, kW1 = 0xBB67AE85u;
    for (int round = 0; round < 10; ++round) {
        const std::uint64_t p0 = std::uint64_t(kM0) * ctr[0];
        const std::uint64_t p1 = std::uint64_t(kM1) * ctr[2];
        const auto hi0 = std::uint32_t(p0 >> 32), lo0 = std::uint32_t(p0);
        const auto hi1 = std::uint32_t(p1 >> 32), lo1 = std::uint32_t(p1);
        ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
        key[0] += kW0;
        key[1] += kW1;
    }
    return ctr;
}

/// One random stream identified by (seed, stream id). Satisfies
/// UniformRandomBitGenerator with 64-bit output.
class RandomStream {
public:
    using result_type = std::uint64_t;

    RandomStream(std::uint64_t seed, std::uint64_t stream)
        : key_{std::uint32_t(seed), std::uint32_t(seed >> 32)}, stream_(stream) {}

    static constexpr result_type min() { return 0; }
    static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

    result_type operator()() {
        if (used_ == 2) refill();
        const result_type v = (std::uint64_t(block_[2 * used_ + 1]) << 32) | block_[2 * used_];
        ++used_;
        return v;
    }

    /// Uniform double in [0, 1) with 53 random bits.
    double uniform() { return double((*this)() >> 11) * 0x1.0p-53; }

    /// Uniform integer in [0, n), unbiased (Lemire's multiply-and-reject).
    std::uint64_t below(std::uint64_t n) {
        if (n <= 1) return 0;
        const std::uint64_t threshold = (0 - n) % n;
        for (;;) {
            const unsigned __int128 m = static_cast<unsigned __int128>((*this)()) * n;
            if (std::uint64_t(m) >= threshold) return std::uint64_t(m >> 64);
        }
    }

    /// A child stream, independent of this one and of its siblings.
    RandomStream substream(std::uint64_t tag) const {
        RandomStream s(0, mix(stream_ ^ mix(tag + 0x632BE59BD9B4E019ull)));
        s.key_ = key_;
        return s;
    }

private:
    friend constexpr std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t tag);

    static constexpr std::uint64_t mix(std::uint64_t z) {
        z += 0x9E3779B97F4A7C15ull;
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
        return z ^ (z >> 31);
    }

    void refill() {
        block_ = philox4x32_10({std::uint32_t(counter_), std::uint32_t(counter_ >> 32), std::uint32_t(stream_),
                                std::uint32_t(stream_ >> 32)},
                               key_);
        ++counter_;
        used_ = 0;
    }

    Philox4x32Key key_;
    std::uint64_t stream_;
    std::uint64_t counter_ = 0;
    Philox4x32Counter block_{};
    int used_ = 2;
};

/// A seed for an independent run derived from (seed, tag).
constexpr std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t tag) {
    return RandomStream::mix(seed ^ RandomStream::mix(tag + 0x3C6EF372FE94F82Bull));
}

}  // namespace convwalk
