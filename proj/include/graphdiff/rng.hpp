#pragma once

// Counter-based random numbers (Philox4x32-10).  Every (seed, stream, block)
// triple maps to the same 128 output bits no matter which thread asks for
// them, which is what makes the parallel and serial drivers bit-identical.

#include <cmath>
#include <cstdint>
#include <string_view>

namespace graphdiff {

namespace detail {

inline constexpr uint32_t kPhiloxW32A = 0x9E3779B9u;
inline constexpr uint32_t kPhiloxW32B = 0xBB67AE85u;
inline constexpr uint32_t kPhiloxM4x32A = 0xD2511F53u;
inline constexpr uint32_t kPhiloxM4x32B = 0xCD9E8D57u;

struct U32x4 {
    uint32_t v[4];
};

inline void philox_round(U32x4& ctr, uint32_t k0, uint32_t k1) {
    const uint64_t p0 = uint64_t(kPhiloxM4x32A) * ctr.v[0];
    const uint64_t p1 = uint64_t(kPhiloxM4x32B) * ctr.v[2];
    const uint32_t hi0 = uint32_t(p0 >> 32), lo0 = uint32_t(p0);
    const uint32_t hi1 = uint32_t(p1 >> 32), lo1 = uint32_t(p1);
    ctr = U32x4{{hi1 ^ ctr.v[1] ^ k0, lo1, hi0 ^ ctr.v[3] ^ k1, lo0}};
}

// One 128-bit Philox block: key = seed, counter = (block, stream).
inline U32x4 philox4x32(uint64_t seed, uint64_t stream, uint64_t block) {
    U32x4 ctr{{uint32_t(block), uint32_t(block >> 32),
               uint32_t(stream), uint32_t(stream >> 32)}};
    uint32_t k0 = uint32_t(seed), k1 = uint32_t(seed >> 32);
    for (int r = 0; r < 10; ++r) {
        philox_round(ctr, k0, k1);
        k0 += kPhiloxW32A;
        k1 += kPhiloxW32B;
    }
    return ctr;
}

// Map 64 random bits to (0,1]: 53-bit mantissa, never zero, so log() is safe.
inline double bits_to_open_unit(uint64_t x) {
    return double((x >> 11) + 1) * 0x1.0p-53;
}

}  // namespace detail

// Stream ids carve one 64-bit space into (purpose tag, replica, lane) so no
// two logical noise sources ever share a counter sequence.
inline constexpr uint64_t kStreamTagEdgeNoise = 0;
inline constexpr uint64_t kStreamTagOracle = 1;
inline constexpr uint64_t kStreamTagSignFlip = 2;
inline constexpr uint64_t kStreamTagAux = 3;

inline constexpr uint64_t make_stream(uint64_t tag, uint64_t replica, uint64_t lane) {
    return (tag << 60) | ((replica & ((uint64_t(1) << 40) - 1)) << 20) |
           (lane & ((uint64_t(1) << 20) - 1));
}

// FNV-1a, used to derive per-experiment seeds from one master seed so the
// experiments inside a verification suite do not share noise.
inline constexpr uint64_t fnv1a64(std::string_view s) {
    uint64_t h = 0xcbf29ce484222325ull;
    for (char c : s) {
        h ^= uint64_t(uint8_t(c));
        h *= 0x100000001b3ull;
    }
    return h;
}

// Draws N(0,1) variates from one stream.  Each Philox block yields two
// uniforms which Box-Muller turns into two normals; the second one is cached.
class NormalStream {
public:
    NormalStream(uint64_t seed, uint64_t stream)
        : seed_(seed), stream_(stream) {}

    double next() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        const detail::U32x4 b = detail::philox4x32(seed_, stream_, block_++);
        const uint64_t a = uint64_t(b.v[0]) | (uint64_t(b.v[1]) << 32);
        const uint64_t c = uint64_t(b.v[2]) | (uint64_t(b.v[3]) << 32);
        const double u1 = detail::bits_to_open_unit(a);
        const double u2 = detail::bits_to_open_unit(c);
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double ang = 6.283185307179586476925287 * u2;
        spare_ = r * std::sin(ang);
        have_spare_ = true;
        return r * std::cos(ang);
    }

private:
    uint64_t seed_;
    uint64_t stream_;
    uint64_t block_ = 0;
    double spare_ = 0.0;
    bool have_spare_ = false;
};

// Uniform (0,1] draws from one stream; one block per draw, used for coin
// flips in test oracles where throughput does not matter.
class UniformStream {
public:
    UniformStream(uint64_t seed, uint64_t stream)
        : seed_(seed), stream_(stream) {}

    double next() {
        const detail::U32x4 b = detail::philox4x32(seed_, stream_, block_++);
        const uint64_t a = uint64_t(b.v[0]) | (uint64_t(b.v[1]) << 32);
        return detail::bits_to_open_unit(a);
    }

private:
    uint64_t seed_;
    uint64_t stream_;
    uint64_t block_ = 0;
};

}  // namespace graphdiff
