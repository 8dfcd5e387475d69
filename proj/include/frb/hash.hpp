#pragma once

#include <cstdint>
#include <span>

namespace frb {

constexpr uint64_t kFnvOffsetBasis = 0xcbf29ce484222325ull;
constexpr uint64_t kFnvPrime = 0x100000001b3ull;

struct Fnv1a64 {
    uint64_t state = kFnvOffsetBasis;

    void feed(uint8_t byte) {
        state ^= byte;
        state *= kFnvPrime;
    }
    void feed(std::span<const uint8_t> bytes) {
        for (uint8_t b : bytes) feed(b);
    }
    // Little-endian serialization of wider words.
    void feed_u32(uint32_t v) {
        for (int i = 0; i < 4; i++) feed(uint8_t(v >> (8 * i)));
    }
    void feed_u64(uint64_t v) {
        for (int i = 0; i < 8; i++) feed(uint8_t(v >> (8 * i)));
    }
};

inline uint64_t fnv1a64(std::span<const uint8_t> bytes) {
    Fnv1a64 h;
    h.feed(bytes);
    return h.state;
}

} // namespace frb
