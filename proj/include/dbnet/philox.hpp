// Copyright (c) 2026 dbnet developers.
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <array>
#include <cmath>
#include <cstdint>

namespace dbnet {

/// Philox4x32-10 counter-based generator. Stateless block function: 128-bit
/// counter + 64-bit key -> 128 random bits. Streams are addressed by placing a
/// stream id in the high counter words, so trajectory k always sees the same
/// numbers no matter how work is scheduled across threads.
struct Philox4x32 {
    static constexpr std::uint32_t kMult0 = 0xD2511F53u;
    static constexpr std::uint32_t kMult1 = 0xCD9E8D57u;
    static constexpr std::uint32_t kWeyl0 = 0x9E3779B9u;
    static constexpr std::uint32_t kWeyl1 = 0xBB67AE85u;

    static std::array<std::uint32_t, 4> block(std::array<std::uint32_t, 4> ctr,
                                              std::array<std::uint32_t, 2> key) {
        for (int round = 0; round < 10; ++round) {
            std::uint64_t p0 = static_cast<std::uint64_t>(kMult0) * ctr[0];
            std::uint64_t p1 = static_cast<std::uint64_t>(kMult1) * ctr[2];
            std::array<std::uint32_t, 4> next{
                static_cast<std::uint32_t>(p1 >> 32) ^ ctr[1] ^ key[0],
                static_cast<std::uint32_t>(p1),
                static_cast<std::uint32_t>(p0 >> 32) ^ ctr[3] ^ key[1],
                static_cast<std::uint32_t>(p0)};
            ctr = next;
            key[0] += kWeyl0;
            key[1] += kWeyl1;
        }
        return ctr;
    }
};

/// One substream of Philox draws: key = seed, counter = (block index, stream id).
class RngStream {
  public:
    RngStream(std::uint64_t seed, std::uint64_t stream) : seed_(seed), stream_(stream) {}

    std::uint32_t next_u32() {
        if (pos_ == 4) refill();
        return buf_[pos_++];
    }

    std::uint64_t next_u64() {
        std::uint64_t lo = next_u32();
        std::uint64_t hi = next_u32();
        return (hi << 32) | lo;
    }

    /// Uniform double in (0, 1): 53 bits, offset half an ulp away from 0 and 1.
    double next_open() {
        return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1p-53;
    }

    double uniform(double a, double b) { return a + (b - a) * next_open(); }

    double exponential(double rate) { return -std::log(next_open()) / rate; }

    /// Uniform integer in [0, n) by rejection on the top range.
    std::uint64_t below(std::uint64_t n) {
        std::uint64_t limit = ~std::uint64_t(0) - ~std::uint64_t(0) % n;
        std::uint64_t x;
        do {
            x = next_u64();
        } while (x >= limit);
        return x % n;
    }

  private:
    void refill() {
        buf_ = Philox4x32::block(
            {static_cast<std::uint32_t>(block_), static_cast<std::uint32_t>(block_ >> 32),
             static_cast<std::uint32_t>(stream_), static_cast<std::uint32_t>(stream_ >> 32)},
            {static_cast<std::uint32_t>(seed_), static_cast<std::uint32_t>(seed_ >> 32)});
        ++block_;
        pos_ = 0;
    }

    std::uint64_t seed_;
    std::uint64_t stream_;
    std::uint64_t block_ = 0;
    std::array<std::uint32_t, 4> buf_{};
    int pos_ = 4;
};

}  // namespace dbnet
