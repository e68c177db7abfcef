#pragma once

#include <array>
#include <cmath>
#include <cstdint>

namespace groklab {

// Counter-based random stream built on the Philox-4x32-10 block function
// (Salmon et al., "Parallel random numbers: as easy as 1, 2, 3").
//
// Stream state is (key, counter). The key identifies the stream, the
// counter advances block by block, so any draw is a pure function of
// (seed, stream path, draw index) and runs are reproducible regardless
// of platform or thread count. Child streams are derived by hashing the
// parent key with the child index through the same block function.
class RngStream {
public:
    explicit RngStream(std::uint64_t seed) {
        key_[0] = static_cast<std::uint32_t>(seed);
        key_[1] = static_cast<std::uint32_t>(seed >> 32);
        counter_ = {0, 0, 0, 0};
        buf_pos_ = 4;
    }

    // Deterministic child stream: independent of draws made on the parent.
    RngStream split(std::uint64_t child_index) const {
        std::array<std::uint32_t, 4> ctr = {
            static_cast<std::uint32_t>(child_index),
            static_cast<std::uint32_t>(child_index >> 32),
            0x5eed50f5u, 0x9e3779b9u};
        auto block = philox(ctr, key_);
        std::uint64_t child_seed =
            (static_cast<std::uint64_t>(block[1]) << 32) | block[0];
        return RngStream(child_seed);
    }

    std::uint32_t next_u32() {
        if (buf_pos_ >= 4) {
            buf_ = philox(counter_, key_);
            advance_counter();
            buf_pos_ = 0;
        }
        return buf_[buf_pos_++];
    }

    std::uint64_t next_u64() {
        std::uint64_t lo = next_u32();
        std::uint64_t hi = next_u32();
        return (hi << 32) | lo;
    }

    // Uniform on (0,1]: never returns 0, safe for log().
    double uniform() {
        return (static_cast<double>(next_u64() >> 11) + 1.0) * 0x1p-53;
    }

    // Standard normal via Box-Muller; draws are consumed in pairs.
    double normal() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        double u1 = uniform();
        double u2 = uniform();
        double r = std::sqrt(-2.0 * std::log(u1));
        double a = 6.283185307179586476925286766559 * u2;
        spare_ = r * std::sin(a);
        have_spare_ = true;
        return r * std::cos(a);
    }

    // Serialization of the raw state for bit-exact checkpoint/resume.
    struct State {
        std::array<std::uint32_t, 2> key;
        std::array<std::uint32_t, 4> counter;
    };
    State state() const {
        // Flush partially consumed block: resume restarts at next block.
        return {key_, counter_};
    }
    static RngStream restore(const State& s) {
        RngStream r(0);
        r.key_ = s.key;
        r.counter_ = s.counter;
        r.buf_pos_ = 4;
        r.have_spare_ = false;
        return r;
    }

    // One Philox-4x32-10 block; exposed for known-answer tests.
    static std::array<std::uint32_t, 4> philox(std::array<std::uint32_t, 4> ctr,
                                               std::array<std::uint32_t, 2> key) {
        constexpr std::uint32_t M0 = 0xD2511F53u;
        constexpr std::uint32_t M1 = 0xCD9E8D57u;
        constexpr std::uint32_t W0 = 0x9E3779B9u;
        constexpr std::uint32_t W1 = 0xBB67AE85u;
        for (int round = 0; round < 10; ++round) {
            std::uint64_t p0 = static_cast<std::uint64_t>(M0) * ctr[0];
            std::uint64_t p1 = static_cast<std::uint64_t>(M1) * ctr[2];
            std::uint32_t hi0 = static_cast<std::uint32_t>(p0 >> 32);
            std::uint32_t lo0 = static_cast<std::uint32_t>(p0);
            std::uint32_t hi1 = static_cast<std::uint32_t>(p1 >> 32);
            std::uint32_t lo1 = static_cast<std::uint32_t>(p1);
            ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
            key[0] += W0;
            key[1] += W1;
        }
        return ctr;
    }

private:
    void advance_counter() {
        for (int i = 0; i < 4; ++i) {
            if (++counter_[i] != 0) break;
        }
    }

    std::array<std::uint32_t, 2> key_;
    std::array<std::uint32_t, 4> counter_;
    std::array<std::uint32_t, 4> buf_{};
    int buf_pos_ = 4;
    double spare_ = 0.0;
    bool have_spare_ = false;
};

}  // namespace groklab
