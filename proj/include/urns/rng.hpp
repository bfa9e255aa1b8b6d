#pragma once

#include <cmath>
#include <cstdint>
#include <limits>

namespace urns {

// SplitMix64, used as a seed expander so that nearby seeds and replica ids
// land on unrelated points of the main generator's state space.
struct SplitMix64 {
    std::uint64_t state;

    explicit SplitMix64(std::uint64_t seed) : state(seed) {}

    std::uint64_t next() {
        std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }
};

// xoshiro256** 1.0
class Xoshiro256ss {
  public:
    using result_type = std::uint64_t;
    static constexpr result_type min() noexcept { return 0; }
    static constexpr result_type max() noexcept { return std::numeric_limits<result_type>::max(); }

    Xoshiro256ss() : Xoshiro256ss(0) {}

    explicit Xoshiro256ss(std::uint64_t seed) {
        SplitMix64 sm(seed);
        for (auto& word : s_) word = sm.next();
        if ((s_[0] | s_[1] | s_[2] | s_[3]) == 0) s_[0] = 1;
    }

    std::uint64_t operator()() {
        const std::uint64_t result = rotl(s_[1] * 5, 7) * 9;
        const std::uint64_t t = s_[1] << 17;
        s_[2] ^= s_[0];
        s_[3] ^= s_[1];
        s_[1] ^= s_[2];
        s_[0] ^= s_[3];
        s_[2] ^= t;
        s_[3] = rotl(s_[3], 45);
        return result;
    }

  private:
    static std::uint64_t rotl(std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }

    std::uint64_t s_[4];
};

// Per-replica random stream. The variate sequence is a pure function of
// (seed, replica_id); which thread runs the replica never matters.
class RngStream {
  public:
    explicit RngStream(std::uint64_t seed, std::uint64_t replica_id = 0)
        : gen_(mix(seed, replica_id)) {}

    std::uint64_t next_u64() { return gen_(); }

    // Uniform on [0, 1), 53-bit resolution.
    double uniform() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }

    // Consumes exactly one variate regardless of the outcome.
    bool bernoulli(double prob) { return uniform() < prob; }

    double exponential(double rate) { return -std::log1p(-uniform()) / rate; }

  private:
    static std::uint64_t mix(std::uint64_t seed, std::uint64_t replica_id) {
        SplitMix64 sm(seed + 0x9e3779b97f4a7c15ULL * (replica_id + 1));
        return sm.next();
    }

    Xoshiro256ss gen_;
};

}  // namespace urns
