#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace tippool {

__extension__ using uint128 = unsigned __int128;

/// SplitMix64 finalizer. Used to derive independent stream seeds from a
/// user seed plus a stream or sweep index.
constexpr std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

constexpr std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t index) {
    return splitmix64(splitmix64(seed) ^ splitmix64(index + 0x632be59bd9b4e019ULL));
}

/// SplitMix64 as a generator. Cheap to seed, used for short per-message
/// substreams.
class SplitMix64Engine {
public:
    using result_type = std::uint64_t;
    explicit SplitMix64Engine(std::uint64_t seed) : state_(seed) {}
    static constexpr result_type min() { return 0; }
    static constexpr result_type max() { return ~result_type{0}; }
    result_type operator()() {
        const std::uint64_t out = splitmix64(state_);
        state_ += 0x9e3779b97f4a7c15ULL;
        return out;
    }

private:
    std::uint64_t state_;
};

/// Seedable generator with a fixed, documented algorithm.
///
/// The default engine is std::mt19937_64, whose output sequence is fixed by
/// the C++ standard. The standard distributions are implementation-defined,
/// so every conversion to a variate is done here by hand; results are then
/// bit-identical across standard libraries (up to libm's log1p).
template <class Engine>
class BasicRng {
public:
    explicit BasicRng(std::uint64_t seed) : engine_(seed) {}

    std::uint64_t next_u64() { return engine_(); }

    /// Uniform double in [0, 1) with 53 random bits.
    double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    /// Exponential variate with the given rate (> 0).
    double exponential(double rate) { return -std::log1p(-uniform()) / rate; }

    /// Uniform integer in [0, n), n > 0. Lemire's multiply-and-reject.
    std::uint64_t index(std::uint64_t n) {
        uint128 m = static_cast<uint128>(engine_()) * n;
        auto low = static_cast<std::uint64_t>(m);
        if (low < n) {
            const std::uint64_t threshold = (0 - n) % n;
            while (low < threshold) {
                m = static_cast<uint128>(engine_()) * n;
                low = static_cast<std::uint64_t>(m);
            }
        }
        return static_cast<std::uint64_t>(m >> 64);
    }

    bool bernoulli(double p) { return uniform() < p; }

private:
    Engine engine_;
};

using Rng = BasicRng<std::mt19937_64>;
using SubstreamRng = BasicRng<SplitMix64Engine>;

}  // namespace tippool
