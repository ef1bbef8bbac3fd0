#pragma once

// Reproducible random streams.
//
// Every random draw in the library comes from a Stream identified by the
// triple (seed, experiment, replicate). The stream state is derived by
// hashing the triple through SplitMix64 and then running xoshiro256**
// (Blackman & Vigna). Both algorithms are fully specified integer recipes,
// so the output is identical on every platform and independent of how
// replicates are scheduled across threads.

#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <string_view>

namespace maxstable {

/// SplitMix64 finalizer applied to a running state, see https://prng.di.unimi.it
class SplitMix64
{
  public:
    explicit constexpr SplitMix64(std::uint64_t seed) : state_(seed) {}

    constexpr std::uint64_t operator()()
    {
        std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ull);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
        return z ^ (z >> 31);
    }

  private:
    std::uint64_t state_;
};

/// xoshiro256** 1.0
class Xoshiro256
{
  public:
    using result_type = std::uint64_t;

    explicit constexpr Xoshiro256(std::uint64_t seed)
    {
        SplitMix64 init(seed);
        for (auto& word : s_) {
            word = init();
        }
    }

    static constexpr result_type min() { return 0; }
    static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

    constexpr result_type operator()()
    {
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
    static constexpr std::uint64_t rotl(std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }

    std::array<std::uint64_t, 4> s_{};
};

/// FNV-1a over a string; used to turn experiment names into stream tags.
constexpr std::uint64_t fnv1a(std::string_view text)
{
    std::uint64_t hash = 0xcbf29ce484222325ull;
    for (char c : text) {
        hash ^= static_cast<unsigned char>(c);
        hash *= 0x100000001b3ull;
    }
    return hash;
}

/// One replicate's private source of randomness.
class Stream
{
  public:
    explicit constexpr Stream(std::uint64_t derived_seed) : engine_(derived_seed) {}

    std::uint64_t bits() { return engine_(); }

    /// Uniform on the open interval (0, 1), 53-bit resolution.
    double uniform() { return (static_cast<double>(engine_() >> 11) + 0.5) * 0x1.0p-53; }

    /// Standard exponential by inversion.
    double exponential() { return -std::log(uniform()); }

  private:
    Xoshiro256 engine_;
};

/// Identifies a family of streams: the user seed plus an experiment tag.
struct StreamKey
{
    std::uint64_t seed = 0;
    std::uint64_t experiment = 0;

    constexpr StreamKey() = default;
    constexpr StreamKey(std::uint64_t seed_, std::uint64_t experiment_) : seed(seed_), experiment(experiment_) {}
    constexpr StreamKey(std::uint64_t seed_, std::string_view experiment_name)
        : seed(seed_), experiment(fnv1a(experiment_name))
    {
    }

    /// Sub-key for a nested experiment (e.g. one x value inside a sweep).
    constexpr StreamKey child(std::uint64_t tag) const
    {
        SplitMix64 mix(experiment ^ (tag * 0xd1b54a32d192ed03ull));
        return {seed, mix()};
    }

    /// Stream for replicate r of this experiment.
    Stream stream(std::uint64_t replicate) const
    {
        SplitMix64 mix(seed);
        std::uint64_t h = mix();
        h = SplitMix64(h ^ experiment)();
        h = SplitMix64(h ^ (replicate * 0x9e3779b97f4a7c15ull + 0x632be59bd9b4e019ull))();
        return Stream(h);
    }
};

}  // namespace maxstable
