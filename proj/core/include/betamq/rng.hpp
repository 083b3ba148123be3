#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <string_view>

namespace betamq {

/// Deterministic random stream identified by (seed, stream-id).
///
/// The engine is std::mt19937_64 whose sequence is pinned by the standard, and
/// all distribution transforms are implemented here (inverse transform for the
/// exponential), so the same (seed, stream-id) replays the same draws across
/// runs. Streams are single-owner but movable.
class Rng {
   public:
    Rng(std::uint64_t seed, std::string_view stream_id)
        : engine_(mix(seed, hash_id(stream_id))) {}

    explicit Rng(std::uint64_t raw_seed) : engine_(raw_seed) {}

    Rng(Rng&&) = default;
    Rng& operator=(Rng&&) = default;
    Rng(const Rng&) = delete;
    Rng& operator=(const Rng&) = delete;

    std::uint64_t next_u64() { return engine_(); }

    /// Uniform in [0, 1), 53-bit resolution.
    double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    /// Uniform in (0, 1]; safe as a log argument.
    double uniform_pos() {
        return static_cast<double>((engine_() >> 11) + 1) * 0x1.0p-53;
    }

    /// Unbiased uniform integer in [0, bound). bound must be positive.
    std::uint64_t uniform_index(std::uint64_t bound) {
        // Lemire's multiply-shift with rejection to remove modulo bias.
        unsigned __int128 m =
            static_cast<unsigned __int128>(engine_()) * bound;
        auto lo = static_cast<std::uint64_t>(m);
        if (lo < bound) {
            const std::uint64_t threshold = (0 - bound) % bound;
            while (lo < threshold) {
                m = static_cast<unsigned __int128>(engine_()) * bound;
                lo = static_cast<std::uint64_t>(m);
            }
        }
        return static_cast<std::uint64_t>(m >> 64);
    }

    bool bernoulli(double p) { return uniform() < p; }

    /// Exp(rate) via inverse transform; mean 1/rate.
    double exponential(double rate) { return -std::log(uniform_pos()) / rate; }

   private:
    static std::uint64_t hash_id(std::string_view id) {
        // FNV-1a 64.
        std::uint64_t h = 0xcbf29ce484222325ULL;
        for (unsigned char ch : id) {
            h ^= ch;
            h *= 0x100000001b3ULL;
        }
        return h;
    }

    static std::uint64_t mix(std::uint64_t a, std::uint64_t b) {
        // splitmix64 finalizer over the combined words.
        std::uint64_t z = a + 0x9e3779b97f4a7c15ULL + (b << 1 | b >> 63);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    std::mt19937_64 engine_;
};

}  // namespace betamq
