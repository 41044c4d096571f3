#pragma once

#include <cstdint>
#include <string>
#include <string_view>

namespace sico {

/// FNV-1a 64-bit. Used for persisted cache keys and derived RNG seeds, so it
/// must stay byte-stable across platforms and releases (std::hash is neither).
constexpr std::uint64_t fnv1a64(std::string_view data) {
    std::uint64_t h = 0xcbf29ce484222325ull;
    for (unsigned char c : data) {
        h ^= c;
        h *= 0x100000001b3ull;
    }
    return h;
}

std::string to_hex(std::uint64_t value);

/// Tiny deterministic RNG (splitmix64). Standard <random> distributions are
/// not bit-stable across library implementations; this is.
class SplitMix64 {
public:
    explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next() {
        std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ull);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
        return z ^ (z >> 31);
    }

    /// Uniform in [0, 1).
    double next_unit() {
        return static_cast<double>(next() >> 11) * 0x1.0p-53;
    }

    /// Uniform integer in [0, n). n must be > 0.
    std::uint64_t next_below(std::uint64_t n) {
        return next() % n;
    }

private:
    std::uint64_t state_;
};

/// Mixes a stream index into a base seed.
constexpr std::uint64_t mix_seed(std::uint64_t base, std::uint64_t index) {
    std::uint64_t z = base ^ (0x9e3779b97f4a7c15ull * (index + 1));
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    return z ^ (z >> 27);
}

} // namespace sico
