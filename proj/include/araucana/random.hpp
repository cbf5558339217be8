#ifndef ARAUCANA_RANDOM_HPP
#define ARAUCANA_RANDOM_HPP

#include <cstdint>
#include <random>

namespace araucana {

using Rng = std::mt19937_64;

/// Fixed sub-seed streams. A single user seed fans out to one independent
/// stream per component so that each stays reproducible on its own.
enum class SeedStream : std::uint64_t {
    SynthTrain = 0x01,
    SynthTest = 0x02,
    Forest = 0x10,
    Smote = 0x20,
    Split = 0x30,
};

/// splitmix64 finalizer over (seed, stream, index).
inline std::uint64_t derive_seed(std::uint64_t seed, SeedStream stream, std::uint64_t index = 0) {
    std::uint64_t z = seed + 0x9E3779B97F4A7C15ull * (static_cast<std::uint64_t>(stream) + 1) +
                      0xBF58476D1CE4E5B9ull * (index + 1);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
}

}  // namespace araucana

#endif
