#pragma once

// Deterministic seeding helpers. FNV-1a gives a platform-stable string
// hash so seeded procedures are reproducible across std library
// implementations.

#include <cstdint>
#include <random>
#include <string_view>

namespace ctxlm {

inline std::uint64_t fnv1a64(std::string_view s, std::uint64_t h = 0xcbf29ce484222325ull) {
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001b3ull;
    }
    return h;
}

inline std::uint64_t mix_seed(std::uint64_t seed, std::string_view tag) {
    return fnv1a64(tag, seed ^ 0x9e3779b97f4a7c15ull);
}

inline std::mt19937_64 make_rng(std::uint64_t seed, std::string_view tag = {}) {
    return std::mt19937_64(tag.empty() ? seed : mix_seed(seed, tag));
}

}  // namespace ctxlm
