#pragma once

#include <bit>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <utility>
#include <vector>

namespace ckms {

/// All randomness in the simulator flows through mt19937_64 engines and the
/// draw helpers below, so that a seed reproduces the same results on every
/// standard library (the engine is fully specified; the standard
/// distributions are not).
using RandomEngine = std::mt19937_64;

// One mixing round of splitmix64.
constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

/// Child-seed rule: stream `tag` of `base` is splitmix64(base + C*(tag+1)).
/// Distinct tags yield distinct children of a fixed base, so trials and
/// sub-streams stay reproducible regardless of execution order.
constexpr std::uint64_t derive_seed(std::uint64_t base, std::uint64_t tag) noexcept {
    return splitmix64(base + 0x9e3779b97f4a7c15ULL * (tag + 1));
}

// Named sub-streams of a trial seed.
enum class SeedStream : std::uint64_t {
    deployment = 1,
    clustering = 2,
    node_keys = 3,
    controller_keys = 4,
    queries = 5,
};

constexpr std::uint64_t derive_seed(std::uint64_t base, SeedStream stream,
                                    std::uint64_t index = 0) noexcept {
    return derive_seed(derive_seed(base, static_cast<std::uint64_t>(stream)), index);
}

/// Uniform double in [0, 1) built from the top 53 bits of one engine draw.
inline double uniform_unit(RandomEngine& rng) {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

/// Uniform integer in [0, bound), unbiased via masked rejection.
inline std::uint64_t uniform_below(RandomEngine& rng, std::uint64_t bound) {
    if (bound == 0) throw std::invalid_argument("uniform_below: bound must be positive");
    if (bound == 1) return 0;
    const std::uint64_t mask = ~std::uint64_t{0} >> std::countl_zero(bound - 1);
    for (;;) {
        const std::uint64_t v = rng() & mask;
        if (v < bound) return v;
    }
}

/// First `count` entries of a random permutation of `pool` (partial
/// Fisher-Yates). The draw order is part of the deterministic contract.
template <typename T>
std::vector<T> sample_without_replacement(RandomEngine& rng, std::vector<T> pool,
                                          std::size_t count) {
    if (count > pool.size())
        throw std::invalid_argument("sample_without_replacement: count exceeds pool size");
    for (std::size_t i = 0; i < count; ++i) {
        const std::size_t j =
            i + static_cast<std::size_t>(uniform_below(rng, pool.size() - i));
        std::swap(pool[i], pool[j]);
    }
    pool.resize(count);
    return pool;
}

}  // namespace ckms
