#pragma once

#include <cstdint>
#include <random>

namespace driftlab {

// SplitMix64 finalizer. Used both for seed derivation and for hashing packed
// count keys; full-avalanche, so low-entropy counters spread well.
constexpr std::uint64_t mix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ull;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
    return x ^ (x >> 31);
}

// Counter-based split of a master seed. Distinct (a, b, c) give independent
// child seeds, so parallel runs stay reproducible regardless of scheduling.
constexpr std::uint64_t split_seed(std::uint64_t master, std::uint64_t a,
                                   std::uint64_t b = 0, std::uint64_t c = 0) {
    std::uint64_t h = mix64(master ^ 0x5851f42d4c957f2dull);
    h = mix64(h ^ a);
    h = mix64(h ^ b);
    h = mix64(h ^ c);
    return h;
}

// mt19937_64 with hand-rolled draw helpers. std::uniform_*_distribution is
// implementation-defined, which would break byte-identical outputs across
// standard libraries; these mappings are pinned.
class Rng {
  public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    std::uint64_t next_u64() { return engine_(); }

    // uniform in [0, 1), 53-bit resolution
    double next_unit() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    // uniform in (0, 1)
    double next_open_unit() {
        double u;
        do {
            u = next_unit();
        } while (u == 0.0);
        return u;
    }

    // unbiased uniform in [0, bound) via rejection
    std::uint32_t next_below(std::uint32_t bound) {
        const std::uint64_t span = bound;
        const std::uint64_t limit = UINT64_MAX - UINT64_MAX % span;
        std::uint64_t v;
        do {
            v = next_u64();
        } while (v >= limit);
        return static_cast<std::uint32_t>(v % span);
    }

    bool next_bool() { return (next_u64() >> 63) != 0; }

  private:
    std::mt19937_64 engine_;
};

}  // namespace driftlab
