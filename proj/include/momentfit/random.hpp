#pragma once

#include <cstdint>
#include <random>

namespace momentfit {

// SplitMix64 step; used to expand user seeds into independent streams.
std::uint64_t splitmix64(std::uint64_t& state) noexcept;

// Seed for stream `index` of a run seeded with `seed` (e.g. one per trial).
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t index) noexcept;

// mt19937_64 with hand-written transforms so sequences agree across standard
// libraries (std distributions are implementation-defined).
class Rng {
public:
    explicit Rng(std::uint64_t seed);

    std::uint64_t bits() { return engine_(); }
    // Uniform on [0, 1) with 53 random bits.
    double uniform();
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
    // Standard normal via Box-Muller.
    double normal();
    std::uint64_t below(std::uint64_t bound);

private:
    std::mt19937_64 engine_;
    double spare_ = 0.0;
    bool has_spare_ = false;
};

}  // namespace momentfit
