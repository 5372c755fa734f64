#pragma once

#include <cstdint>
#include <random>

namespace lsr {

/// splitmix64 finalizer.
constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

/// Seed of the private stream for run `run` of sweep cell `cell`.
///
/// Every random quantity in a sweep is drawn from the stream derived here, so
/// the result of a run depends only on (master, cell, run) and never on which
/// worker executed it.
constexpr std::uint64_t derive_seed(std::uint64_t master, std::uint64_t cell,
                                    std::uint64_t run) noexcept {
    return mix64(mix64(mix64(master) ^ cell) ^ (run * 0xd1b54a32d192ed03ULL));
}

class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    /// Uniform on [0, 1) with 53 random bits.
    double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    double normal() { return normal_(engine_); }

    /// Uniform integer in [0, n).
    std::uint64_t below(std::uint64_t n) {
        return static_cast<std::uint64_t>(uniform() * static_cast<double>(n));
    }

private:
    std::mt19937_64 engine_;
    std::normal_distribution<double> normal_;
};

}  // namespace lsr
