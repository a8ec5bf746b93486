#pragma once

#include <cstdint>
#include <random>

namespace evx::netsim {

/// Seeded random source shared by every stochastic element of one simulation.
///
/// The engine is std::mt19937_64, whose output sequence is fixed by the
/// standard. Derived distributions are implemented here rather than taken from
/// <random> because the library distributions are implementation-defined, and
/// pinned regression values have to survive a change of standard library.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : seed_(seed), engine_(seed) {}

    std::uint64_t seed() const { return seed_; }

    std::uint64_t next_u64() { return engine_(); }

    /// Uniform on [0, 1) with 53 bits of resolution.
    double uniform01();

    /// Uniform integer in [0, bound). bound must be non-zero.
    std::uint64_t uniform_below(std::uint64_t bound);

    /// Standard normal sample (Marsaglia polar method, second value cached).
    double gaussian();

private:
    std::uint64_t seed_;
    std::mt19937_64 engine_;
    bool has_spare_ = false;
    double spare_ = 0.0;
};

}  // namespace evx::netsim
