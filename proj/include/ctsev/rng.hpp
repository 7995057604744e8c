#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace ctsev {

/// One named draw sequence. Conversions from raw engine output are done here
/// rather than with <random> distributions so sequences are identical across
/// standard library implementations.
class RngStream {
  public:
    explicit RngStream(std::uint64_t key) : engine_(key) {}

    /// Uniform in [0, 1) with 53 random bits.
    double uniform01() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }
    /// Uniform integer in [lo, hi], unbiased.
    std::int64_t uniform_int(std::int64_t lo, std::int64_t hi);
    bool bernoulli(double p) { return uniform01() < p; }
    std::uint64_t next() { return engine_(); }

  private:
    std::mt19937_64 engine_;
};

/// Seed holder that hands out independent named sub-streams. A stream depends
/// only on (seed, name), never on which other streams were drawn from.
class Rng {
  public:
    explicit Rng(std::uint64_t seed) : seed_(seed) {}

    std::uint64_t seed() const { return seed_; }
    RngStream stream(std::string_view name) const;
    /// Child generator for a named scope, e.g. one per patient or fold.
    Rng derive(std::string_view name) const;

  private:
    std::uint64_t seed_;
};

std::uint64_t splitmix64(std::uint64_t x);
std::uint64_t fnv1a64(std::string_view text);

} // namespace ctsev
