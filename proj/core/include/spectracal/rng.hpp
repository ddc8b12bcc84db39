#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace spectracal {

/// Seeded random stream.
///
/// Wraps std::mt19937_64 (whose output sequence is fixed by the standard) and
/// converts raw bits to reals itself, so draws are identical across standard
/// library implementations. Sub-streams are derived by hashing, which lets
/// components be regenerated independently and in parallel.
class Rng {
public:
    using result_type = std::uint64_t;

    explicit Rng(std::uint64_t seed) : seed_(seed), engine_(seed) {}

    /// Stream for a named component of a run ("scene", "bank", "train", ...).
    static Rng named(std::uint64_t root_seed, std::string_view name);

    /// Independent child stream; does not advance this stream.
    Rng fork(std::uint64_t index) const;

    std::uint64_t seed() const noexcept { return seed_; }

    std::uint64_t next_u64() { return engine_(); }
    /// Uniform in [0, 1) with 53 random bits.
    double uniform();
    double uniform(double lo, double hi);
    /// Uniform integer in [0, n).
    std::uint64_t below(std::uint64_t n);
    double normal();

    // UniformRandomBitGenerator interface, for std::shuffle and friends.
    static constexpr result_type min() { return std::mt19937_64::min(); }
    static constexpr result_type max() { return std::mt19937_64::max(); }
    result_type operator()() { return engine_(); }

private:
    std::uint64_t seed_;
    std::mt19937_64 engine_;
};

std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t salt);

/// Fisher-Yates with Rng::below, so the permutation is library-independent.
template <typename It>
void shuffle(It first, It last, Rng& rng) {
    const auto n = static_cast<std::uint64_t>(last - first);
    for (std::uint64_t i = n; i > 1; --i) {
        const auto j = rng.below(i);
        std::swap(first[i - 1], first[j]);
    }
}

}  // namespace spectracal
