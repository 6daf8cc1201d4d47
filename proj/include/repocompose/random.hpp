#pragma once

#include <cstdint>
#include <random>
#include <string_view>
#include <vector>

namespace repocompose {

/// Seeded generator with platform-independent draws. The engine is
/// std::mt19937_64 (bit-exact by the standard); the distributions are
/// implemented here because the standard library ones are not.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    std::uint64_t next() { return engine_(); }

    /// Uniform integer in [0, bound). `bound` must be positive.
    std::uint64_t below(std::uint64_t bound);

    /// Uniform double in [0, 1) with 53 random bits.
    double unit();

    bool bernoulli(double p) { return unit() < p; }

    template <typename T>
    void shuffle(std::vector<T>& items) {
        for (std::size_t i = items.size(); i > 1; --i) {
            std::size_t j = static_cast<std::size_t>(below(i));
            std::swap(items[i - 1], items[j]);
        }
    }

private:
    std::mt19937_64 engine_;
};

std::uint64_t fnv1a64(std::string_view bytes);

/// splitmix64 finalizer.
std::uint64_t mix64(std::uint64_t x);

/// Seed for one example: combines a run seed with a stable key.
std::uint64_t derive_seed(std::uint64_t seed, std::string_view key);

} // namespace repocompose
