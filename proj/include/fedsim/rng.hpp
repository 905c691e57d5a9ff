#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

namespace fedsim {

/// SplitMix64 finalizer, used to mix seeds so that streams derived from
/// (base, salt) pairs are decorrelated.
constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept {
    x += 0x9e3779b97f4a7c15ull;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
    return x ^ (x >> 31);
}

constexpr std::uint64_t derive_seed(std::uint64_t base, std::uint64_t salt) noexcept {
    return splitmix64(splitmix64(base) ^ splitmix64(salt));
}

template <typename... Salts>
constexpr std::uint64_t derive_seed(std::uint64_t base, std::uint64_t salt,
                                    std::uint64_t next, Salts... rest) noexcept {
    return derive_seed(derive_seed(base, salt), next, rest...);
}

/// Deterministic random source. Every draw is built from raw mt19937_64
/// output, so sequences do not depend on the standard library's
/// distribution implementations and are reproducible across platforms.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    /// Uniform double in [0, 1) with 53 bits of precision.
    double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    /// Standard normal draw (Box-Muller); consumes two uniforms.
    double normal() {
        constexpr double two_pi = 6.283185307179586476925286766559;
        const double u1 = 1.0 - uniform();  // (0, 1], keeps the log finite
        const double u2 = uniform();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(two_pi * u2);
    }

    double normal(double mean, double stddev) { return mean + stddev * normal(); }

    /// Uniform integer in [0, n); n must be positive.
    std::int64_t below(std::int64_t n) {
        const auto k = static_cast<std::int64_t>(uniform() * static_cast<double>(n));
        return k < n ? k : n - 1;
    }

    /// In-place Fisher-Yates shuffle.
    template <typename T>
    void shuffle(std::vector<T>& values) {
        for (std::size_t i = values.size(); i > 1; --i) {
            const auto j = static_cast<std::size_t>(below(static_cast<std::int64_t>(i)));
            std::swap(values[i - 1], values[j]);
        }
    }

private:
    std::mt19937_64 engine_;
};

}  // namespace fedsim
