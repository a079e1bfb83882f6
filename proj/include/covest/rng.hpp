#pragma once

#include <cmath>
#include <cstdint>
#include <string_view>

namespace covest {

namespace detail {

// Finalizer from the SplitMix64 generator (Steele, Lea, Flood 2014).
inline constexpr std::uint64_t mix64(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

inline constexpr std::uint64_t GOLDEN_GAMMA = 0x9E3779B97F4A7C15ULL;

} // namespace detail

/// Stable combiner used everywhere a seed is derived from parts
/// (master seed, stream label, grid indices...). The exact recipe is part of
/// the reproducibility contract: h' = mix64(h ^ mix64(part + GAMMA)).
inline constexpr std::uint64_t seed_combine(std::uint64_t h, std::uint64_t part) {
    return detail::mix64(h ^ detail::mix64(part + detail::GOLDEN_GAMMA));
}

inline constexpr std::uint64_t seed_of_string(std::string_view s) {
    std::uint64_t h = 0xCBF29CE484222325ULL; // FNV-1a 64
    for (char c : s) {
        h ^= static_cast<unsigned char>(c);
        h *= 0x100000001B3ULL;
    }
    return h;
}

/// Counter-based generator: output i is mix64(key + i * GAMMA), i.e. the
/// SplitMix64 stream keyed by `key`. Substreams are derived by hashing the
/// parent key with a stream index, so trials can be assigned independent
/// streams whose draws do not depend on scheduling order.
class Rng {
public:
    explicit Rng(std::uint64_t key) : key_(key) {}

    static Rng from_parts(std::uint64_t master, std::uint64_t a) {
        return Rng(seed_combine(master, a));
    }
    static Rng from_parts(std::uint64_t master, std::uint64_t a, std::uint64_t b) {
        return Rng(seed_combine(seed_combine(master, a), b));
    }

    Rng substream(std::uint64_t idx) const { return Rng(seed_combine(key_, idx)); }

    std::uint64_t key() const { return key_; }

    std::uint64_t next_u64() {
        counter_ += detail::GOLDEN_GAMMA;
        return detail::mix64(key_ + counter_);
    }

    /// Uniform in [0, 1).
    double uniform() {
        return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    /// Integer in [0, n).
    std::uint64_t below(std::uint64_t n) {
        // Rejection-free multiply-shift; the bias is < 2^-64 * n, irrelevant here.
        return static_cast<std::uint64_t>((static_cast<__uint128_t>(next_u64()) * n) >> 64);
    }

    /// Standard normal via Box-Muller; one spare value cached.
    double normal() {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        double u1 = uniform();
        while (u1 <= 0.0) u1 = uniform();
        const double u2 = uniform();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double a = 6.283185307179586476925286766559 * u2;
        spare_ = r * std::sin(a);
        has_spare_ = true;
        return r * std::cos(a);
    }

    /// Standard exponential.
    double exponential() {
        double u = uniform();
        while (u >= 1.0) u = uniform();
        return -std::log1p(-u);
    }

private:
    std::uint64_t key_ = 0;
    std::uint64_t counter_ = 0;
    double spare_ = 0.0;
    bool has_spare_ = false;
};

} // namespace covest
