#pragma once
// Deterministic random plumbing. All stochastic stages draw through the
// mappers below rather than std <random> distributions, whose outputs are
// implementation-defined; byte-identical artifacts across toolchains depend
// on this. Seeds for independent units of work are derived by mixing, so
// results do not depend on execution order.

#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

namespace rffp {

// splitmix64 finalizer; good avalanche, cheap, stable.
inline std::uint64_t mix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ull;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
    return x ^ (x >> 31);
}

inline std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t a) {
    return mix64(seed ^ mix64(a));
}

inline std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t a, std::uint64_t b) {
    return mix_seed(mix_seed(seed, a), b);
}

inline std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t a, std::uint64_t b,
                              std::uint64_t c) {
    return mix_seed(mix_seed(seed, a, b), c);
}

inline std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t a, std::uint64_t b,
                              std::uint64_t c, std::uint64_t d) {
    return mix_seed(mix_seed(seed, a, b, c), d);
}

// Deterministic draws over mt19937_64 with fixed bit-to-value mappings.
class Rng {
  public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    std::uint64_t next_u64() { return engine_(); }

    // Uniform in [0, 1) with 53-bit resolution.
    double uniform() { return double(engine_() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    // Box-Muller; one value per call, pair cached.
    double normal() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        double u1, u2;
        do {
            u1 = uniform();
        } while (u1 <= 0.0);
        u2 = uniform();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double a = 6.283185307179586476925286766559 * u2;
        spare_ = r * std::sin(a);
        have_spare_ = true;
        return r * std::cos(a);
    }

    // Rayleigh with unit mean-square (E[r^2] = 1).
    double rayleigh() {
        double u;
        do {
            u = uniform();
        } while (u <= 0.0);
        return std::sqrt(-std::log(u));
    }

    // Uniform integer in [0, n).
    std::uint64_t below(std::uint64_t n) {
        // Rejection keeps the draw unbiased for any n.
        const std::uint64_t limit = ~0ull - ~0ull % n;
        std::uint64_t v;
        do {
            v = engine_();
        } while (v >= limit);
        return v % n;
    }

    int sign() { return (engine_() >> 63) ? 1 : -1; }

    // Fisher-Yates over indices [0, n).
    template <typename Int>
    void shuffle(std::vector<Int>& v) {
        for (std::size_t i = v.size(); i > 1; --i) {
            const std::size_t j = std::size_t(below(i));
            std::swap(v[i - 1], v[j]);
        }
    }

  private:
    std::mt19937_64 engine_;
    double spare_ = 0.0;
    bool have_spare_ = false;
};

}
