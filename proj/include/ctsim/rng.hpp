#ifndef CTSIM_RNG_HPP
#define CTSIM_RNG_HPP

#include <cmath>
#include <cstdint>
#include <random>
#include <string_view>

namespace ctsim {

namespace detail {

inline uint64_t splitmix64(uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

inline uint64_t fnv1a(std::string_view s) {
    uint64_t h = 1469598103934665603ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    return h;
}

} // namespace detail

// Seeded random stream. Distributions are implemented inline on top of the
// raw 64-bit generator so that draws are identical on every platform and
// standard library.
class Rng {
public:
    Rng() : engine_(0) {}
    explicit Rng(uint64_t seed) : engine_(seed) {}

    uint64_t next_u64() { return engine_(); }

    // Uniform in [0, 1), 53-bit resolution.
    double uniform01() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

    // Uniform integer in [0, n).
    uint64_t uniform_index(uint64_t n) {
        // Rejection-free modulo bias is negligible for simulation-scale n,
        // but stay exact anyway.
        if (n == 0) return 0;
        uint64_t threshold = (~n + 1) % n;
        for (;;) {
            uint64_t r = engine_();
            if (r >= threshold) return r % n;
        }
    }

    bool bernoulli(double p) {
        if (p <= 0.0) return false;
        if (p >= 1.0) return true;
        return uniform01() < p;
    }

    // Marsaglia polar method; pairs are cached.
    double gaussian(double mean, double sigma) {
        if (sigma <= 0.0) return mean;
        if (have_spare_) {
            have_spare_ = false;
            return mean + sigma * spare_;
        }
        double u, v, s;
        do {
            u = 2.0 * uniform01() - 1.0;
            v = 2.0 * uniform01() - 1.0;
            s = u * u + v * v;
        } while (s >= 1.0 || s == 0.0);
        double m = std::sqrt(-2.0 * std::log(s) / s);
        spare_ = v * m;
        have_spare_ = true;
        return mean + sigma * u * m;
    }

private:
    std::mt19937_64 engine_;
    bool have_spare_ = false;
    double spare_ = 0.0;
};

// Splits one scenario seed into independent named sub-streams (mobility,
// epidemic, radio, attack, ...), optionally indexed per agent. Adding draws
// to one stream never perturbs another, which keeps attacked and clean runs
// comparable on the same seed.
class RngStreams {
public:
    explicit RngStreams(uint64_t root_seed) : root_(root_seed) {}

    uint64_t derive_seed(std::string_view stream, uint64_t index = 0) const {
        uint64_t s = detail::splitmix64(root_ ^ detail::fnv1a(stream));
        return detail::splitmix64(s ^ (0x517cc1b727220a95ULL * (index + 1)));
    }

    Rng make(std::string_view stream, uint64_t index = 0) const {
        return Rng(derive_seed(stream, index));
    }

    uint64_t root() const { return root_; }

private:
    uint64_t root_;
};

} // namespace ctsim

#endif
