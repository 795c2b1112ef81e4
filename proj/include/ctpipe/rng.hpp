#ifndef CTPIPE_RNG_HPP_
#define CTPIPE_RNG_HPP_

#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

namespace ctpipe {

// Seeded random source used everywhere randomness is needed (weight init,
// shuffling, dropout, phantom synthesis). mt19937 output is pinned by the
// standard; the distributions here are hand-rolled on top of it because
// std::*_distribution is implementation-defined and would break the
// bit-reproducibility contracts across toolchains.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(static_cast<std::uint32_t>(seed ^ (seed >> 32))) {}

    // Uniform in [0, 1).
    double uniform() {
        return engine_() * (1.0 / 4294967296.0);
    }

    // Uniform in [lo, hi).
    double uniform(double lo, double hi) {
        return lo + (hi - lo) * uniform();
    }

    // Uniform integer in [0, n). n must be > 0.
    std::uint32_t uniform_int(std::uint32_t n) {
        // Rejection sampling keeps the draw unbiased.
        const std::uint32_t limit = 4294967295u - (4294967295u % n + 1u) % n;
        std::uint32_t v = engine_();
        while (v > limit) v = engine_();
        return v % n;
    }

    bool bernoulli(double p) {
        return uniform() < p;
    }

    // Standard normal via Box-Muller; one spare cached.
    double normal() {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        double u1 = uniform();
        double u2 = uniform();
        while (u1 <= 1e-12) u1 = uniform();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double a = 2.0 * 3.14159265358979323846 * u2;
        spare_ = r * std::sin(a);
        has_spare_ = true;
        return r * std::cos(a);
    }

    template <typename T>
    void shuffle(std::vector<T>& v) {
        for (std::size_t i = v.size(); i > 1; --i) {
            const std::size_t j = uniform_int(static_cast<std::uint32_t>(i));
            std::swap(v[i - 1], v[j]);
        }
    }

private:
    std::mt19937 engine_;
    double spare_ = 0.0;
    bool has_spare_ = false;
};

}  // namespace ctpipe

#endif
