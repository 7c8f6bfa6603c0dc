#pragma once

#include <cstdint>
#include <random>
#include <span>

namespace sopt {

// Deterministic RNG used everywhere. The engine is std::mt19937_64 (exactly
// specified by the standard); all derived draws are implemented here instead
// of through std::*_distribution, whose output is implementation-defined.
class Rng {
public:
    explicit Rng(uint64_t seed) : gen_(seed) {}

    uint64_t next_u64() { return gen_(); }

    // Uniform in [0, 1) with 53 random bits.
    double uniform() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }

    // Exactly uniform integer in [0, n). Lemire multiply-shift with rejection.
    uint32_t bounded(uint32_t n) {
        if (n <= 1) return 0;
        uint64_t threshold = (0 - static_cast<uint64_t>(n)) % n;
        for (;;) {
            uint64_t x = gen_();
            // Split the 64-bit draw into two 32-bit candidates to halve engine calls.
            for (int half = 0; half < 2; ++half) {
                uint64_t v = (half == 0) ? (x & 0xFFFFFFFFu) : (x >> 32);
                uint64_t m = v * n;
                if ((m & 0xFFFFFFFFu) >= threshold) return static_cast<uint32_t>(m >> 32);
            }
        }
    }

    bool bernoulli(double p) { return uniform() < p; }

    // CDF walk over an explicit probability vector.
    size_t categorical(std::span<const double> probs) {
        double u = uniform();
        double cum = 0.0;
        size_t last_positive = 0;
        bool seen = false;
        for (size_t i = 0; i < probs.size(); ++i) {
            if (probs[i] > 0.0) { last_positive = i; seen = true; }
            cum += probs[i];
            if (u < cum) return i;
        }
        // Floating-point shortfall: fall back to the last index with mass.
        return seen ? last_positive : probs.size() - 1;
    }

private:
    std::mt19937_64 gen_;
};

// splitmix64 finalizer; used to derive independent stream seeds.
inline uint64_t mix64(uint64_t x) {
    x += 0x9e3779b97f4a7c15ull;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
    return x ^ (x >> 31);
}

inline uint64_t derive_seed(uint64_t master, uint64_t a, uint64_t b = 0, uint64_t c = 0) {
    uint64_t s = mix64(master ^ 0x6a09e667f3bcc909ull);
    s = mix64(s ^ mix64(a));
    s = mix64(s ^ mix64(b));
    s = mix64(s ^ mix64(c));
    return s;
}

} // namespace sopt
