#ifndef TRENDKIT_RNG_HPP
#define TRENDKIT_RNG_HPP

#include <cstdint>
#include <random>

namespace trendkit {

// Deterministic RNG used by every stochastic stage. mt19937_64 has a
// standard-specified output sequence, and the distribution helpers below are
// hand-rolled so identical seeds give identical streams on any platform
// (std::uniform_*_distribution is implementation-defined).
class Rng {
public:
    explicit Rng(uint64_t seed) : engine_(seed) {}

    // Uniform double in [0, 1).
    double uniform01() {
        return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
    }

    // Uniform integer in [0, n), unbiased. n must be > 0.
    uint64_t below(uint64_t n) {
        const uint64_t limit = UINT64_MAX - UINT64_MAX % n;
        uint64_t r;
        do {
            r = engine_();
        } while (r >= limit);
        return r % n;
    }

    std::size_t index(std::size_t n) { return static_cast<std::size_t>(below(n)); }

    uint64_t raw() { return engine_(); }

private:
    std::mt19937_64 engine_;
};

// splitmix64 finalizer; used to derive independent per-stage / per-restart
// seeds from one root seed so parallel schedules cannot change results.
inline uint64_t derive_seed(uint64_t base, uint64_t stream) {
    uint64_t z = base + 0x9e3779b97f4a7c15ULL * (stream + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

} // namespace trendkit

#endif
