#pragma once

#include <cmath>
#include <cstdint>

namespace qbell {

// Deterministic xoshiro256** stream, seeded through splitmix64. Simulation
// results must be byte-identical across platforms and thread schedules, so
// no std::<distribution> is used anywhere.
class Rng {
public:
    explicit Rng(std::uint64_t seed, std::uint64_t stream = 0) {
        // splitmix64 over (seed, stream) decorrelates substreams
        std::uint64_t x = seed ^ (0x9e3779b97f4a7c15ULL * (stream + 1));
        for (auto& word : state_) {
            x += 0x9e3779b97f4a7c15ULL;
            std::uint64_t z = x;
            z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
            z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
            word = z ^ (z >> 31);
        }
    }

    std::uint64_t next_u64() {
        const std::uint64_t result = rotl(state_[1] * 5, 7) * 9;
        const std::uint64_t t = state_[1] << 17;
        state_[2] ^= state_[0];
        state_[3] ^= state_[1];
        state_[1] ^= state_[2];
        state_[0] ^= state_[3];
        state_[2] ^= t;
        state_[3] = rotl(state_[3], 45);
        return result;
    }

    // uniform on [0, 1)
    double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    // uniform on (0, 1]
    double uniform_pos() { return 1.0 - uniform(); }

    int uniform_int(int n) { return static_cast<int>(next_u64() % static_cast<std::uint64_t>(n)); }

    // Box-Muller, one deviate per call
    double normal() {
        const double u1 = uniform_pos();
        const double u2 = uniform();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586477 * u2);
    }

    // Inversion below lambda = 30, normal approximation with continuity
    // correction above.
    std::uint64_t poisson(double lambda) {
        if (lambda <= 0.0) return 0;
        if (lambda < 30.0) {
            const double u = uniform();
            double p = std::exp(-lambda);
            double cum = p;
            std::uint64_t k = 0;
            while (u > cum && k < 1000000) {
                ++k;
                p *= lambda / static_cast<double>(k);
                cum += p;
            }
            return k;
        }
        const double x = std::floor(lambda + std::sqrt(lambda) * normal() + 0.5);
        return x < 0.0 ? 0 : static_cast<std::uint64_t>(x);
    }

private:
    static std::uint64_t rotl(std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }

    std::uint64_t state_[4];
};

} // namespace qbell
