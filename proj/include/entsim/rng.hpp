#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace entsim {

// splitmix64 finalizer; used to derive independent sub-stream seeds from
// (master seed, purpose tag) without correlated low bits.
inline std::uint64_t mix_seed(std::uint64_t a, std::uint64_t b) {
    std::uint64_t z = a + 0x9e3779b97f4a7c15ull * (b + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
}

// mt19937_64 is bit-identical across standard libraries; the distribution
// wrappers below are implemented here (not via std::*_distribution, whose
// algorithms are implementation-defined) so traces reproduce everywhere.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : gen_(seed) {}

    std::uint64_t next_u64() { return gen_(); }

    // uniform on [0,1) with 53-bit resolution
    double uniform01() {
        return static_cast<double>(gen_() >> 11) * 0x1.0p-53;
    }

    // standard normal via Box-Muller (cosine branch only: one draw per call,
    // simple deterministic state)
    double normal() {
        double u1 = uniform01();
        double u2 = uniform01();
        while (u1 == 0.0) u1 = uniform01();  // log(0) guard
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586476925287 * u2);
    }

    double lognormal(double mu_log, double sigma_log) {
        return std::exp(mu_log + sigma_log * normal());
    }

private:
    std::mt19937_64 gen_;
};

} // namespace entsim
