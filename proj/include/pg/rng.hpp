#pragma once
#include <cstdint>
#include <cmath>
#include <vector>
#include "pg/vec.hpp"

namespace pg {

// Minimal PCG32 (O'Neill). 64-bit state, 32-bit output.
class Pcg32 {
  public:
    Pcg32() { seed(0x853c49e6748fea9bULL, 0xda3e39cb94b95bdbULL); }
    Pcg32(uint64_t initstate, uint64_t initseq) { seed(initstate, initseq); }

    void seed(uint64_t initstate, uint64_t initseq) {
        state_ = 0;
        inc_ = (initseq << 1u) | 1u;
        next_u32();
        state_ += initstate;
        next_u32();
    }

    uint32_t next_u32() {
        uint64_t old = state_;
        state_ = old * 6364136223846793005ULL + inc_;
        uint32_t xorshifted = static_cast<uint32_t>(((old >> 18u) ^ old) >> 27u);
        uint32_t rot = static_cast<uint32_t>(old >> 59u);
        return (xorshifted >> rot) | (xorshifted << ((-rot) & 31u));
    }

    // Uniform in [0,1) with 24 bits of mantissa (exactly reproducible across platforms).
    double next_double() { return (next_u32() >> 8) * (1.0 / 16777216.0); }

    // Uniform integer in [0, n).
    uint32_t next_below(uint32_t n) {
        // Lemire-style rejection-free enough for test workloads; use 64-bit multiply.
        return static_cast<uint32_t>((static_cast<uint64_t>(next_u32()) * n) >> 32);
    }

    double next_gaussian() {
        // Box-Muller, one value per call (cache the pair for determinism-by-count simplicity).
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        double u1, u2;
        do {
            u1 = next_double();
        } while (u1 <= 0.0);
        u2 = next_double();
        double r = std::sqrt(-2.0 * std::log(u1));
        double a = 6.283185307179586476925286766559 * u2;
        spare_ = r * std::sin(a);
        has_spare_ = true;
        return r * std::cos(a);
    }

  private:
    uint64_t state_ = 0, inc_ = 0;
    bool has_spare_ = false;
    double spare_ = 0;
};

// SplitMix64 step; used to derive independent stream keys from structured ids.
inline uint64_t splitmix64(uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

// Deterministic per-task stream: the same (seed, iteration, purpose, index) always
// yields the same generator regardless of thread count or execution order.
inline Pcg32 make_stream(uint64_t seed, uint64_t iteration, uint64_t purpose, uint64_t index) {
    uint64_t a = splitmix64(seed ^ splitmix64(iteration));
    uint64_t b = splitmix64(a ^ splitmix64(purpose ^ (index * 0x9e3779b97f4a7c15ULL)));
    return Pcg32(b, splitmix64(b ^ 0x5851f42d4c957f2dULL));
}

// Replays a fixed script of uniforms, then falls back to a PCG32 stream.
// Lets a primary-sample-space state vector drive samplers that may consume
// more draws than the state has coordinates (e.g. deep specular chains).
struct ScriptedRng {
    std::vector<double> script;
    Pcg32 overflow;
    size_t used = 0;

    double next_double() {
        return used < script.size() ? script[used++] : overflow.next_double();
    }
};

// Purpose tags for stream derivation.
enum StreamPurpose : uint64_t {
    kStreamEmission = 1,
    kStreamCamera = 2,
    kStreamInit = 3,
    kStreamFit = 4,
    kStreamMcmc = 5,
    kStreamMisc = 6,
};

template <class Rng>
inline Vec3 sample_uniform_sphere(Rng& rng) {
    double z = 1.0 - 2.0 * rng.next_double();
    double r = std::sqrt(std::max(0.0, 1.0 - z * z));
    double phi = 6.283185307179586476925286766559 * rng.next_double();
    return {r * std::cos(phi), r * std::sin(phi), z};
}

// Cosine-weighted hemisphere around +z; pdf = cos(theta)/pi.
template <class Rng>
inline Vec3 sample_cosine_hemisphere(Rng& rng) {
    double u1 = rng.next_double(), u2 = rng.next_double();
    double r = std::sqrt(u1);
    double phi = 6.283185307179586476925286766559 * u2;
    double z = std::sqrt(std::max(0.0, 1.0 - u1));
    return {r * std::cos(phi), r * std::sin(phi), z};
}

template <class Rng>
inline void sample_uniform_disk(Rng& rng, double& dx, double& dy) {
    double r = std::sqrt(rng.next_double());
    double phi = 6.283185307179586476925286766559 * rng.next_double();
    dx = r * std::cos(phi);
    dy = r * std::sin(phi);
}

// Poisson sampler. Knuth's product-of-uniforms for small rates, split
// recursively for large ones so the running product never underflows.
inline int sample_poisson(Pcg32& rng, double lambda) {
    if (lambda <= 0.0) return 0;
    int count = 0;
    while (lambda > 500.0) {  // thin in chunks; Poisson(a+b) = Poisson(a) + Poisson(b)
        count += sample_poisson(rng, 500.0);
        lambda -= 500.0;
    }
    double limit = std::exp(-lambda);
    double prod = rng.next_double();
    while (prod > limit) {
        ++count;
        prod *= rng.next_double();
    }
    return count;
}

}  // namespace pg
