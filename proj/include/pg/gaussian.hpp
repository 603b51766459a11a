#pragma once
#include <cmath>
#include <vector>
#include <cassert>
#include "pg/vec.hpp"
#include "pg/rng.hpp"

namespace pg {

inline constexpr double kPi = 3.14159265358979323846264338327950288;
inline constexpr double kTwoPi = 2.0 * kPi;
inline constexpr double kInv4Pi = 1.0 / (4.0 * kPi);

// Isotropic 3D Gaussian: mean mu, standard deviation sigma (world units).
struct Gaussian3 {
    Vec3 mu;
    double sigma = 1.0;
};

// Unnormalized kernel exp(-|x-mu|^2 / (2 sigma^2)), in (0, 1].
inline double eval_gaussian(const Gaussian3& g, const Vec3& x) {
    double d2 = length_sq(x - g.mu);
    return std::exp(-d2 / (2.0 * g.sigma * g.sigma));
}

struct WeightedGaussian {
    double weight = 1.0;
    Gaussian3 g;
};

// Convex combination of isotropic 3D Gaussians; weights sum to 1.
struct GaussianMixture {
    std::vector<WeightedGaussian> components;

    bool valid() const {
        if (components.empty()) return false;
        double sum = 0;
        for (const auto& c : components) {
            if (!(c.weight >= 0) || !(c.g.sigma > 0) || !std::isfinite(c.g.sigma) ||
                !is_finite(c.g.mu))
                return false;
            sum += c.weight;
        }
        return std::fabs(sum - 1.0) <= 1e-9;
    }
};

// Normalized mixture density (units length^-3).
inline double mixture_density(const GaussianMixture& m, const Vec3& x) {
    double total = 0;
    for (const auto& c : m.components) {
        double s2 = c.g.sigma * c.g.sigma;
        double norm = std::pow(kTwoPi * s2, -1.5);
        total += c.weight * eval_gaussian(c.g, x) * norm;
    }
    return total;
}

// Draw x ~ N(mu, sigma^2 I).
inline Vec3 sample_point(const Gaussian3& g, Pcg32& rng) {
    return g.mu + Vec3{rng.next_gaussian(), rng.next_gaussian(), rng.next_gaussian()} * g.sigma;
}

}  // namespace pg
