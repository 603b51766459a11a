#pragma once
#include <cmath>
#include <stdexcept>
#include <vector>
#include "pg/gaussian.hpp"

namespace pg {

inline constexpr double kCb = 20.0;    // scale-factor numerator
inline constexpr double kCs = 0.65;    // sigma cap in scaled space

// B = c_b / R_b, with R_b the diameter of the scene's bounding sphere.
inline double scale_factor(double bounding_diameter) {
    if (!(bounding_diameter > 0)) throw std::invalid_argument("bounding diameter must be > 0");
    return kCb / bounding_diameter;
}

inline double sigmoid(double x) {
    return x >= 0 ? 1.0 / (1.0 + std::exp(-x)) : std::exp(x) / (1.0 + std::exp(x));
}

inline double logit(double y) { return std::log(y / (1.0 - y)); }

// Optimizer-facing mixture parameterization. Positions live in scaled space
// (world x B); sigma is c_s * sigmoid(p_sigma), also in scaled space; weights are
// softmax of raw scores. decode() divides mu and sigma by B to return world units.
struct EncodedComponent {
    Vec3 scaled_mu;
    double p_sigma = 0;
    double raw_weight = 0;
};

struct EncodedMixture {
    std::vector<EncodedComponent> components;

    size_t size() const { return components.size(); }
    size_t param_count() const { return components.size() * 5; }
};

inline std::vector<double> softmax(const std::vector<double>& raw) {
    double mx = raw[0];
    for (double r : raw) mx = std::max(mx, r);
    std::vector<double> w(raw.size());
    double sum = 0;
    for (size_t i = 0; i < raw.size(); ++i) {
        w[i] = std::exp(raw[i] - mx);
        sum += w[i];
    }
    for (double& wi : w) wi /= sum;
    return w;
}

inline EncodedMixture encode(const GaussianMixture& m, double B) {
    EncodedMixture enc;
    enc.components.reserve(m.components.size());
    for (const auto& c : m.components) {
        EncodedComponent e;
        e.scaled_mu = c.g.mu * B;
        double s_scaled = std::clamp(c.g.sigma * B / kCs, 1e-12, 1.0 - 1e-12);
        e.p_sigma = logit(s_scaled);
        e.raw_weight = std::log(std::max(c.weight, 1e-300));
        enc.components.push_back(e);
    }
    return enc;
}

inline GaussianMixture decode(const EncodedMixture& enc, double B) {
    GaussianMixture m;
    std::vector<double> raw(enc.components.size());
    for (size_t i = 0; i < enc.components.size(); ++i) raw[i] = enc.components[i].raw_weight;
    std::vector<double> w = softmax(raw);
    m.components.reserve(enc.components.size());
    for (size_t i = 0; i < enc.components.size(); ++i) {
        const auto& e = enc.components[i];
        Gaussian3 g;
        g.mu = e.scaled_mu / B;
        g.sigma = kCs * sigmoid(e.p_sigma) / B;
        m.components.push_back({w[i], g});
    }
    return m;
}

}  // namespace pg
