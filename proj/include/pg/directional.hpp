#pragma once
#include <cmath>
#include <vector>
#include "pg/gaussian.hpp"
#include "pg/frame.hpp"

namespace pg {

// Directional transform of an isotropic 3D Gaussian observed from x0.
//
// With d = |mu - x0|, z = (mu - x0)/d and cos(theta) = dot(omega, z), integrating
// the normalized Gaussian along the ray x0 + r*omega over r in [0, inf) gives the
// exact solid-angle density
//
//   F_o(omega) = f_o(omega) / (2 pi sigma^2)^{3/2},
//   f_o = sigma^2 d c e^{-d^2/(2 sigma^2)}
//       + sqrt(pi/2) sigma (sigma^2 + d^2 c^2) e^{-d^2 (1-c^2)/(2 sigma^2)} (1 + erf(d c / (sqrt(2) sigma))).
//
// The (1 + erf(z)) factor is evaluated as erfc(-z): for c < 0 the two terms cancel
// to ~1/400 of their magnitude at d/sigma = 20, and erfc keeps full precision there.
// Both exponents are <= 0 (c clamped to [-1,1]), so the two exp factors never overflow.
// At d = 0 the density is exactly uniform, 1/(4 pi), for any choice of axis.

// Per-component observation geometry cached for repeated evaluations from one x0.
struct DirectionalView {
    Vec3 x0;
    struct Entry {
        double d = 0;       // |mu - x0|
        Vec3 z{0, 0, 1};    // unit axis toward mu; (0,0,1) when d = 0 (unobservable)
        double weight = 1;
        double sigma = 1;
    };
    std::vector<Entry> entries;
};

inline DirectionalView make_directional_view(const GaussianMixture& m, const Vec3& x0) {
    DirectionalView view;
    view.x0 = x0;
    view.entries.reserve(m.components.size());
    for (const auto& c : m.components) {
        DirectionalView::Entry e;
        Vec3 dv = c.g.mu - x0;
        e.d = length(dv);
        if (e.d > 0) e.z = dv / e.d;
        e.weight = c.weight;
        e.sigma = c.g.sigma;
        view.entries.push_back(e);
    }
    return view;
}

// Closed-form solid-angle pdf of one component given d, sigma and cos(theta).
inline double directional_pdf_dc(double d, double sigma, double cos_theta) {
    double c = std::clamp(cos_theta, -1.0, 1.0);
    double s2 = sigma * sigma;
    double inv2s2 = 1.0 / (2.0 * s2);
    double z = d * c / (std::sqrt(2.0) * sigma);
    double term1 = s2 * d * c * std::exp(-d * d * inv2s2);
    double sin2 = std::max(0.0, 1.0 - c * c);
    double term2 = std::sqrt(kPi / 2.0) * sigma * (s2 + d * d * c * c) *
                   std::exp(-d * d * sin2 * inv2s2) * std::erfc(-z);
    double f_o = term1 + term2;
    return f_o / std::pow(kTwoPi * s2, 1.5);
}

inline double directional_pdf_component(const Gaussian3& g, const Vec3& x0, const Direction& w) {
    Vec3 dv = g.mu - x0;
    double d = length(dv);
    double c = d > 0 ? dot(w.v, dv) / d : w.v.z;
    return directional_pdf_dc(d, g.sigma, c);
}

inline double directional_pdf_view(const DirectionalView& view, const Direction& w) {
    double total = 0;
    for (const auto& e : view.entries)
        total += e.weight * directional_pdf_dc(e.d, e.sigma, dot(w.v, e.z));
    return total;
}

inline double directional_pdf_mixture(const GaussianMixture& m, const Vec3& x0,
                                      const Direction& w) {
    return directional_pdf_view(make_directional_view(m, x0), w);
}

// Unbiased direction sampling: draw x from the Gaussian, return (x - x0) normalized.
// The measure-zero coincidence x == x0 is resampled.
inline Direction sample_direction(const Gaussian3& g, const Vec3& x0, Pcg32& rng) {
    for (;;) {
        Vec3 x = sample_point(g, rng);
        Vec3 dv = x - x0;
        double len2 = length_sq(dv);
        if (len2 > 0) return Direction(dv / std::sqrt(len2));
    }
}

// Component chosen proportionally to weight; pdf is the full mixture pdf at the
// sampled direction (same code path as directional_pdf_mixture).
inline Direction sample_direction_mixture(const GaussianMixture& m, const Vec3& x0, Pcg32& rng,
                                          double* pdf_out = nullptr) {
    double u = rng.next_double();
    double acc = 0;
    size_t pick = m.components.size() - 1;
    for (size_t i = 0; i < m.components.size(); ++i) {
        acc += m.components[i].weight;
        if (u < acc) {
            pick = i;
            break;
        }
    }
    Direction w = sample_direction(m.components[pick].g, x0, rng);
    if (pdf_out) *pdf_out = directional_pdf_mixture(m, x0, w);
    return w;
}

// ---------------------------------------------------------------------------
// Orthogonal projection onto a plane (for infinite lights).

struct Gaussian2 {
    double ux = 0, uy = 0;  // mean in the plane frame
    double sigma = 1.0;
};

struct WeightedGaussian2 {
    double weight = 1.0;
    Gaussian2 g;
};

struct PlaneFrame {
    Vec3 origin;
    Vec3 t, b, n;
};

inline PlaneFrame make_plane_frame(const Vec3& origin, const Direction& normal) {
    Frame f(normal.v);
    return {origin, f.t, f.b, f.n};
}

// Each isotropic component projects to an isotropic 2D Gaussian with the same sigma;
// the mean is the in-plane coordinate of mu's orthogonal projection.
inline std::vector<WeightedGaussian2> project_mixture_to_plane(const GaussianMixture& m,
                                                               const PlaneFrame& pf) {
    std::vector<WeightedGaussian2> out;
    out.reserve(m.components.size());
    for (const auto& c : m.components) {
        Vec3 rel = c.g.mu - pf.origin;
        out.push_back({c.weight, {dot(rel, pf.t), dot(rel, pf.b), c.g.sigma}});
    }
    return out;
}

inline double plane_mixture_pdf(const std::vector<WeightedGaussian2>& mix, double u, double v) {
    double total = 0;
    for (const auto& c : mix) {
        double dx = u - c.g.ux, dy = v - c.g.uy;
        double s2 = c.g.sigma * c.g.sigma;
        total += c.weight * std::exp(-(dx * dx + dy * dy) / (2.0 * s2)) / (kTwoPi * s2);
    }
    return total;
}

// Standard 2D Gaussian-mixture sampling; pdf is the weighted normalized density
// (units length^-2). Support is infinite by design.
inline void sample_plane_point(const std::vector<WeightedGaussian2>& mix, Pcg32& rng, double& u,
                               double& v, double* pdf_out = nullptr) {
    double pick_u = rng.next_double();
    double acc = 0;
    size_t pick = mix.size() - 1;
    for (size_t i = 0; i < mix.size(); ++i) {
        acc += mix[i].weight;
        if (pick_u < acc) {
            pick = i;
            break;
        }
    }
    u = mix[pick].g.ux + mix[pick].g.sigma * rng.next_gaussian();
    v = mix[pick].g.uy + mix[pick].g.sigma * rng.next_gaussian();
    if (pdf_out) *pdf_out = plane_mixture_pdf(mix, u, v);
}

}  // namespace pg
