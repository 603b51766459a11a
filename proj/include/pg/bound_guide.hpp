#pragma once
#include <stdexcept>
#include <vector>
#include "pg/aabb.hpp"
#include "pg/rng.hpp"
#include "pg/vec.hpp"

namespace pg {

// Caster-bounding-box emission guide: a convex combination of axis-aligned
// boxes, each interpreted as a uniform spatial density that becomes a
// directional density from any observation point. The per-box directional pdf
// along omega is (r_exit^3 - r_entry^3) / (3 V) over the ray-box interval;
// the combined pdf sums the boxes (one-sample MIS by summation).
struct BoundGuide {
    std::vector<AABB> boxes;
    std::vector<double> weights;  // convex: nonnegative, sum 1
    std::vector<int> surfaces;    // originating surface index per box, -1 if none
};

inline BoundGuide make_bound_guide(const std::vector<AABB>& boxes,
                                   const std::vector<int>& surfaces = {}) {
    if (boxes.empty()) throw std::invalid_argument("bound guide needs at least one box");
    for (const auto& b : boxes)
        if (!b.valid() || !(b.volume() > 0))
            throw std::invalid_argument("bound guide rejects zero-volume boxes");
    BoundGuide bg;
    bg.boxes = boxes;
    bg.weights.assign(boxes.size(), 1.0 / static_cast<double>(boxes.size()));
    bg.surfaces = surfaces.empty() ? std::vector<int>(boxes.size(), -1) : surfaces;
    return bg;
}

inline double bound_pdf(const BoundGuide& bg, const Vec3& x0, const Vec3& w) {
    double p = 0;
    for (size_t i = 0; i < bg.boxes.size(); ++i) {
        double t0, t1;
        if (!bg.boxes[i].ray_interval(x0, w, t0, t1)) continue;
        p += bg.weights[i] * (t1 * t1 * t1 - t0 * t0 * t0) / (3.0 * bg.boxes[i].volume());
    }
    return p;
}

inline Direction bound_sample(const BoundGuide& bg, const Vec3& x0, Pcg32& rng) {
    for (;;) {
        double u = rng.next_double(), acc = 0;
        size_t pick = bg.boxes.size() - 1;
        for (size_t i = 0; i < bg.boxes.size(); ++i) {
            acc += bg.weights[i];
            if (u <= acc) {
                pick = i;
                break;
            }
        }
        const AABB& box = bg.boxes[pick];
        Vec3 e = box.extent();
        Vec3 p = box.lo + Vec3{rng.next_double() * e.x, rng.next_double() * e.y,
                               rng.next_double() * e.z};
        if (length_sq(p - x0) > 0) return Direction(p - x0);
    }
}

// (counts_i + 1) / sum_j (counts_j + 1): the +1 prior keeps unobserved boxes alive.
inline std::vector<double> normalized_counts(const std::vector<double>& counts) {
    std::vector<double> w(counts.size());
    double sum = 0;
    for (double c : counts) sum += c + 1.0;
    for (size_t i = 0; i < counts.size(); ++i) w[i] = (counts[i] + 1.0) / sum;
    return w;
}

// weights <- 0.5 * old + 0.5 * normalized(counts + 1).
inline void bound_weight_update(BoundGuide& bg, const std::vector<double>& counts) {
    if (counts.size() != bg.weights.size())
        throw std::invalid_argument("bound weight update: count/box size mismatch");
    std::vector<double> fresh = normalized_counts(counts);
    for (size_t i = 0; i < bg.weights.size(); ++i)
        bg.weights[i] = 0.5 * bg.weights[i] + 0.5 * fresh[i];
}

}  // namespace pg
