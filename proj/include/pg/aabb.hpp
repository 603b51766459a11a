#pragma once
#include <limits>
#include "pg/vec.hpp"

namespace pg {

struct AABB {
    Vec3 lo{std::numeric_limits<double>::infinity(),
            std::numeric_limits<double>::infinity(),
            std::numeric_limits<double>::infinity()};
    Vec3 hi{-std::numeric_limits<double>::infinity(),
            -std::numeric_limits<double>::infinity(),
            -std::numeric_limits<double>::infinity()};

    void expand(const Vec3& p) { lo = min(lo, p); hi = max(hi, p); }
    void expand(const AABB& o) { lo = min(lo, o.lo); hi = max(hi, o.hi); }
    bool valid() const { return lo.x <= hi.x && lo.y <= hi.y && lo.z <= hi.z; }
    Vec3 center() const { return (lo + hi) * 0.5; }
    Vec3 extent() const { return hi - lo; }
    double volume() const {
        Vec3 e = extent();
        return e.x * e.y * e.z;
    }
    bool contains(const Vec3& p) const {
        return p.x >= lo.x && p.x <= hi.x && p.y >= lo.y && p.y <= hi.y &&
               p.z >= lo.z && p.z <= hi.z;
    }

    // Slab test: parametric entry/exit of the ray o + t*d over t >= 0.
    // Returns false when the ray misses. On hit, t_entry >= 0 (clamped) and t_exit >= t_entry.
    bool ray_interval(const Vec3& o, const Vec3& d, double& t_entry, double& t_exit) const {
        double t0 = 0.0, t1 = std::numeric_limits<double>::infinity();
        for (int a = 0; a < 3; ++a) {
            if (d[a] == 0.0) {
                if (o[a] < lo[a] || o[a] > hi[a]) return false;
                continue;
            }
            double inv = 1.0 / d[a];
            double ta = (lo[a] - o[a]) * inv;
            double tb = (hi[a] - o[a]) * inv;
            if (ta > tb) std::swap(ta, tb);
            t0 = std::max(t0, ta);
            t1 = std::min(t1, tb);
            if (t0 > t1) return false;
        }
        t_entry = t0;
        t_exit = t1;
        return true;
    }
};

}  // namespace pg
