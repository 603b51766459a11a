#pragma once
#include "pg/vec.hpp"

namespace pg {

// Orthonormal basis with n as +z (Duff et al. branchless construction).
struct Frame {
    Vec3 t, b, n;

    explicit Frame(const Vec3& n_) : n(n_) {
        double sign = std::copysign(1.0, n.z);
        double a = -1.0 / (sign + n.z);
        double c = n.x * n.y * a;
        t = {1.0 + sign * n.x * n.x * a, sign * c, -sign * n.x};
        b = {c, sign + n.y * n.y * a, -n.y};
    }

    Vec3 to_world(const Vec3& local) const { return t * local.x + b * local.y + n * local.z; }
    Vec3 to_local(const Vec3& world) const {
        return {dot(world, t), dot(world, b), dot(world, n)};
    }
};

}  // namespace pg
