#include "pg/scene.hpp"

#include <algorithm>
#include <cmath>

namespace pg {

void compute_bounding_sphere(Scene& scene) {
    AABB box;
    for (const auto& s : scene.surfaces) box.expand(surface_bounds(scene, s));
    if (!box.valid()) {
        scene.bound_center = {0, 0, 0};
        scene.bound_radius = 1;
        return;
    }
    scene.bound_center = box.center();
    double r2 = 0;
    for (const auto& tri : scene.triangles) {
        for (const Vec3& v : {tri.a, tri.b, tri.c})
            r2 = std::max(r2, dot(v - scene.bound_center, v - scene.bound_center));
    }
    double r = std::sqrt(r2);
    for (const auto& s : scene.surfaces)
        if (s.kind == Surface::kSphere)
            r = std::max(r, length(s.center - scene.bound_center) + s.radius);
    scene.bound_radius = std::max(r, 1e-9);
}

namespace {

bool sphere_hit(const Surface& s, const Ray& ray, double t_min, double t_max, Hit& hit) {
    Vec3 oc = ray.o - s.center;
    double b = dot(oc, ray.d);
    double c = dot(oc, oc) - s.radius * s.radius;
    double disc = b * b - c;
    if (disc < 0) return false;
    double sq = std::sqrt(disc);
    double t = -b - sq;
    if (t < t_min) t = -b + sq;
    if (t < t_min || t > t_max) return false;
    hit.t = t;
    hit.position = ray.o + ray.d * t;
    Vec3 outward = (hit.position - s.center) / s.radius;
    hit.front_face = dot(ray.d, outward) < 0;
    hit.normal = hit.front_face ? outward : -outward;
    return true;
}

// Moller-Trumbore; reports the geometric normal facing the ray.
bool triangle_hit(const Triangle& tri, const Ray& ray, double t_min, double t_max, Hit& hit) {
    Vec3 e1 = tri.b - tri.a, e2 = tri.c - tri.a;
    Vec3 p = cross(ray.d, e2);
    double det = dot(e1, p);
    if (std::fabs(det) < 1e-14) return false;
    double inv = 1.0 / det;
    Vec3 tv = ray.o - tri.a;
    double u = dot(tv, p) * inv;
    if (u < 0 || u > 1) return false;
    Vec3 q = cross(tv, e1);
    double v = dot(ray.d, q) * inv;
    if (v < 0 || u + v > 1) return false;
    double t = dot(e2, q) * inv;
    if (t < t_min || t > t_max) return false;
    hit.t = t;
    hit.position = ray.o + ray.d * t;
    Vec3 n = normalize(cross(e1, e2));
    hit.front_face = dot(ray.d, n) < 0;
    hit.normal = hit.front_face ? n : -n;
    return true;
}

}  // namespace

bool intersect(const Scene& scene, const Ray& ray, Hit& hit, double t_min, double t_max) {
    bool found = false;
    double closest = t_max;
    Hit tmp;
    for (size_t si = 0; si < scene.surfaces.size(); ++si) {
        const Surface& s = scene.surfaces[si];
        if (s.kind == Surface::kSphere) {
            if (sphere_hit(s, ray, t_min, closest, tmp)) {
                closest = tmp.t;
                tmp.surface = static_cast<int>(si);
                hit = tmp;
                found = true;
            }
        } else {
            for (int ti = s.tri_begin; ti < s.tri_end; ++ti) {
                if (triangle_hit(scene.triangles[ti], ray, t_min, closest, tmp)) {
                    closest = tmp.t;
                    tmp.surface = static_cast<int>(si);
                    hit = tmp;
                    found = true;
                }
            }
        }
    }
    if (found) {
        const Surface& s = scene.surfaces[hit.surface];
        hit.material = s.material;
        hit.caster = s.caster;
        hit.receiver = s.receiver;
    }
    return found;
}

bool occluded(const Scene& scene, const Vec3& from, const Vec3& to) {
    Vec3 d = to - from;
    double dist = length(d);
    if (dist < 1e-12) return false;
    return occluded_dir(scene, from, d / dist, dist);
}

bool occluded_dir(const Scene& scene, const Vec3& from, const Vec3& dir, double t_max) {
    Hit h;
    return intersect(scene, {from, dir}, h, 1e-6, t_max * (1.0 - 1e-6));
}

double triangle_area(const Triangle& tri) {
    return 0.5 * length(cross(tri.b - tri.a, tri.c - tri.a));
}

double surface_area(const Scene& scene, const Surface& s) {
    if (s.kind == Surface::kSphere) return 4.0 * 3.14159265358979323846 * s.radius * s.radius;
    double a = 0;
    for (int ti = s.tri_begin; ti < s.tri_end; ++ti) a += triangle_area(scene.triangles[ti]);
    return a;
}

Vec3 sample_surface_point(const Scene& scene, const Surface& s, Pcg32& rng) {
    if (s.kind == Surface::kSphere) return s.center + sample_uniform_sphere(rng) * s.radius;
    // pick a triangle proportional to area, then a uniform barycentric point
    double total = surface_area(scene, s);
    double pick = rng.next_double() * total, acc = 0;
    int chosen = s.tri_end - 1;
    for (int ti = s.tri_begin; ti < s.tri_end; ++ti) {
        acc += triangle_area(scene.triangles[ti]);
        if (pick <= acc) {
            chosen = ti;
            break;
        }
    }
    const Triangle& tri = scene.triangles[chosen];
    double u = rng.next_double(), v = rng.next_double();
    if (u + v > 1) {
        u = 1 - u;
        v = 1 - v;
    }
    return tri.a + (tri.b - tri.a) * u + (tri.c - tri.a) * v;
}

AABB surface_bounds(const Scene& scene, const Surface& s) {
    AABB box;
    if (s.kind == Surface::kSphere) {
        Vec3 r{s.radius, s.radius, s.radius};
        box.expand(s.center - r);
        box.expand(s.center + r);
        return box;
    }
    for (int ti = s.tri_begin; ti < s.tri_end; ++ti) {
        box.expand(scene.triangles[ti].a);
        box.expand(scene.triangles[ti].b);
        box.expand(scene.triangles[ti].c);
    }
    return box;
}

Ray camera_ray(const Camera& cam, int x, int y, double jx, double jy) {
    Vec3 fwd = normalize(cam.look_at - cam.position);
    Vec3 right = normalize(cross(fwd, cam.up));
    Vec3 up = cross(right, fwd);
    double tan_half = std::tan(cam.fov_deg * 3.14159265358979323846 / 360.0);
    double aspect = static_cast<double>(cam.width) / cam.height;
    double px = (2.0 * ((x + jx) / cam.width) - 1.0) * tan_half * aspect;
    double py = (1.0 - 2.0 * ((y + jy) / cam.height)) * tan_half;
    return {cam.position, normalize(fwd + right * px + up * py)};
}

}  // namespace pg
