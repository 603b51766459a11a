#pragma once
#include <cstdint>
#include <string>
#include <vector>
#include "pg/aabb.hpp"
#include "pg/rng.hpp"
#include "pg/vec.hpp"

namespace pg {

struct Material {
    enum Kind { kDiffuse, kMirror, kDielectric };
    Kind kind = kDiffuse;
    RGB albedo{0.5, 0.5, 0.5};  // diffuse only
    double ior = 1.5;           // dielectric only
    std::string name;
};

// One entry of the scene's `surfaces` list: either a sphere or a triangle
// mesh. Triangles are flattened into Scene::triangles; this keeps the
// grouping (bound boxes, serialization, per-surface stats).
struct Surface {
    enum Kind { kSphere, kTriMesh };
    Kind kind = kSphere;
    int material = 0;
    bool caster = false;
    bool receiver = false;
    // sphere
    Vec3 center{0, 0, 0};
    double radius = 1;
    // tri_mesh (indices into Scene::triangles)
    int tri_begin = 0;
    int tri_end = 0;
    std::string obj_path;  // nonempty when loaded from an .obj file
};

struct Triangle {
    Vec3 a, b, c;
    int surface = 0;  // owning Surface index
};

struct Light {
    enum Kind { kPoint, kRectArea, kDirectional };
    Kind kind = kPoint;
    // point
    Vec3 position{0, 0, 0};
    RGB intensity{1, 1, 1};  // W/sr
    // rect_area
    Vec3 corner{0, 0, 0}, edge_u{1, 0, 0}, edge_v{0, 0, 1};
    RGB radiance{1, 1, 1};  // W/(m^2 sr), one-sided along +normal
    // directional (infinite)
    Vec3 direction{0, -1, 0};  // direction of travel of the light
    // radiance field doubles as the plane-wave irradiance (W/m^2) for kDirectional

    Vec3 rect_normal() const { return normalize(cross(edge_u, edge_v)); }
    double rect_area() const { return length(cross(edge_u, edge_v)); }
    // Representative anchor for directional guiders fitted "at the light".
    Vec3 anchor(const Vec3& bound_center, double bound_radius) const {
        switch (kind) {
            case kPoint: return position;
            case kRectArea: return corner + (edge_u + edge_v) * 0.5;
            default: return bound_center - normalize(direction) * bound_radius;
        }
    }
};

struct Camera {
    Vec3 position{0, 0, 0};
    Vec3 look_at{0, 0, -1};
    Vec3 up{0, 1, 0};
    double fov_deg = 45;  // vertical field of view
    int width = 64, height = 64;
};

struct Ray {
    Vec3 o;
    Vec3 d;  // unit length
};

struct Hit {
    double t = 0;
    Vec3 position{0, 0, 0};
    Vec3 normal{0, 0, 0};  // geometric, faces the incoming ray
    int material = 0;
    int surface = -1;
    bool caster = false;
    bool receiver = false;
    bool front_face = true;  // false when the ray started inside (spheres)
};

struct Scene {
    std::vector<Material> materials;
    std::vector<Surface> surfaces;
    std::vector<Triangle> triangles;
    std::vector<Light> lights;
    Camera camera;
    Vec3 bound_center{0, 0, 0};
    double bound_radius = 1;  // sphere containing all finite geometry

    double bound_diameter() const { return 2.0 * bound_radius; }
};

// Recomputes Scene::bound_center/bound_radius from the geometry.
void compute_bounding_sphere(Scene& scene);

// Nearest intersection along the ray with t in (t_min, t_max); false on miss.
bool intersect(const Scene& scene, const Ray& ray, Hit& hit, double t_min = 1e-9,
               double t_max = 1e30);

// Any intersection strictly between the endpoints (shadow test).
bool occluded(const Scene& scene, const Vec3& from, const Vec3& to);
bool occluded_dir(const Scene& scene, const Vec3& from, const Vec3& dir, double t_max);

double triangle_area(const Triangle& tri);
double surface_area(const Scene& scene, const Surface& s);
// Uniform point on the surface (area measure).
Vec3 sample_surface_point(const Scene& scene, const Surface& s, Pcg32& rng);
AABB surface_bounds(const Scene& scene, const Surface& s);

// Pinhole camera ray through pixel (x + jx, y + jy), jitter in [0,1).
Ray camera_ray(const Camera& cam, int x, int y, double jx, double jy);

}  // namespace pg
