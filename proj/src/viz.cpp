#include "pg/viz.hpp"

#include <algorithm>
#include <cmath>

#include "pg/directional.hpp"

namespace pg {

Image directional_heatmap(const GaussianMixture& mixture, const Vec3& observe, int width,
                          int height) {
    Image img(width, height);
    const bool empty = mixture.components.empty();
    for (int y = 0; y < height; ++y) {
        double theta = kPi * (y + 0.5) / height;  // polar angle from +y
        double st = std::sin(theta), ct = std::cos(theta);
        for (int x = 0; x < width; ++x) {
            double phi = kTwoPi * (x + 0.5) / width;  // azimuth from +x toward +z
            Direction w{st * std::cos(phi), ct, st * std::sin(phi)};
            double pdf = empty ? kInv4Pi : directional_pdf_mixture(mixture, observe, w);
            img.at(x, y) = RGB{pdf, pdf, pdf};
        }
    }
    return img;
}

double heatmap_integral(const Image& map) {
    double dtheta = kPi / map.height;
    double dphi = kTwoPi / map.width;
    double acc = 0;
    for (int y = 0; y < map.height; ++y) {
        double theta = kPi * (y + 0.5) / map.height;
        double weight = std::sin(theta) * dtheta * dphi;
        for (int x = 0; x < map.width; ++x) acc += map.at(x, y).r * weight;
    }
    return acc;
}

RGB heat_color(double t) {
    t = std::clamp(t, 0.0, 1.0);
    // piecewise-linear blue -> cyan -> green -> yellow -> red
    struct Stop {
        double t;
        RGB c;
    };
    static const Stop stops[] = {{0.00, {0.05, 0.05, 0.35}},
                                 {0.25, {0.0, 0.55, 0.75}},
                                 {0.50, {0.1, 0.75, 0.25}},
                                 {0.75, {0.95, 0.85, 0.1}},
                                 {1.00, {0.85, 0.1, 0.05}}};
    for (int i = 0; i < 4; ++i) {
        if (t <= stops[i + 1].t) {
            double u = (t - stops[i].t) / (stops[i + 1].t - stops[i].t);
            return stops[i].c + (stops[i + 1].c - stops[i].c) * u;
        }
    }
    return stops[4].c;
}

Image colorize_scalar(const std::vector<double>& values, int width, int height, double scale) {
    Image img(width, height);
    double inv = scale > 0 ? 1.0 / scale : 0.0;
    for (int i = 0; i < width * height; ++i)
        img.pixels[i] = values[i] > 0 ? heat_color(values[i] * inv) : RGB{0, 0, 0};
    return img;
}

namespace {

// Screen-space projection matching camera_ray's basis. Returns false when the
// point lies behind the eye plane.
struct CameraProj {
    Vec3 origin, fwd, right, up;
    double tan_half = 1, aspect = 1;
    int w = 0, h = 0;

    CameraProj(const Camera& cam, int width, int height) {
        origin = cam.position;
        fwd = normalize(cam.look_at - cam.position);
        right = normalize(cross(fwd, cam.up));
        up = cross(right, fwd);
        tan_half = std::tan(cam.fov_deg * kPi / 360.0);
        aspect = static_cast<double>(width) / height;
        w = width;
        h = height;
    }

    bool project(const Vec3& p, double& sx, double& sy, double& depth) const {
        Vec3 v = p - origin;
        depth = dot(v, fwd);
        if (depth <= 1e-9) return false;
        double px = dot(v, right) / (depth * tan_half * aspect);
        double py = dot(v, up) / (depth * tan_half);
        sx = (px + 1.0) * 0.5 * w;
        sy = (1.0 - py) * 0.5 * h;
        return true;
    }

    double focal_px() const { return h / (2.0 * tan_half); }
};

}  // namespace

Image splat_mixture(const Scene& scene, const GaussianMixture& mixture, int width, int height) {
    Image img(width, height);
    Camera cam = scene.camera;
    cam.width = width;
    cam.height = height;

    // facing-ratio base layer with cheap silhouette darkening
    std::vector<int> hit_surface(static_cast<size_t>(width) * height, -1);
    for (int y = 0; y < height; ++y)
        for (int x = 0; x < width; ++x) {
            Ray ray = camera_ray(cam, x, y, 0.5, 0.5);
            Hit h;
            if (intersect(scene, ray, h)) {
                double facing = std::fabs(dot(h.normal, ray.d));
                double g = 0.08 + 0.30 * facing;
                img.at(x, y) = RGB{g, g, g};
                hit_surface[static_cast<size_t>(y) * width + x] = h.surface;
            } else {
                img.at(x, y) = RGB{0.02, 0.02, 0.02};
            }
        }
    for (int y = 0; y < height; ++y)
        for (int x = 0; x + 1 < width; ++x) {
            size_t i = static_cast<size_t>(y) * width + x;
            bool edge = hit_surface[i] != hit_surface[i + 1] ||
                        (y + 1 < height && hit_surface[i] != hit_surface[i + width]);
            if (edge) img.pixels[i] = RGB{0.45, 0.45, 0.45};
        }

    if (mixture.components.empty()) return img;
    double wmax = 0;
    for (const WeightedGaussian& c : mixture.components) wmax = std::max(wmax, c.weight);

    CameraProj proj(cam, width, height);
    for (const WeightedGaussian& c : mixture.components) {
        double sx, sy, depth;
        if (!proj.project(c.g.mu, sx, sy, depth)) continue;
        double sr = std::max(1.0, c.g.sigma / depth * proj.focal_px());
        RGB tint = heat_color(wmax > 0 ? c.weight / wmax : 0.0);
        int x0 = std::max(0, static_cast<int>(std::floor(sx - 3 * sr)));
        int x1 = std::min(width - 1, static_cast<int>(std::ceil(sx + 3 * sr)));
        int y0 = std::max(0, static_cast<int>(std::floor(sy - 3 * sr)));
        int y1 = std::min(height - 1, static_cast<int>(std::ceil(sy + 3 * sr)));
        for (int y = y0; y <= y1; ++y)
            for (int x = x0; x <= x1; ++x) {
                double dx = x + 0.5 - sx, dy = y + 0.5 - sy;
                double fall = std::exp(-0.5 * (dx * dx + dy * dy) / (sr * sr));
                img.at(x, y) += tint * (0.8 * fall);
            }
    }
    return img;
}

}  // namespace pg
