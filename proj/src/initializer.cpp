#include "pg/initializer.hpp"

#include <algorithm>
#include <numeric>
#include <stdexcept>
#include "pg/kmeans.hpp"

namespace pg {

SurfaceSampleSet sample_geometry(const Scene& scene, int n, Pcg32& rng) {
    std::vector<int> casters;
    std::vector<double> areas;
    double total_area = 0;
    for (size_t si = 0; si < scene.surfaces.size(); ++si) {
        if (!scene.surfaces[si].caster) continue;
        double a = surface_area(scene, scene.surfaces[si]);
        if (a <= 0) continue;
        casters.push_back(static_cast<int>(si));
        areas.push_back(a);
        total_area += a;
    }
    if (casters.empty())
        throw std::invalid_argument("sample_geometry: scene has no caster surfaces");

    SurfaceSampleSet out;
    out.points.reserve(n);
    out.weights.reserve(n);
    out.surface_ids.reserve(n);
    double per_point_weight = total_area / n;
    for (int i = 0; i < n; ++i) {
        double pick = rng.next_double() * total_area, acc = 0;
        size_t chosen = casters.size() - 1;
        for (size_t c = 0; c < casters.size(); ++c) {
            acc += areas[c];
            if (pick <= acc) {
                chosen = c;
                break;
            }
        }
        const Surface& s = scene.surfaces[casters[chosen]];
        out.points.push_back(sample_surface_point(scene, s, rng));
        out.weights.push_back(per_point_weight);
        out.surface_ids.push_back(casters[chosen]);
    }
    return out;
}

SeedGaussianSet build_seed_set(const Scene& scene, int k_per_geometry, int n_samples,
                               Pcg32& rng) {
    SurfaceSampleSet samples = sample_geometry(scene, n_samples, rng);
    double sigma_floor = 1e-4 * scene.bound_diameter();

    // group sample points by caster surface
    std::vector<int> surfaces;
    for (int sid : samples.surface_ids)
        if (std::find(surfaces.begin(), surfaces.end(), sid) == surfaces.end())
            surfaces.push_back(sid);
    std::sort(surfaces.begin(), surfaces.end());

    SeedGaussianSet seed;
    for (int sid : surfaces) {
        std::vector<Vec3> pts;
        for (size_t i = 0; i < samples.points.size(); ++i)
            if (samples.surface_ids[i] == sid) pts.push_back(samples.points[i]);
        int k = std::min<int>(k_per_geometry, static_cast<int>(pts.size()));
        std::vector<Vec3> centroids = kmeans(pts, k, 32, rng);

        // RMS spread per cluster
        std::vector<double> sq(k, 0.0);
        std::vector<int> counts(k, 0);
        for (const Vec3& p : pts) {
            int c = nearest_centroid(centroids, p);
            Vec3 d = p - centroids[c];
            sq[c] += dot(d, d);
            ++counts[c];
        }
        for (int c = 0; c < k; ++c) {
            double rms = counts[c] > 0 ? std::sqrt(sq[c] / counts[c]) : 0.0;
            seed.gaussians.push_back({centroids[c], std::max(rms, sigma_floor)});
            seed.counters.push_back(0);
        }
    }
    return seed;
}

std::vector<Gaussian3> assign_and_rank(SeedGaussianSet& seed,
                                       const std::vector<Vec3>& first_bounce_points, int G) {
    std::fill(seed.counters.begin(), seed.counters.end(), 0L);
    if (first_bounce_points.empty() || seed.gaussians.empty()) return {};

    std::vector<Vec3> means;
    means.reserve(seed.gaussians.size());
    for (const auto& g : seed.gaussians) means.push_back(g.mu);
    for (const Vec3& p : first_bounce_points) ++seed.counters[nearest_centroid(means, p)];

    std::vector<size_t> order(seed.gaussians.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](size_t a, size_t b) {
        return seed.counters[a] > seed.counters[b];  // stable keeps ties at lowest index
    });

    std::vector<Gaussian3> out;
    for (size_t rank = 0; rank < order.size() && static_cast<int>(out.size()) < G; ++rank) {
        if (seed.counters[order[rank]] == 0) break;
        out.push_back(seed.gaussians[order[rank]]);
    }
    return out;
}

std::vector<Gaussian3> uniform_seed_fallback(const SeedGaussianSet& seed, int G, Pcg32& rng) {
    std::vector<Gaussian3> out;
    if (seed.gaussians.empty()) return out;
    size_t n = seed.gaussians.size();
    if (n <= static_cast<size_t>(G)) {
        out = seed.gaussians;
        return out;
    }
    // partial Fisher-Yates draw of G distinct indices
    std::vector<size_t> idx(n);
    std::iota(idx.begin(), idx.end(), 0);
    for (int i = 0; i < G; ++i) {
        size_t j = i + rng.next_below(static_cast<uint32_t>(n - i));
        std::swap(idx[i], idx[j]);
        out.push_back(seed.gaussians[idx[i]]);
    }
    return out;
}

GaussianMixture mixture_from_gaussians(const std::vector<Gaussian3>& gaussians) {
    GaussianMixture m;
    if (gaussians.empty()) return m;
    double w = 1.0 / gaussians.size();
    for (const auto& g : gaussians) m.components.push_back({w, g});
    return m;
}

}  // namespace pg
