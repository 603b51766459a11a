#pragma once
#include <limits>
#include <stdexcept>
#include <vector>
#include "pg/rng.hpp"
#include "pg/vec.hpp"

namespace pg {

// Lloyd's algorithm with k-means++ seeding. Empty clusters are reseeded to
// the point farthest from its current centroid so every centroid owns at
// least one point on return.
inline std::vector<Vec3> kmeans(const std::vector<Vec3>& points, int k, int max_iters,
                                Pcg32& rng) {
    if (k <= 0 || static_cast<size_t>(k) > points.size())
        throw std::invalid_argument("kmeans: need 1 <= k <= |points|");
    const size_t n = points.size();

    // k-means++ seeding
    std::vector<Vec3> centroids;
    centroids.reserve(k);
    centroids.push_back(points[rng.next_below(static_cast<uint32_t>(n))]);
    std::vector<double> d2(n, std::numeric_limits<double>::max());
    while (centroids.size() < static_cast<size_t>(k)) {
        double total = 0;
        for (size_t i = 0; i < n; ++i) {
            Vec3 diff = points[i] - centroids.back();
            d2[i] = std::min(d2[i], dot(diff, diff));
            total += d2[i];
        }
        if (total <= 0) {
            // all remaining points coincide with a centroid; duplicate one
            centroids.push_back(points[rng.next_below(static_cast<uint32_t>(n))]);
            continue;
        }
        double pick = rng.next_double() * total, acc = 0;
        size_t chosen = n - 1;
        for (size_t i = 0; i < n; ++i) {
            acc += d2[i];
            if (pick <= acc) {
                chosen = i;
                break;
            }
        }
        centroids.push_back(points[chosen]);
    }

    std::vector<int> assign(n, -1);
    for (int iter = 0; iter < max_iters; ++iter) {
        bool changed = false;
        for (size_t i = 0; i < n; ++i) {
            int best = 0;
            double best_d = std::numeric_limits<double>::max();
            for (int c = 0; c < k; ++c) {
                Vec3 diff = points[i] - centroids[c];
                double d = dot(diff, diff);
                if (d < best_d) {
                    best_d = d;
                    best = c;
                }
            }
            if (assign[i] != best) {
                assign[i] = best;
                changed = true;
            }
        }
        if (!changed && iter > 0) break;

        std::vector<Vec3> sums(k, {0, 0, 0});
        std::vector<int> counts(k, 0);
        for (size_t i = 0; i < n; ++i) {
            sums[assign[i]] += points[i];
            ++counts[assign[i]];
        }
        for (int c = 0; c < k; ++c) {
            if (counts[c] > 0) {
                centroids[c] = sums[c] / counts[c];
            } else {
                // reseed to the globally farthest point from its own centroid
                double worst = -1;
                size_t worst_i = 0;
                for (size_t i = 0; i < n; ++i) {
                    Vec3 diff = points[i] - centroids[assign[i]];
                    double d = dot(diff, diff);
                    if (d > worst) {
                        worst = d;
                        worst_i = i;
                    }
                }
                centroids[c] = points[worst_i];
                assign[worst_i] = c;
            }
        }
    }
    return centroids;
}

// Index of the nearest centroid (ties to the lowest index).
inline int nearest_centroid(const std::vector<Vec3>& centroids, const Vec3& p) {
    int best = 0;
    double best_d = std::numeric_limits<double>::max();
    for (size_t c = 0; c < centroids.size(); ++c) {
        Vec3 diff = p - centroids[c];
        double d = dot(diff, diff);
        if (d < best_d) {
            best_d = d;
            best = static_cast<int>(c);
        }
    }
    return best;
}

}  // namespace pg
