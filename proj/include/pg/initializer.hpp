#pragma once
#include <vector>
#include "pg/gaussian.hpp"
#include "pg/rng.hpp"
#include "pg/scene.hpp"

namespace pg {

struct SurfaceSampleSet {
    std::vector<Vec3> points;      // on caster surfaces
    std::vector<double> weights;   // per-point area weight (> 0)
    std::vector<int> surface_ids;  // owning Surface index per point
};

struct SeedGaussianSet {
    std::vector<Gaussian3> gaussians;
    std::vector<long> counters;  // one per Gaussian, photon votes
};

// n points on caster surfaces, selection probability proportional to area.
// Throws std::invalid_argument when the scene has no casters.
SurfaceSampleSet sample_geometry(const Scene& scene, int n, Pcg32& rng);

// Per caster geometry: K k-means centroids become Gaussian means, sigma is
// the RMS centroid-to-member distance floored at 1e-4 * bounding diameter.
SeedGaussianSet build_seed_set(const Scene& scene, int k_per_geometry, int n_samples,
                               Pcg32& rng);

// Votes each point to its nearest seed mean (ties to the lowest index) and
// returns the top-G voted Gaussians (ties to the lowest index). Counters are
// cleared on entry; only Gaussians with nonzero votes are returned, so the
// result may be shorter than G. Empty input returns empty.
std::vector<Gaussian3> assign_and_rank(SeedGaussianSet& seed,
                                       const std::vector<Vec3>& first_bounce_points, int G);

// Fallback for lights whose photon votes produced nothing: G Gaussians drawn
// uniformly from the seed set (with replacement only if the set is smaller).
std::vector<Gaussian3> uniform_seed_fallback(const SeedGaussianSet& seed, int G, Pcg32& rng);

// Wraps a ranked selection as a uniform-weight mixture.
GaussianMixture mixture_from_gaussians(const std::vector<Gaussian3>& gaussians);

}  // namespace pg
