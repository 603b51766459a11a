#pragma once
#include "pg/gaussian.hpp"
#include "pg/image.hpp"
#include "pg/scene.hpp"

namespace pg {

// Equirectangular map of the mixture's directional pdf seen from `observe`:
// pixel (x, y) covers azimuth phi = 2*pi*(x+0.5)/W (around +z from +x) and
// polar theta = pi*(y+0.5)/H measured from +y, so the top row looks up.
// r = g = b = pdf (sr^-1); an empty mixture maps to the uniform 1/(4*pi).
Image directional_heatmap(const GaussianMixture& mixture, const Vec3& observe, int width,
                          int height);

// Solid-angle-weighted sum of the red channel of an equirectangular map laid
// out as above; approaches 1 for a valid directional pdf as the grid refines.
double heatmap_integral(const Image& map);

// Mixture splatted over a wireframe-style facing-ratio render from the scene
// camera: each component becomes an additive disc at its projected mean with
// the projected sigma as radius, colored by relative weight.
Image splat_mixture(const Scene& scene, const GaussianMixture& mixture, int width, int height);

// Blue->green->yellow->red ramp for scalar maps (t clamped to [0, 1]).
RGB heat_color(double t);

// Scalar field (e.g. per-pixel gather radius) to a ramp-colored image;
// values are normalized by `scale` (pass the cap radius).
Image colorize_scalar(const std::vector<double>& values, int width, int height, double scale);

}  // namespace pg
