#pragma once
#include "pg/image.hpp"

namespace pg {

// Mean squared error over all linear RGB samples (3 * width * height values).
double mse(const Image& a, const Image& b);

// Structural similarity on the luma channel: 11x11 Gaussian window
// (sigma = 1.5, truncated at radius 5), K1 = 0.01, K2 = 0.03, population
// covariances, averaged over the interior region the window fully covers.
// Matches the scikit-image gaussian-weighted variant to float precision.
// Requires both dimensions >= 11.
double ssim(const Image& a, const Image& b, double data_range);

}  // namespace pg
