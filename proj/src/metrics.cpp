#include "pg/metrics.hpp"

#include <cmath>
#include <stdexcept>
#include <vector>

namespace pg {

namespace {

void check_dims(const Image& a, const Image& b) {
    if (a.width != b.width || a.height != b.height)
        throw std::invalid_argument("metrics: image dimensions differ");
    if (a.width <= 0 || a.height <= 0)
        throw std::invalid_argument("metrics: empty image");
}

constexpr int kRadius = 5;  // 11-tap window

// Grid of doubles with valid-region separable filtering (no padding: the
// output shrinks by kRadius on every side).
struct Grid {
    int w = 0, h = 0;
    std::vector<double> v;
    Grid(int w_, int h_) : w(w_), h(h_), v(static_cast<size_t>(w_) * h_) {}
    double& at(int x, int y) { return v[static_cast<size_t>(y) * w + x]; }
    double at(int x, int y) const { return v[static_cast<size_t>(y) * w + x]; }
};

Grid filter_valid(const Grid& img, const double (&k)[2 * kRadius + 1]) {
    Grid tmp(img.w - 2 * kRadius, img.h);
    for (int y = 0; y < img.h; ++y)
        for (int x = 0; x < tmp.w; ++x) {
            double acc = 0;
            for (int i = 0; i <= 2 * kRadius; ++i) acc += k[i] * img.at(x + i, y);
            tmp.at(x, y) = acc;
        }
    Grid out(tmp.w, img.h - 2 * kRadius);
    for (int y = 0; y < out.h; ++y)
        for (int x = 0; x < out.w; ++x) {
            double acc = 0;
            for (int i = 0; i <= 2 * kRadius; ++i) acc += k[i] * tmp.at(x, y + i);
            out.at(x, y) = acc;
        }
    return out;
}

Grid luma_grid(const Image& img) {
    Grid g(img.width, img.height);
    for (int y = 0; y < img.height; ++y)
        for (int x = 0; x < img.width; ++x) g.at(x, y) = luminance(img.at(x, y));
    return g;
}

Grid hadamard(const Grid& a, const Grid& b) {
    Grid out(a.w, a.h);
    for (size_t i = 0; i < out.v.size(); ++i) out.v[i] = a.v[i] * b.v[i];
    return out;
}

}  // namespace

double mse(const Image& a, const Image& b) {
    check_dims(a, b);
    double acc = 0;
    for (size_t i = 0; i < a.pixels.size(); ++i) {
        RGB d = a.pixels[i] - b.pixels[i];
        acc += d.r * d.r + d.g * d.g + d.b * d.b;
    }
    return acc / (3.0 * static_cast<double>(a.pixels.size()));
}

double ssim(const Image& a, const Image& b, double data_range) {
    check_dims(a, b);
    if (a.width < 2 * kRadius + 1 || a.height < 2 * kRadius + 1)
        throw std::invalid_argument("ssim: images must be at least 11x11");
    if (!(data_range > 0)) throw std::invalid_argument("ssim: data_range must be positive");

    double k[2 * kRadius + 1];
    double ksum = 0;
    for (int i = 0; i <= 2 * kRadius; ++i) {
        double t = (i - kRadius) / 1.5;
        k[i] = std::exp(-0.5 * t * t);
        ksum += k[i];
    }
    for (double& kv : k) kv /= ksum;

    Grid x = luma_grid(a), y = luma_grid(b);
    Grid ux = filter_valid(x, k), uy = filter_valid(y, k);
    Grid uxx = filter_valid(hadamard(x, x), k);
    Grid uyy = filter_valid(hadamard(y, y), k);
    Grid uxy = filter_valid(hadamard(x, y), k);

    const double c1 = 0.01 * data_range * 0.01 * data_range;
    const double c2 = 0.03 * data_range * 0.03 * data_range;
    double acc = 0;
    for (size_t i = 0; i < ux.v.size(); ++i) {
        double mx = ux.v[i], my = uy.v[i];
        double vx = uxx.v[i] - mx * mx;
        double vy = uyy.v[i] - my * my;
        double cxy = uxy.v[i] - mx * my;
        acc += ((2.0 * mx * my + c1) * (2.0 * cxy + c2)) /
               ((mx * mx + my * my + c1) * (vx + vy + c2));
    }
    return acc / static_cast<double>(ux.v.size());
}

}  // namespace pg
