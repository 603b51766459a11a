#pragma once
#include <string>
#include <vector>
#include "pg/vec.hpp"

namespace pg {

// Linear HDR raster, row 0 at the top (render order). PFM stores scanlines
// bottom-to-top; the readers/writers do the flip.
struct Image {
    int width = 0, height = 0;
    std::vector<RGB> pixels;  // row-major, size width * height

    Image() = default;
    Image(int w, int h) : width(w), height(h), pixels(static_cast<size_t>(w) * h) {}
    RGB& at(int x, int y) { return pixels[static_cast<size_t>(y) * width + x]; }
    const RGB& at(int x, int y) const { return pixels[static_cast<size_t>(y) * width + x]; }
};

// 3-channel PFM: "PF\n<w> <h>\n-1.0\n" then float32 little-endian scanlines,
// bottom row first. Values pass through a float cast, so a write/read
// round-trip is exact only at float32 precision.
void write_pfm(const std::string& path, const Image& img);
Image read_pfm(const std::string& path);

// Binary PPM (P6) preview: clamp(linear * exposure)^(1/gamma) quantized to
// 8 bits with rounding.
void write_ppm(const std::string& path, const Image& img, double exposure = 1.0,
               double gamma = 2.2);

}  // namespace pg
