#include "pg/image.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <stdexcept>

namespace pg {

static_assert(std::endian::native == std::endian::little,
              "image i/o assumes a little-endian host");
static_assert(sizeof(float) == 4, "PFM requires 32-bit floats");

void write_pfm(const std::string& path, const Image& img) {
    if (img.width <= 0 || img.height <= 0 ||
        img.pixels.size() != static_cast<size_t>(img.width) * img.height)
        throw std::invalid_argument("write_pfm: malformed image");
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("write_pfm: cannot open " + path);
    out << "PF\n" << img.width << " " << img.height << "\n-1.0\n";
    std::vector<float> row(static_cast<size_t>(img.width) * 3);
    for (int y = img.height - 1; y >= 0; --y) {  // bottom scanline first
        for (int x = 0; x < img.width; ++x) {
            const RGB& p = img.at(x, y);
            row[3 * x + 0] = static_cast<float>(p.r);
            row[3 * x + 1] = static_cast<float>(p.g);
            row[3 * x + 2] = static_cast<float>(p.b);
        }
        out.write(reinterpret_cast<const char*>(row.data()),
                  static_cast<std::streamsize>(row.size() * sizeof(float)));
    }
    if (!out) throw std::runtime_error("write_pfm: write failed for " + path);
}

namespace {

// Reads one whitespace-delimited header token (PFM allows any blend of
// spaces/newlines between the five header fields).
std::string next_token(std::istream& in) {
    std::string tok;
    in >> tok;
    if (!in) throw std::runtime_error("read_pfm: truncated header");
    return tok;
}

}  // namespace

Image read_pfm(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("read_pfm: cannot open " + path);
    std::string magic = next_token(in);
    if (magic != "PF")
        throw std::runtime_error("read_pfm: unsupported magic '" + magic + "' in " + path);
    int w = 0, h = 0;
    double scale = 0;
    try {
        w = std::stoi(next_token(in));
        h = std::stoi(next_token(in));
        scale = std::stod(next_token(in));
    } catch (const std::exception&) {
        throw std::runtime_error("read_pfm: malformed header in " + path);
    }
    if (w <= 0 || h <= 0) throw std::runtime_error("read_pfm: bad dimensions in " + path);
    if (scale >= 0)
        throw std::runtime_error("read_pfm: big-endian data unsupported in " + path);
    in.get();  // single whitespace byte terminating the header

    Image img(w, h);
    std::vector<float> row(static_cast<size_t>(w) * 3);
    double mag = -scale;  // |scale| multiplies the stored samples
    for (int y = h - 1; y >= 0; --y) {
        in.read(reinterpret_cast<char*>(row.data()),
                static_cast<std::streamsize>(row.size() * sizeof(float)));
        if (!in) throw std::runtime_error("read_pfm: truncated pixel data in " + path);
        for (int x = 0; x < w; ++x)
            img.at(x, y) = RGB{row[3 * x + 0] * mag, row[3 * x + 1] * mag, row[3 * x + 2] * mag};
    }
    return img;
}

void write_ppm(const std::string& path, const Image& img, double exposure, double gamma) {
    if (img.width <= 0 || img.height <= 0 ||
        img.pixels.size() != static_cast<size_t>(img.width) * img.height)
        throw std::invalid_argument("write_ppm: malformed image");
    if (!(gamma > 0)) throw std::invalid_argument("write_ppm: gamma must be positive");
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("write_ppm: cannot open " + path);
    out << "P6\n" << img.width << " " << img.height << "\n255\n";
    auto quantize = [&](double v) -> unsigned char {
        v = std::clamp(v * exposure, 0.0, 1.0);
        v = std::pow(v, 1.0 / gamma);
        return static_cast<unsigned char>(std::lround(v * 255.0));
    };
    std::vector<unsigned char> row(static_cast<size_t>(img.width) * 3);
    for (int y = 0; y < img.height; ++y) {
        for (int x = 0; x < img.width; ++x) {
            const RGB& p = img.at(x, y);
            row[3 * x + 0] = quantize(p.r);
            row[3 * x + 1] = quantize(p.g);
            row[3 * x + 2] = quantize(p.b);
        }
        out.write(reinterpret_cast<const char*>(row.data()),
                  static_cast<std::streamsize>(row.size()));
    }
    if (!out) throw std::runtime_error("write_ppm: write failed for " + path);
}

}  // namespace pg
