#pragma once
#include <cmath>
#include <cstdint>
#include <algorithm>

namespace pg {

struct Vec3 {
    double x = 0, y = 0, z = 0;

    Vec3() = default;
    Vec3(double x_, double y_, double z_) : x(x_), y(y_), z(z_) {}

    Vec3 operator+(const Vec3& o) const { return {x + o.x, y + o.y, z + o.z}; }
    Vec3 operator-(const Vec3& o) const { return {x - o.x, y - o.y, z - o.z}; }
    Vec3 operator*(double s) const { return {x * s, y * s, z * s}; }
    Vec3 operator/(double s) const { return {x / s, y / s, z / s}; }
    Vec3 operator-() const { return {-x, -y, -z}; }
    Vec3& operator+=(const Vec3& o) { x += o.x; y += o.y; z += o.z; return *this; }
    Vec3& operator-=(const Vec3& o) { x -= o.x; y -= o.y; z -= o.z; return *this; }
    Vec3& operator*=(double s) { x *= s; y *= s; z *= s; return *this; }
    double operator[](int i) const { return i == 0 ? x : (i == 1 ? y : z); }
    double& operator[](int i) { return i == 0 ? x : (i == 1 ? y : z); }
    bool operator==(const Vec3& o) const { return x == o.x && y == o.y && z == o.z; }
};

inline Vec3 operator*(double s, const Vec3& v) { return v * s; }
inline double dot(const Vec3& a, const Vec3& b) { return a.x * b.x + a.y * b.y + a.z * b.z; }
inline Vec3 cross(const Vec3& a, const Vec3& b) {
    return {a.y * b.z - a.z * b.y, a.z * b.x - a.x * b.z, a.x * b.y - a.y * b.x};
}
inline double length_sq(const Vec3& v) { return dot(v, v); }
inline double length(const Vec3& v) { return std::sqrt(dot(v, v)); }
inline Vec3 normalize(const Vec3& v) { return v / length(v); }
inline Vec3 min(const Vec3& a, const Vec3& b) {
    return {std::min(a.x, b.x), std::min(a.y, b.y), std::min(a.z, b.z)};
}
inline Vec3 max(const Vec3& a, const Vec3& b) {
    return {std::max(a.x, b.x), std::max(a.y, b.y), std::max(a.z, b.z)};
}
inline bool is_finite(const Vec3& v) {
    return std::isfinite(v.x) && std::isfinite(v.y) && std::isfinite(v.z);
}

// Unit vector. Constructors normalize; invariant |w| = 1 within 1e-9.
struct Direction {
    Vec3 v{0, 0, 1};

    Direction() = default;
    explicit Direction(const Vec3& u) : v(normalize(u)) {}
    Direction(double x, double y, double z) : v(normalize(Vec3{x, y, z})) {}

    operator const Vec3&() const { return v; }
    double x() const { return v.x; }
    double y() const { return v.y; }
    double z() const { return v.z; }
};

inline double dot(const Direction& a, const Vec3& b) { return dot(a.v, b); }
inline double dot(const Vec3& a, const Direction& b) { return dot(a, b.v); }
inline double dot(const Direction& a, const Direction& b) { return dot(a.v, b.v); }

struct RGB {
    double r = 0, g = 0, b = 0;

    RGB() = default;
    RGB(double r_, double g_, double b_) : r(r_), g(g_), b(b_) {}
    explicit RGB(double s) : r(s), g(s), b(s) {}

    RGB operator+(const RGB& o) const { return {r + o.r, g + o.g, b + o.b}; }
    RGB operator-(const RGB& o) const { return {r - o.r, g - o.g, b - o.b}; }
    RGB operator*(const RGB& o) const { return {r * o.r, g * o.g, b * o.b}; }
    RGB operator*(double s) const { return {r * s, g * s, b * s}; }
    RGB operator/(double s) const { return {r / s, g / s, b / s}; }
    RGB& operator+=(const RGB& o) { r += o.r; g += o.g; b += o.b; return *this; }
    RGB& operator*=(double s) { r *= s; g *= s; b *= s; return *this; }
    bool operator==(const RGB& o) const { return r == o.r && g == o.g && b == o.b; }
};

inline RGB operator*(double s, const RGB& c) { return c * s; }
inline double luminance(const RGB& c) { return 0.2126 * c.r + 0.7152 * c.g + 0.0722 * c.b; }
inline double max_component(const RGB& c) { return std::max(c.r, std::max(c.g, c.b)); }
inline bool is_finite(const RGB& c) {
    return std::isfinite(c.r) && std::isfinite(c.g) && std::isfinite(c.b);
}

}  // namespace pg
