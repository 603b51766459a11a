#pragma once
#include <cmath>
#include <vector>
#include "pg/frame.hpp"
#include "pg/gaussian.hpp"
#include "pg/rng.hpp"
#include "pg/vec.hpp"

namespace pg {

// Directional histogram over equal-solid-angle cells: rows uniform in
// cos(theta) in [-1,1], columns uniform in phi in [0,2pi), each cell covering
// exactly 4pi/res^2 steradians in the local frame of `axis`. Sampling adds a
// prior of 1e-3 x the mean cell weight so unobserved directions keep nonzero
// probability; a fresh histogram is exactly the uniform sphere.
class Histogram2D {
public:
    explicit Histogram2D(int res = 256, const Vec3& axis = {0, 0, 1})
        : res_(res), frame_(normalize(axis)), w_(static_cast<size_t>(res) * res, 0.0) {}

    int resolution() const { return res_; }
    double total() const { return total_; }
    double cell_solid_angle() const { return 4.0 * kPi / (static_cast<double>(res_) * res_); }

    int cell_index(const Vec3& dir) const {
        Vec3 local = frame_.to_local(dir);
        double c = std::clamp(local.z, -1.0, 1.0);
        int row = std::min(res_ - 1, static_cast<int>((c + 1.0) * 0.5 * res_));
        double phi = std::atan2(local.y, local.x);
        if (phi < 0) phi += kTwoPi;
        int col = std::min(res_ - 1, static_cast<int>(phi / kTwoPi * res_));
        return row * res_ + col;
    }

    void record(const Vec3& dir, double weight) {
        w_[cell_index(dir)] += weight;
        total_ += weight;
        cdf_dirty_ = true;
    }

    // Additive prior per cell; 1e-3 of the mean weight, or 1 when empty (any
    // positive constant gives the same uniform distribution then).
    double prior() const {
        return total_ > 0 ? 1e-3 * total_ / (static_cast<double>(res_) * res_) : 1.0;
    }

    double pdf(const Vec3& dir) const {
        double p = prior();
        double n = static_cast<double>(res_) * res_;
        double cell_prob = (w_[cell_index(dir)] + p) / (total_ + n * p);
        return cell_prob / cell_solid_angle();
    }

    Direction sample(Pcg32& rng) {
        if (cdf_dirty_) rebuild_cdf();
        double u = rng.next_double() * cdf_.back();
        size_t idx = std::upper_bound(cdf_.begin(), cdf_.end(), u) - cdf_.begin();
        idx = std::min(idx, cdf_.size() - 1);
        int row = static_cast<int>(idx) / res_;
        int col = static_cast<int>(idx) % res_;
        double c = -1.0 + (row + rng.next_double()) * 2.0 / res_;
        double phi = (col + rng.next_double()) * kTwoPi / res_;
        double s = std::sqrt(std::max(0.0, 1.0 - c * c));
        return Direction(frame_.to_world({s * std::cos(phi), s * std::sin(phi), c}));
    }

private:
    void rebuild_cdf() {
        double p = prior();
        cdf_.resize(w_.size());
        double acc = 0;
        for (size_t i = 0; i < w_.size(); ++i) {
            acc += w_[i] + p;
            cdf_[i] = acc;
        }
        cdf_dirty_ = false;
    }

    int res_;
    Frame frame_;
    std::vector<double> w_;
    std::vector<double> cdf_;
    double total_ = 0;
    bool cdf_dirty_ = true;
};

}  // namespace pg
