#pragma once
#include <vector>
#include "pg/vec.hpp"

namespace pg {

struct Photon {
    Vec3 position{0, 0, 0};   // deposit location on a receiver
    Vec3 incident{0, 0, 0};   // direction of travel at deposit
    RGB flux{0, 0, 0};        // W, already divided by emission pdf and light pmf
    int light_id = 0;
    Vec3 first_bounce{0, 0, 0};
    double emission_pdf = 1;  // joint emission density times light pmf
    int gather_count = 0;
    int emission_index = -1;  // back-reference to the per-emission training record
    int first_surface = -1;   // surface id of the first bounce (bound-guide attribution)
};

// Balanced median-split KD-tree over photon positions. Build reorders the
// photons; query indices refer to the reordered array exposed by photons().
class PhotonMap {
public:
    PhotonMap() = default;
    explicit PhotonMap(std::vector<Photon> photons);

    size_t size() const { return photons_.size(); }
    const std::vector<Photon>& photons() const { return photons_; }
    Photon& photon(size_t i) { return photons_[i]; }

    // Indices of the k nearest photons with distance <= max_radius, sorted by
    // ascending distance. Returns min(k, matches-in-range) entries.
    void knn(const Vec3& x, int k, double max_radius, std::vector<int>& out) const;

    // Indices of every photon with distance <= radius, in no particular order.
    void within(const Vec3& x, double radius, std::vector<int>& out) const;

private:
    struct Node {
        int axis = 0;      // split dimension
        int left = -1;     // child node ids, -1 when absent
        int right = -1;
    };
    void build(int begin, int end);

    std::vector<Photon> photons_;  // photon i belongs to node i
    std::vector<Node> nodes_;
};

}  // namespace pg
