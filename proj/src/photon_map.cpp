#include "pg/photon_map.hpp"

#include <algorithm>
#include <cmath>

namespace pg {

namespace {
double axis_of(const Vec3& v, int a) { return a == 0 ? v.x : (a == 1 ? v.y : v.z); }
}  // namespace

PhotonMap::PhotonMap(std::vector<Photon> photons) : photons_(std::move(photons)) {
    nodes_.resize(photons_.size());
    if (!photons_.empty()) build(0, static_cast<int>(photons_.size()));
}

// The subtree over [begin, end) stores its median photon at index `begin`;
// the median-partitioned halves become the child subtrees.
void PhotonMap::build(int begin, int end) {
    Vec3 lo = photons_[begin].position, hi = lo;
    for (int i = begin + 1; i < end; ++i) {
        lo = min(lo, photons_[i].position);
        hi = max(hi, photons_[i].position);
    }
    Vec3 ext = hi - lo;
    int axis = ext.x >= ext.y ? (ext.x >= ext.z ? 0 : 2) : (ext.y >= ext.z ? 1 : 2);

    int mid = begin + (end - begin) / 2;
    std::nth_element(photons_.begin() + begin, photons_.begin() + mid, photons_.begin() + end,
                     [axis](const Photon& a, const Photon& b) {
                         return axis_of(a.position, axis) < axis_of(b.position, axis);
                     });
    // root to the front; the displaced element stays in the <=-median half
    std::swap(photons_[begin], photons_[mid]);
    nodes_[begin].axis = axis;
    if (begin + 1 < mid + 1) {
        nodes_[begin].left = begin + 1;
        build(begin + 1, mid + 1);
    }
    if (mid + 1 < end) {
        nodes_[begin].right = mid + 1;
        build(mid + 1, end);
    }
}

void PhotonMap::knn(const Vec3& x, int k, double max_radius, std::vector<int>& out) const {
    out.clear();
    if (photons_.empty() || k <= 0 || max_radius <= 0) return;

    // sorted (distance^2, index) shortlist capped at k entries
    std::vector<std::pair<double, int>> best;
    best.reserve(k + 1);
    const double r2 = max_radius * max_radius;

    std::vector<int> stack;
    stack.reserve(64);
    stack.push_back(0);
    while (!stack.empty()) {
        int ni = stack.back();
        stack.pop_back();
        const Photon& p = photons_[ni];
        Vec3 d = x - p.position;
        double d2 = dot(d, d);
        double limit2 = best.size() == static_cast<size_t>(k) ? best.back().first : r2;
        if (d2 <= limit2) {
            auto it = std::lower_bound(best.begin(), best.end(), std::make_pair(d2, ni));
            best.insert(it, {d2, ni});
            if (best.size() > static_cast<size_t>(k)) best.pop_back();
        }
        double worst2 = best.size() == static_cast<size_t>(k) ? best.back().first : r2;

        double delta = axis_of(x, nodes_[ni].axis) - axis_of(p.position, nodes_[ni].axis);
        int near = delta <= 0 ? nodes_[ni].left : nodes_[ni].right;
        int far = delta <= 0 ? nodes_[ni].right : nodes_[ni].left;
        if (far >= 0 && delta * delta <= worst2) stack.push_back(far);
        if (near >= 0) stack.push_back(near);
    }

    for (const auto& [d2, idx] : best) out.push_back(idx);
}

void PhotonMap::within(const Vec3& x, double radius, std::vector<int>& out) const {
    out.clear();
    if (photons_.empty() || radius <= 0) return;
    const double r2 = radius * radius;

    std::vector<int> stack;
    stack.reserve(64);
    stack.push_back(0);
    while (!stack.empty()) {
        int ni = stack.back();
        stack.pop_back();
        const Photon& p = photons_[ni];
        Vec3 d = x - p.position;
        if (dot(d, d) <= r2) out.push_back(ni);

        double delta = axis_of(x, nodes_[ni].axis) - axis_of(p.position, nodes_[ni].axis);
        int near = delta <= 0 ? nodes_[ni].left : nodes_[ni].right;
        int far = delta <= 0 ? nodes_[ni].right : nodes_[ni].left;
        if (far >= 0 && delta * delta <= r2) stack.push_back(far);
        if (near >= 0) stack.push_back(near);
    }
}

}  // namespace pg
