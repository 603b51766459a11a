#pragma once
#include <stdexcept>
#include <vector>

namespace pg {

// Adaptive binary tree over light indices. Each node stores the gathered-
// photon count for its contiguous light range; sampling descends by count
// (plus a +1 virtual prior per node so unexplored lights keep nonzero
// probability), leaves choose uniformly within their range. Leaves whose
// count passes branch_threshold split, children seeded with half the count.
class LightTree {
public:
    enum class UpdateMode { kDecay, kReplace };

    explicit LightTree(int num_lights, int branch_threshold = 64,
                       UpdateMode mode = UpdateMode::kDecay, double prior = 1.0)
        : num_lights_(num_lights), branch_threshold_(branch_threshold), mode_(mode),
          prior_(prior) {
        if (num_lights <= 0) throw std::invalid_argument("LightTree: need at least one light");
        nodes_.push_back({0, num_lights, -1, -1, 0.0});
    }

    int num_lights() const { return num_lights_; }
    size_t node_count() const { return nodes_.size(); }

    // Draws a light using u in [0,1) as the only randomness; also reports the
    // exact probability of the drawn light.
    int sample_light(double u, double* pmf_out = nullptr) const {
        int ni = 0;
        double prob = 1.0;
        while (nodes_[ni].left >= 0) {
            const Node& l = nodes_[nodes_[ni].left];
            const Node& r = nodes_[nodes_[ni].right];
            double wl = l.count + prior_, wr = r.count + prior_;
            double pl = wl / (wl + wr);
            if (u < pl) {
                u = u / pl;
                prob *= pl;
                ni = nodes_[ni].left;
            } else {
                u = (u - pl) / (1.0 - pl);
                prob *= 1.0 - pl;
                ni = nodes_[ni].right;
            }
        }
        int size = nodes_[ni].end - nodes_[ni].begin;
        int offset = static_cast<int>(u * size);
        if (offset >= size) offset = size - 1;
        if (pmf_out) *pmf_out = prob / size;
        return nodes_[ni].begin + offset;
    }

    // Probability sample_light assigns to this light.
    double pmf(int light) const {
        if (light < 0 || light >= num_lights_)
            throw std::out_of_range("LightTree::pmf: light index out of range");
        int ni = 0;
        double prob = 1.0;
        while (nodes_[ni].left >= 0) {
            const Node& l = nodes_[nodes_[ni].left];
            const Node& r = nodes_[nodes_[ni].right];
            double wl = l.count + prior_, wr = r.count + prior_;
            if (light < l.end) {
                prob *= wl / (wl + wr);
                ni = nodes_[ni].left;
            } else {
                prob *= wr / (wl + wr);
                ni = nodes_[ni].right;
            }
        }
        return prob / (nodes_[ni].end - nodes_[ni].begin);
    }

    // Adds gathered photons along the root->leaf path of the light.
    void record(int light, int gathered) {
        if (light < 0 || light >= num_lights_)
            throw std::out_of_range("LightTree::record: light index out of range");
        int ni = 0;
        nodes_[ni].count += gathered;
        while (nodes_[ni].left >= 0) {
            ni = light < nodes_[nodes_[ni].left].end ? nodes_[ni].left : nodes_[ni].right;
            nodes_[ni].count += gathered;
        }
    }

    // Call once at iteration start: ages the stored counts so the tree tracks
    // the current distribution (halving decay, or reset for replace mode).
    void begin_iteration() {
        for (Node& n : nodes_) n.count = mode_ == UpdateMode::kDecay ? n.count * 0.5 : 0.0;
    }

    // Call once at iteration end: splits every leaf whose count passed the
    // threshold and still covers more than one light.
    void refine() {
        size_t existing = nodes_.size();
        for (size_t ni = 0; ni < existing; ++ni) {
            Node& n = nodes_[ni];
            if (n.left >= 0 || n.count <= branch_threshold_ || n.end - n.begin <= 1) continue;
            int mid = n.begin + (n.end - n.begin) / 2;
            double half = n.count * 0.5;
            int li = static_cast<int>(nodes_.size());
            // careful: push_back may reallocate; re-reference through index
            nodes_.push_back({nodes_[ni].begin, mid, -1, -1, half});
            nodes_.push_back({mid, nodes_[ni].end, -1, -1, half});
            nodes_[ni].left = li;
            nodes_[ni].right = li + 1;
        }
    }

    double root_count() const { return nodes_[0].count; }

private:
    struct Node {
        int begin, end;   // light range [begin, end)
        int left, right;  // child node indices, -1 for leaves
        double count;
    };
    int num_lights_;
    int branch_threshold_;
    UpdateMode mode_;
    double prior_;
    std::vector<Node> nodes_;
};

}  // namespace pg
