#pragma once

#include <algorithm>
#include <cstddef>
#include <vector>

#include "kacsim/vec3.hpp"

namespace kacsim {

// Static 3-d kd-tree for k-nearest-neighbor queries (entropy and score
// estimators). Median split on the widest axis, leaves of 16 points.
class KdTree3 {
public:
    explicit KdTree3(const std::vector<Vec3>& points);

    struct Neighbor {
        double dist2;
        std::size_t index;
        bool operator<(const Neighbor& o) const { return dist2 < o.dist2; }
    };

    // k nearest neighbors of q, excluding `exclude` (pass npos to keep all).
    // Result sorted by ascending distance.
    void knn(const Vec3& q, std::size_t k, std::size_t exclude, std::vector<Neighbor>& out) const;

    static constexpr std::size_t npos = static_cast<std::size_t>(-1);

private:
    struct Node {
        double split = 0.0;
        int axis = -1;           // -1 marks a leaf
        std::size_t left = 0;    // children for internal nodes,
        std::size_t right = 0;   // [begin, end) into order_ for leaves
    };

    std::size_t build(std::size_t begin, std::size_t end);
    void search(std::size_t node, const Vec3& q, std::size_t k, std::size_t exclude,
                std::vector<Neighbor>& heap) const;

    const std::vector<Vec3>& pts_;
    std::vector<std::size_t> order_;
    std::vector<Node> nodes_;
    std::size_t root_ = 0;
};

}  // namespace kacsim
