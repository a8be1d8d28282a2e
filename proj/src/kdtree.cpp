#include "kacsim/kdtree.hpp"

#include <cmath>
#include <limits>

namespace kacsim {

namespace {
constexpr std::size_t kLeafSize = 16;

double component(const Vec3& v, int axis) { return axis == 0 ? v.x : (axis == 1 ? v.y : v.z); }
}  // namespace

KdTree3::KdTree3(const std::vector<Vec3>& points) : pts_(points) {
    order_.resize(points.size());
    for (std::size_t i = 0; i < order_.size(); ++i) order_[i] = i;
    nodes_.reserve(points.size() / kLeafSize * 2 + 2);
    if (!points.empty()) root_ = build(0, points.size());
}

std::size_t KdTree3::build(std::size_t begin, std::size_t end) {
    const std::size_t id = nodes_.size();
    nodes_.push_back({});
    if (end - begin <= kLeafSize) {
        nodes_[id].axis = -1;
        nodes_[id].left = begin;
        nodes_[id].right = end;
        return id;
    }
    Vec3 lo{std::numeric_limits<double>::max(), std::numeric_limits<double>::max(),
            std::numeric_limits<double>::max()};
    Vec3 hi = -1.0 * lo;
    for (std::size_t i = begin; i < end; ++i) {
        const Vec3& p = pts_[order_[i]];
        lo = {std::min(lo.x, p.x), std::min(lo.y, p.y), std::min(lo.z, p.z)};
        hi = {std::max(hi.x, p.x), std::max(hi.y, p.y), std::max(hi.z, p.z)};
    }
    const Vec3 span = hi - lo;
    int axis = 0;
    if (span.y > span.x) axis = 1;
    if (component(span, 2) > component(span, axis)) axis = 2;

    const std::size_t mid = begin + (end - begin) / 2;
    std::nth_element(order_.begin() + static_cast<std::ptrdiff_t>(begin),
                     order_.begin() + static_cast<std::ptrdiff_t>(mid),
                     order_.begin() + static_cast<std::ptrdiff_t>(end),
                     [&](std::size_t a, std::size_t b) {
                         return component(pts_[a], axis) < component(pts_[b], axis);
                     });
    nodes_[id].axis = axis;
    nodes_[id].split = component(pts_[order_[mid]], axis);
    const std::size_t left = build(begin, mid);
    const std::size_t right = build(mid, end);
    nodes_[id].left = left;
    nodes_[id].right = right;
    return id;
}

void KdTree3::knn(const Vec3& q, std::size_t k, std::size_t exclude,
                  std::vector<Neighbor>& out) const {
    out.clear();
    if (pts_.empty() || k == 0) return;
    search(root_, q, k, exclude, out);
    std::sort_heap(out.begin(), out.end());
}

void KdTree3::search(std::size_t node, const Vec3& q, std::size_t k, std::size_t exclude,
                     std::vector<Neighbor>& heap) const {
    const Node& nd = nodes_[node];
    if (nd.axis < 0) {
        for (std::size_t i = nd.left; i < nd.right; ++i) {
            const std::size_t idx = order_[i];
            if (idx == exclude) continue;
            const double d2 = norm2(pts_[idx] - q);
            if (heap.size() < k) {
                heap.push_back({d2, idx});
                std::push_heap(heap.begin(), heap.end());
            } else if (d2 < heap.front().dist2) {
                std::pop_heap(heap.begin(), heap.end());
                heap.back() = {d2, idx};
                std::push_heap(heap.begin(), heap.end());
            }
        }
        return;
    }
    const double delta = component(q, nd.axis) - nd.split;
    const std::size_t near = delta <= 0.0 ? nd.left : nd.right;
    const std::size_t far = delta <= 0.0 ? nd.right : nd.left;
    search(near, q, k, exclude, heap);
    if (heap.size() < k || delta * delta < heap.front().dist2) search(far, q, k, exclude, heap);
}

}  // namespace kacsim
