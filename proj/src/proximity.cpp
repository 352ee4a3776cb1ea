#include "depthq/proximity.hpp"

#include "depthq/errors.hpp"

#include <Eigen/Geometry>

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <utility>

namespace depthq {

namespace {

double squared_distance_to_box(const Vec3& q, const Vec3& lo, const Vec3& hi) {
    const Vec3 d = (lo - q).cwiseMax(q - hi).cwiseMax(0.0);
    return d.squaredNorm();
}

/// Spread the low 21 bits of x so each lands every third output bit.
std::uint64_t spread_bits(std::uint64_t x) {
    x &= 0x1fffff;
    x = (x | x << 32) & 0x1f00000000ffff;
    x = (x | x << 16) & 0x1f0000ff0000ff;
    x = (x | x << 8) & 0x100f00f00f00f00f;
    x = (x | x << 4) & 0x10c30c30c30c30c3;
    x = (x | x << 2) & 0x1249249249249249;
    return x;
}

std::uint64_t morton_code(const Vec3& p, const Vec3& lo, const Vec3& span) {
    std::uint64_t cell[3];
    for (int i = 0; i < 3; ++i) {
        double s = span[i] > 0.0 ? (p[i] - lo[i]) / span[i] : 0.0;
        if (!(s > 0.0)) s = 0.0;
        if (s > 1.0) s = 1.0;
        cell[i] = static_cast<std::uint64_t>(s * 2097151.0);
    }
    return spread_bits(cell[0]) << 2 | spread_bits(cell[1]) << 1 | spread_bits(cell[2]);
}

/// Entry parameter of the ray into the box, or nullopt when the ray misses
/// it entirely within (0, t_limit).
std::optional<double> ray_box_entry(const Vec3& origin, const Vec3& dir, const Vec3& lo,
                                    const Vec3& hi, double t_limit) {
    double t_near = 0.0;
    double t_far = t_limit;
    for (int i = 0; i < 3; ++i) {
        if (dir[i] == 0.0) {
            if (origin[i] < lo[i] || origin[i] > hi[i]) return std::nullopt;
            continue;
        }
        const double inv = 1.0 / dir[i];
        double t0 = (lo[i] - origin[i]) * inv;
        double t1 = (hi[i] - origin[i]) * inv;
        if (t0 > t1) std::swap(t0, t1);
        t_near = std::max(t_near, t0);
        t_far = std::min(t_far, t1);
        if (t_near > t_far) return std::nullopt;
    }
    return t_near;
}

/// Closest point on triangle (a, b, c) to p and its squared distance, by
/// Voronoi-region classification (Ericson, Real-Time Collision Detection).
inline double triangle_squared_distance(const Vec3& p, const Vec3& a, const Vec3& b,
                                        const Vec3& c, Vec3& cp) {
    const Vec3 ab = b - a;
    const Vec3 ac = c - a;
    const Vec3 ap = p - a;

    const double d1 = ab.dot(ap);
    const double d2 = ac.dot(ap);
    if (d1 <= 0.0 && d2 <= 0.0) {
        cp = a;
        return (p - cp).squaredNorm();
    }

    const Vec3 bp = p - b;
    const double d3 = ab.dot(bp);
    const double d4 = ac.dot(bp);
    if (d3 >= 0.0 && d4 <= d3) {
        cp = b;
        return (p - cp).squaredNorm();
    }

    const double vc = d1 * d4 - d3 * d2;
    if (vc <= 0.0 && d1 >= 0.0 && d3 <= 0.0) {
        const double v = d1 / (d1 - d3);
        cp = a + v * ab;
        return (p - cp).squaredNorm();
    }

    const Vec3 cq = p - c;
    const double d5 = ab.dot(cq);
    const double d6 = ac.dot(cq);
    if (d6 >= 0.0 && d5 <= d6) {
        cp = c;
        return (p - cp).squaredNorm();
    }

    const double vb = d5 * d2 - d1 * d6;
    if (vb <= 0.0 && d2 >= 0.0 && d6 <= 0.0) {
        const double w = d2 / (d2 - d6);
        cp = a + w * ac;
        return (p - cp).squaredNorm();
    }

    const double va = d3 * d6 - d5 * d4;
    if (va <= 0.0 && d4 - d3 >= 0.0 && d5 - d6 >= 0.0) {
        const double w = (d4 - d3) / ((d4 - d3) + (d5 - d6));
        cp = b + w * (c - b);
        return (p - cp).squaredNorm();
    }

    const double denom = 1.0 / (va + vb + vc);
    const double v = vb * denom;
    const double w = vc * denom;
    cp = a + v * ab + w * ac;
    return (p - cp).squaredNorm();
}

/// Moller-Trumbore, both-sided. Returns the ray parameter of the hit.
std::optional<double> ray_triangle(const Vec3& origin, const Vec3& dir, const Vec3& a,
                                   const Vec3& b, const Vec3& c) {
    const Vec3 e1 = b - a;
    const Vec3 e2 = c - a;
    const Vec3 pvec = dir.cross(e2);
    const double det = e1.dot(pvec);
    if (det == 0.0) return std::nullopt;
    const double inv_det = 1.0 / det;
    const Vec3 tvec = origin - a;
    const double u = tvec.dot(pvec) * inv_det;
    if (u < 0.0 || u > 1.0) return std::nullopt;
    const Vec3 qvec = tvec.cross(e1);
    const double v = dir.dot(qvec) * inv_det;
    if (v < 0.0 || u + v > 1.0) return std::nullopt;
    const double t = e2.dot(qvec) * inv_det;
    if (t <= 0.0) return std::nullopt;
    return t;
}

} // namespace

Vec3 closest_point_on_triangle(const Vec3& p, const Vec3& a, const Vec3& b, const Vec3& c) {
    Vec3 cp;
    triangle_squared_distance(p, a, b, c, cp);
    return cp;
}

MeshBvh::MeshBvh(TriangleMesh mesh) : mesh_(std::move(mesh)) {
    if (mesh_.empty()) {
        throw ValidationError("cannot build a bounding-box tree over an empty mesh");
    }
    const auto n = static_cast<std::uint32_t>(mesh_.face_count());
    centroids_.reserve(n);
    tri_order_.resize(n);
    for (std::uint32_t i = 0; i < n; ++i) {
        const Face& f = mesh_.faces()[i];
        centroids_.push_back((mesh_.vertices()[f[0]] + mesh_.vertices()[f[1]] +
                              mesh_.vertices()[f[2]]) /
                             3.0);
        tri_order_[i] = i;
    }
    nodes_.reserve(2 * n);
    root_ = build(0, n);

    tris_.reserve(n);
    for (const std::uint32_t tri : tri_order_) {
        const Face& f = mesh_.faces()[tri];
        tris_.push_back(
            {mesh_.vertices()[f[0]], mesh_.vertices()[f[1]], mesh_.vertices()[f[2]], tri});
    }
    centroids_.clear();
    centroids_.shrink_to_fit();
    tri_order_.clear();
    tri_order_.shrink_to_fit();
}

std::uint32_t MeshBvh::build(std::uint32_t begin, std::uint32_t end) {
    Node node;
    node.box_min = Vec3::Constant(std::numeric_limits<double>::infinity());
    node.box_max = -node.box_min;
    Vec3 centroid_min = node.box_min;
    Vec3 centroid_max = node.box_max;
    for (std::uint32_t k = begin; k < end; ++k) {
        const Face& f = mesh_.faces()[tri_order_[k]];
        for (std::uint32_t vi : f) {
            node.box_min = node.box_min.cwiseMin(mesh_.vertices()[vi]);
            node.box_max = node.box_max.cwiseMax(mesh_.vertices()[vi]);
        }
        centroid_min = centroid_min.cwiseMin(centroids_[tri_order_[k]]);
        centroid_max = centroid_max.cwiseMax(centroids_[tri_order_[k]]);
    }

    const std::uint32_t count = end - begin;
    if (count <= 4) {
        node.first = begin;
        node.count = count;
        nodes_.push_back(node);
        return static_cast<std::uint32_t>(nodes_.size() - 1);
    }

    int axis = 0;
    const Vec3 spread = centroid_max - centroid_min;
    if (spread[1] > spread[axis]) axis = 1;
    if (spread[2] > spread[axis]) axis = 2;

    const std::uint32_t mid = begin + count / 2;
    std::nth_element(tri_order_.begin() + begin, tri_order_.begin() + mid,
                     tri_order_.begin() + end, [&](std::uint32_t lhs, std::uint32_t rhs) {
                         if (centroids_[lhs][axis] != centroids_[rhs][axis]) {
                             return centroids_[lhs][axis] < centroids_[rhs][axis];
                         }
                         return lhs < rhs;
                     });

    const std::uint32_t node_index = static_cast<std::uint32_t>(nodes_.size());
    nodes_.push_back(node);
    const std::uint32_t left = build(begin, mid);
    const std::uint32_t right = build(mid, end);
    nodes_[node_index].left = static_cast<std::int32_t>(left);
    nodes_[node_index].right = static_cast<std::int32_t>(right);
    return node_index;
}

ClosestPointResult MeshBvh::closest_point(const Vec3& q) const {
    ClosestPointResult best;
    double best_d2 = std::numeric_limits<double>::infinity();
    best.face = std::numeric_limits<std::uint32_t>::max();

    // entries carry the box distance computed at push time
    struct Visit {
        std::uint32_t node;
        double box_d2;
    };
    Visit stack[64];
    int top = 0;
    stack[top++] = {root_, squared_distance_to_box(q, nodes_[root_].box_min,
                                                   nodes_[root_].box_max)};
    while (top > 0) {
        const Visit visit = stack[--top];
        if (visit.box_d2 > best_d2) continue;
        const Node& node = nodes_[visit.node];
        if (node.is_leaf()) {
            for (std::uint32_t k = node.first; k < node.first + node.count; ++k) {
                const LeafTriangle& t = tris_[k];
                Vec3 cp;
                const double d2 = triangle_squared_distance(q, t.a, t.b, t.c, cp);
                if (d2 < best_d2 || (d2 == best_d2 && t.face < best.face)) {
                    best_d2 = d2;
                    best.point = cp;
                    best.face = t.face;
                }
            }
        } else {
            // visit nearer child first so pruning kicks in sooner; ties must
            // still be pushed, the face-index tie-break needs to see them
            auto near = static_cast<std::uint32_t>(node.left);
            auto far = static_cast<std::uint32_t>(node.right);
            double d_near = squared_distance_to_box(q, nodes_[near].box_min, nodes_[near].box_max);
            double d_far = squared_distance_to_box(q, nodes_[far].box_min, nodes_[far].box_max);
            if (d_far < d_near) {
                std::swap(near, far);
                std::swap(d_near, d_far);
            }
            if (d_far <= best_d2) stack[top++] = {far, d_far};
            if (d_near <= best_d2) stack[top++] = {near, d_near};
        }
    }
    best.distance = std::sqrt(best_d2);
    return best;
}

std::vector<ClosestPointResult> MeshBvh::closest_points_batch(const PointCloud& cloud) const {
    std::vector<ClosestPointResult> out(cloud.size());
    if (out.empty()) return out;

    // visiting queries in Morton order keeps consecutive queries in the same
    // region of the tree, so the upper nodes stay cached; each query is
    // independent and the output order is unchanged
    Vec3 lo = cloud.points.front();
    Vec3 hi = lo;
    for (const Vec3& p : cloud.points) {
        lo = lo.cwiseMin(p);
        hi = hi.cwiseMax(p);
    }
    const Vec3 span = hi - lo;
    std::vector<std::pair<std::uint64_t, std::uint32_t>> schedule(cloud.size());
    for (std::uint32_t i = 0; i < cloud.size(); ++i) {
        schedule[i] = {morton_code(cloud.points[i], lo, span), i};
    }
    std::sort(schedule.begin(), schedule.end());
    for (const auto& [code, i] : schedule) out[i] = closest_point(cloud.points[i]);
    return out;
}

void MeshBvh::audit() const {
    std::vector<int> seen(mesh_.face_count(), 0);

    const std::function<void(std::uint32_t)> walk = [&](std::uint32_t index) {
        const Node& node = nodes_[index];
        if (node.is_leaf()) {
            for (std::uint32_t k = node.first; k < node.first + node.count; ++k) {
                const LeafTriangle& lt = tris_[k];
                if (lt.face >= seen.size()) {
                    throw ValidationError("tree references face " + std::to_string(lt.face) +
                                          " past the mesh");
                }
                ++seen[lt.face];
                const Face& f = mesh_.faces()[lt.face];
                if ((lt.a.array() != mesh_.vertices()[f[0]].array()).any() ||
                    (lt.b.array() != mesh_.vertices()[f[1]].array()).any() ||
                    (lt.c.array() != mesh_.vertices()[f[2]].array()).any()) {
                    throw ValidationError("stored copy of face " + std::to_string(lt.face) +
                                          " disagrees with the mesh");
                }
                for (const Vec3* p : {&lt.a, &lt.b, &lt.c}) {
                    if ((p->array() < node.box_min.array()).any() ||
                        (p->array() > node.box_max.array()).any()) {
                        throw ValidationError("leaf box does not bound face " +
                                              std::to_string(lt.face));
                    }
                }
            }
            return;
        }
        for (const std::int32_t child : {node.left, node.right}) {
            if (child < 0 || static_cast<std::size_t>(child) >= nodes_.size()) {
                throw ValidationError("internal node has an invalid child index");
            }
            const Node& c = nodes_[static_cast<std::size_t>(child)];
            if ((c.box_min.array() < node.box_min.array()).any() ||
                (c.box_max.array() > node.box_max.array()).any()) {
                throw ValidationError("child box escapes its parent box");
            }
            walk(static_cast<std::uint32_t>(child));
        }
    };
    walk(root_);

    for (std::size_t i = 0; i < seen.size(); ++i) {
        if (seen[i] != 1) {
            throw ValidationError("face " + std::to_string(i) + " appears in " +
                                  std::to_string(seen[i]) + " leaves");
        }
    }
}

std::optional<RayHit> MeshBvh::raycast(const Vec3& origin, const Vec3& dir) const {
    double best_t = std::numeric_limits<double>::infinity();
    std::uint32_t best_face = std::numeric_limits<std::uint32_t>::max();

    std::uint32_t stack[64];
    int top = 0;
    stack[top++] = root_;
    while (top > 0) {
        const Node& node = nodes_[stack[--top]];
        const auto entry = ray_box_entry(origin, dir, node.box_min, node.box_max, best_t);
        if (!entry || *entry > best_t) continue;
        if (node.is_leaf()) {
            for (std::uint32_t k = node.first; k < node.first + node.count; ++k) {
                const LeafTriangle& lt = tris_[k];
                const auto t = ray_triangle(origin, dir, lt.a, lt.b, lt.c);
                if (!t) continue;
                if (*t < best_t || (*t == best_t && lt.face < best_face)) {
                    best_t = *t;
                    best_face = lt.face;
                }
            }
        } else {
            stack[top++] = static_cast<std::uint32_t>(node.right);
            stack[top++] = static_cast<std::uint32_t>(node.left);
        }
    }
    if (best_face == std::numeric_limits<std::uint32_t>::max()) return std::nullopt;
    return RayHit{best_t, best_face};
}

} // namespace depthq
