#pragma once

#include "depthq/geometry.hpp"

#include <optional>
#include <vector>

namespace depthq {

/// Closest point on the mesh surface for one query.
struct ClosestPointResult {
    Vec3 point = Vec3::Zero(); // on the indexed triangle
    double distance = 0.0;     // meters, >= 0
    std::uint32_t face = 0;
};

/// First ray-mesh intersection along a ray o + t*dir, t > 0.
struct RayHit {
    double t = 0.0; // in units of |dir|
    std::uint32_t face = 0;
};

/// Static bounding-box tree over mesh triangles (median split on the longest
/// centroid axis, at most 4 triangles per leaf). Queries are exact and
/// deterministic: equally distant faces resolve to the lowest face index.
/// Immutable after construction; concurrent queries are safe.
class MeshBvh {
public:
    /// Throws ValidationError on an empty mesh.
    explicit MeshBvh(TriangleMesh mesh);

    const TriangleMesh& mesh() const { return mesh_; }

    /// Globally nearest surface point to q over all triangles.
    ClosestPointResult closest_point(const Vec3& q) const;

    /// Elementwise closest_point over the cloud, order preserving. Queries
    /// run in Morton order internally so nearby queries reuse cached nodes.
    std::vector<ClosestPointResult> closest_points_batch(const PointCloud& cloud) const;

    /// Nearest intersection with t > 0; dir need not be unit length
    /// (t is reported in units of |dir|). Misses yield nullopt.
    std::optional<RayHit> raycast(const Vec3& origin, const Vec3& dir) const;

    /// Structural self-check: every triangle sits in exactly one leaf and
    /// every node box bounds its contents. Throws ValidationError on any
    /// violation.
    void audit() const;

private:
    struct alignas(64) Node {
        Vec3 box_min;
        Vec3 box_max;
        std::int32_t left = -1;  // internal: child node indices
        std::int32_t right = -1;
        std::uint32_t first = 0; // leaf: range into tris_
        std::uint32_t count = 0;

        bool is_leaf() const { return count > 0; }
    };

    // triangles flattened in leaf order, so a leaf scan is one linear pass
    struct LeafTriangle {
        Vec3 a;
        Vec3 b;
        Vec3 c;
        std::uint32_t face = 0;
    };

    std::uint32_t build(std::uint32_t begin, std::uint32_t end);

    TriangleMesh mesh_;
    std::vector<Vec3> centroids_;
    std::vector<std::uint32_t> tri_order_;
    std::vector<LeafTriangle> tris_;
    std::vector<Node> nodes_;
    std::uint32_t root_ = 0;
};

/// Exact closest point on triangle (a, b, c) to p, by Voronoi-region
/// classification (vertex, edge, and face regions handled separately).
Vec3 closest_point_on_triangle(const Vec3& p, const Vec3& a, const Vec3& b, const Vec3& c);

} // namespace depthq
