#pragma once

#include <Eigen/Core>

#include <array>
#include <cstdint>
#include <vector>

namespace depthq {

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;
using Face = std::array<std::uint32_t, 3>;
using Color = std::array<std::uint8_t, 3>;

/// Proper rigid motion: p -> R*p + t. All lengths in meters.
///
/// The constructor enforces orthonormality and det(R) = +1, so composition
/// and inversion stay closed over valid transforms.
class RigidTransform {
public:
    RigidTransform(); // identity
    RigidTransform(const Mat3& rotation, const Vec3& translation);

    static RigidTransform identity() { return RigidTransform(); }

    const Mat3& rotation() const { return rotation_; }
    const Vec3& translation() const { return translation_; }

    Vec3 apply(const Vec3& p) const { return rotation_ * p + translation_; }
    Vec3 operator()(const Vec3& p) const { return apply(p); }

    /// Composition: (a * b)(p) == a(b(p)).
    RigidTransform operator*(const RigidTransform& rhs) const;
    RigidTransform inverse() const;

private:
    Mat3 rotation_;
    Vec3 translation_;
};

/// Axis-aligned box, min <= max componentwise. Closed on all bounds.
struct Aabb {
    Vec3 min;
    Vec3 max;

    Aabb(const Vec3& min_corner, const Vec3& max_corner);

    bool contains(const Vec3& p) const {
        return p.x() >= min.x() && p.x() <= max.x() && p.y() >= min.y() &&
               p.y() <= max.y() && p.z() >= min.z() && p.z() <= max.z();
    }

    /// Grows the box by t >= 0 in every direction.
    Aabb expanded(double t) const;

    Vec3 extent() const { return max - min; }
};

/// Indexed triangle set with per-face unit normals.
///
/// Counter-clockwise winding (seen from outside) defines the outward normal.
/// Construction rejects out-of-range indices and degenerate faces
/// (area <= 1e-12 m^2), so normals are always well defined.
class TriangleMesh {
public:
    TriangleMesh() = default;
    TriangleMesh(std::vector<Vec3> vertices, std::vector<Face> faces);

    const std::vector<Vec3>& vertices() const { return vertices_; }
    const std::vector<Face>& faces() const { return faces_; }
    const std::vector<Vec3>& face_normals() const { return normals_; }

    std::size_t vertex_count() const { return vertices_.size(); }
    std::size_t face_count() const { return faces_.size(); }
    bool empty() const { return faces_.empty(); }

    const Vec3& face_normal(std::size_t face_index) const;
    double face_area(std::size_t face_index) const;
    double total_area() const;

    /// Tight bounding box over all vertices. Throws on an empty mesh.
    Aabb aabb() const;

    /// Vertex positions transformed by t; faces and winding unchanged.
    TriangleMesh transformed(const RigidTransform& t) const;

    /// Appends another mesh (vertices re-indexed).
    void append(const TriangleMesh& other);

private:
    std::vector<Vec3> vertices_;
    std::vector<Face> faces_;
    std::vector<Vec3> normals_;
};

/// Which coordinate system a point cloud lives in.
enum class Frame { Camera, Mesh };

/// 3D points with optional per-point color.
/// colors is either empty or has one entry per point.
struct PointCloud {
    std::vector<Vec3> points;
    std::vector<Color> colors;
    Frame frame = Frame::Camera;

    PointCloud() = default;
    PointCloud(std::vector<Vec3> pts, Frame f);
    PointCloud(std::vector<Vec3> pts, std::vector<Color> cols, Frame f);

    std::size_t size() const { return points.size(); }
    bool has_colors() const { return !colors.empty(); }

    PointCloud transformed(const RigidTransform& t, Frame new_frame) const;
};

} // namespace depthq
