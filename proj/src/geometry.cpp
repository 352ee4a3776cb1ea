#include "depthq/geometry.hpp"

#include "depthq/errors.hpp"

#include <Eigen/Geometry>
#include <Eigen/LU>

#include <cmath>
#include <limits>
#include <string>

namespace depthq {

namespace {

constexpr double kOrthoTol = 1e-9;
constexpr double kMinFaceArea = 1e-12; // m^2

void check_finite(const Vec3& v, const char* what) {
    if (!v.allFinite()) {
        throw ValidationError(std::string(what) + " has non-finite components");
    }
}

} // namespace

RigidTransform::RigidTransform() : rotation_(Mat3::Identity()), translation_(Vec3::Zero()) {}

RigidTransform::RigidTransform(const Mat3& rotation, const Vec3& translation)
    : rotation_(rotation), translation_(translation) {
    if (!rotation_.allFinite() || !translation_.allFinite()) {
        throw ValidationError("rigid transform has non-finite entries");
    }
    const double ortho = (rotation_.transpose() * rotation_ - Mat3::Identity()).norm();
    if (ortho >= kOrthoTol) {
        throw ValidationError("rotation is not orthonormal (||R^T R - I|| = " +
                              std::to_string(ortho) + ")");
    }
    if (rotation_.determinant() <= 0.0) {
        throw ValidationError("rotation has non-positive determinant (reflection?)");
    }
}

RigidTransform RigidTransform::operator*(const RigidTransform& rhs) const {
    return RigidTransform(rotation_ * rhs.rotation_, rotation_ * rhs.translation_ + translation_);
}

RigidTransform RigidTransform::inverse() const {
    Mat3 rt = rotation_.transpose();
    return RigidTransform(rt, -(rt * translation_));
}

Aabb::Aabb(const Vec3& min_corner, const Vec3& max_corner) : min(min_corner), max(max_corner) {
    check_finite(min, "aabb min");
    check_finite(max, "aabb max");
    for (int i = 0; i < 3; ++i) {
        if (min[i] > max[i]) {
            throw ValidationError("aabb min exceeds max on axis " + std::to_string(i));
        }
    }
}

Aabb Aabb::expanded(double t) const {
    if (!(t >= 0.0)) {
        throw ValidationError("aabb expansion must be non-negative, got " + std::to_string(t));
    }
    return Aabb(min - Vec3::Constant(t), max + Vec3::Constant(t));
}

TriangleMesh::TriangleMesh(std::vector<Vec3> vertices, std::vector<Face> faces)
    : vertices_(std::move(vertices)), faces_(std::move(faces)) {
    for (std::size_t i = 0; i < vertices_.size(); ++i) {
        check_finite(vertices_[i], "mesh vertex");
    }
    normals_.reserve(faces_.size());
    const auto n_vertices = vertices_.size();
    for (std::size_t i = 0; i < faces_.size(); ++i) {
        const Face& f = faces_[i];
        for (int k = 0; k < 3; ++k) {
            if (f[k] >= n_vertices) {
                throw ValidationError("face " + std::to_string(i) + " references vertex " +
                                      std::to_string(f[k]) + " but mesh has " +
                                      std::to_string(n_vertices) + " vertices");
            }
        }
        const Vec3 e1 = vertices_[f[1]] - vertices_[f[0]];
        const Vec3 e2 = vertices_[f[2]] - vertices_[f[0]];
        const Vec3 cross = e1.cross(e2);
        const double area = 0.5 * cross.norm();
        if (!(area > kMinFaceArea)) {
            throw ValidationError("face " + std::to_string(i) + " is degenerate (area " +
                                  std::to_string(area) + " m^2)");
        }
        normals_.push_back(cross.normalized());
    }
}

const Vec3& TriangleMesh::face_normal(std::size_t face_index) const {
    if (face_index >= faces_.size()) {
        throw ValidationError("face index " + std::to_string(face_index) + " out of range");
    }
    return normals_[face_index];
}

double TriangleMesh::face_area(std::size_t face_index) const {
    if (face_index >= faces_.size()) {
        throw ValidationError("face index " + std::to_string(face_index) + " out of range");
    }
    const Face& f = faces_[face_index];
    const Vec3 e1 = vertices_[f[1]] - vertices_[f[0]];
    const Vec3 e2 = vertices_[f[2]] - vertices_[f[0]];
    return 0.5 * e1.cross(e2).norm();
}

double TriangleMesh::total_area() const {
    double sum = 0.0;
    for (std::size_t i = 0; i < faces_.size(); ++i) {
        sum += face_area(i);
    }
    return sum;
}

Aabb TriangleMesh::aabb() const {
    if (vertices_.empty()) {
        throw ValidationError("aabb of an empty mesh");
    }
    Vec3 lo = Vec3::Constant(std::numeric_limits<double>::infinity());
    Vec3 hi = -lo;
    for (const Vec3& v : vertices_) {
        lo = lo.cwiseMin(v);
        hi = hi.cwiseMax(v);
    }
    return Aabb(lo, hi);
}

TriangleMesh TriangleMesh::transformed(const RigidTransform& t) const {
    std::vector<Vec3> moved;
    moved.reserve(vertices_.size());
    for (const Vec3& v : vertices_) {
        moved.push_back(t.apply(v));
    }
    return TriangleMesh(std::move(moved), faces_);
}

void TriangleMesh::append(const TriangleMesh& other) {
    const auto offset = static_cast<std::uint32_t>(vertices_.size());
    vertices_.insert(vertices_.end(), other.vertices_.begin(), other.vertices_.end());
    faces_.reserve(faces_.size() + other.faces_.size());
    for (const Face& f : other.faces_) {
        faces_.push_back({f[0] + offset, f[1] + offset, f[2] + offset});
    }
    normals_.insert(normals_.end(), other.normals_.begin(), other.normals_.end());
}

PointCloud::PointCloud(std::vector<Vec3> pts, Frame f) : points(std::move(pts)), frame(f) {}

PointCloud::PointCloud(std::vector<Vec3> pts, std::vector<Color> cols, Frame f)
    : points(std::move(pts)), colors(std::move(cols)), frame(f) {
    if (!colors.empty() && colors.size() != points.size()) {
        throw ValidationError("color count " + std::to_string(colors.size()) +
                              " does not match point count " + std::to_string(points.size()));
    }
}

PointCloud PointCloud::transformed(const RigidTransform& t, Frame new_frame) const {
    PointCloud out;
    out.points.reserve(points.size());
    for (const Vec3& p : points) {
        out.points.push_back(t.apply(p));
    }
    out.colors = colors;
    out.frame = new_frame;
    return out;
}

} // namespace depthq
