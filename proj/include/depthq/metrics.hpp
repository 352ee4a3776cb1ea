#pragma once

#include "depthq/fixture.hpp"
#include "depthq/geometry.hpp"
#include "depthq/io.hpp"
#include "depthq/proximity.hpp"
#include "depthq/registration.hpp"

#include <map>
#include <string>
#include <vector>

namespace depthq {

/// Depth-quality summary for one frame against one reference mesh.
///
/// density = inlier_count / visible_area, with inliers counted strictly
/// inside the tolerance. total_points is the size of the cropped cloud the
/// RMSE averages over.
struct QualityReport {
    std::string pattern_id;
    std::string label;             // capture source name, for comparisons
    double tolerance = 0.0;        // meters
    double rmse = 0.0;             // meters
    double density = 0.0;          // points per m^2
    std::size_t inlier_count = 0;
    std::size_t total_points = 0;
    double visible_area = 0.0;     // m^2
    Vec3 camera_normal = Vec3::Zero(); // view direction, mesh frame, unit
    double registration_rms = 0.0; // meters
    std::map<std::string, std::string> input_digests; // filename -> digest
};

/// Keeps exactly the points inside roi expanded by t (closed bounds),
/// preserving order. Requires a mesh-frame cloud and t >= 0.
PointCloud crop_to_roi(const PointCloud& cloud, const Aabb& roi, double t);

/// Root mean square of the closest-point distances.
/// Throws NoDataError on an empty list: no surviving points means the
/// measurement failed, not that it was perfect.
double rmse(const std::vector<ClosestPointResult>& results);

/// Surface area facing the camera, plus the mesh-frame view direction c
/// (the camera optical axis rotated by H's rotation). A face counts as
/// visible when the angle between its outward normal and c exceeds pi/2,
/// i.e. normal . c < 0.
std::pair<double, Vec3> visible_area(const TriangleMesh& mesh, const RigidTransform& h);

/// Points strictly closer than t to the mesh, per unit visible area.
/// Throws ValidationError for t <= 0 and NoDataError for area <= 0.
double density(const std::vector<ClosestPointResult>& results, double t, double area);

/// Full pipeline for one frame: register, crop, measure.
/// Throws RegistrationError / NoDataError from the corresponding stage.
QualityReport evaluate(const PointCloud& cloud, const CornerObservations& obs,
                       const CameraIntrinsics& intr, double depth_scale,
                       const FixtureDescriptor& desc, const TriangleMesh& reference,
                       double tolerance, double reject_threshold = 0.005);

/// Same pipeline against a prebuilt distance structure for the reference
/// mesh, for callers evaluating many frames against one fixture.
QualityReport evaluate(const PointCloud& cloud, const CornerObservations& obs,
                       const CameraIntrinsics& intr, double depth_scale,
                       const FixtureDescriptor& desc, const MeshBvh& reference_bvh,
                       double tolerance, double reject_threshold = 0.005);

// JSON report files carrying every QualityReport field.
std::string write_report(const QualityReport& report);
QualityReport parse_report(const std::string& text);

} // namespace depthq
