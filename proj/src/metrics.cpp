#include "depthq/metrics.hpp"

#include "depthq/errors.hpp"

#include <json.hpp>

#include <cmath>

namespace depthq {

PointCloud crop_to_roi(const PointCloud& cloud, const Aabb& roi, double t) {
    if (cloud.frame != Frame::Mesh) {
        throw ValidationError("crop expects a mesh-frame cloud");
    }
    if (t < 0.0) {
        throw ValidationError("crop tolerance must be non-negative");
    }
    const Aabb box = roi.expanded(t);
    PointCloud out;
    out.frame = Frame::Mesh;
    for (std::size_t i = 0; i < cloud.points.size(); ++i) {
        if (!box.contains(cloud.points[i])) continue;
        out.points.push_back(cloud.points[i]);
        if (cloud.has_colors()) out.colors.push_back(cloud.colors[i]);
    }
    return out;
}

double rmse(const std::vector<ClosestPointResult>& results) {
    if (results.empty()) {
        throw NoDataError("no points to measure (cropped cloud is empty)");
    }
    double sum_sq = 0.0;
    for (const ClosestPointResult& r : results) sum_sq += r.distance * r.distance;
    return std::sqrt(sum_sq / static_cast<double>(results.size()));
}

std::pair<double, Vec3> visible_area(const TriangleMesh& mesh, const RigidTransform& h) {
    // view direction: the camera looks along +z of its own frame; h carries
    // camera-frame directions into the mesh frame
    const Vec3 c = h.rotation() * Vec3(0.0, 0.0, 1.0);
    double area = 0.0;
    for (std::size_t i = 0; i < mesh.face_count(); ++i) {
        if (mesh.face_normal(i).dot(c) < 0.0) area += mesh.face_area(i);
    }
    return {area, c};
}

double density(const std::vector<ClosestPointResult>& results, double t, double area) {
    if (!(t > 0.0)) {
        throw ValidationError("density tolerance must be positive");
    }
    if (!(area > 0.0)) {
        throw NoDataError("no visible reference surface (area is zero)");
    }
    std::size_t inliers = 0;
    for (const ClosestPointResult& r : results) {
        if (r.distance < t) ++inliers;
    }
    return static_cast<double>(inliers) / area;
}

QualityReport evaluate(const PointCloud& cloud, const CornerObservations& obs,
                       const CameraIntrinsics& intr, double depth_scale,
                       const FixtureDescriptor& desc, const TriangleMesh& reference,
                       double tolerance, double reject_threshold) {
    return evaluate(cloud, obs, intr, depth_scale, desc, MeshBvh(reference), tolerance,
                    reject_threshold);
}

QualityReport evaluate(const PointCloud& cloud, const CornerObservations& obs,
                       const CameraIntrinsics& intr, double depth_scale,
                       const FixtureDescriptor& desc, const MeshBvh& reference_bvh,
                       double tolerance, double reject_threshold) {
    if (!(tolerance > 0.0)) {
        throw ValidationError("tolerance must be positive");
    }
    if (cloud.points.empty()) {
        throw NoDataError("depth frame produced no points");
    }

    auto [registered, reg] =
        register_cloud(cloud, obs, intr, depth_scale, desc, reject_threshold);
    const PointCloud cropped = crop_to_roi(registered, desc.roi_box, tolerance);
    const std::vector<ClosestPointResult> nearest =
        reference_bvh.closest_points_batch(cropped);

    QualityReport report;
    report.pattern_id = to_string(desc.pattern_id);
    report.tolerance = tolerance;
    report.rmse = rmse(nearest);
    std::tie(report.visible_area, report.camera_normal) =
        visible_area(reference_bvh.mesh(), reg.transform);
    report.density = density(nearest, tolerance, report.visible_area);
    report.total_points = nearest.size();
    std::size_t inliers = 0;
    for (const ClosestPointResult& r : nearest) {
        if (r.distance < tolerance) ++inliers;
    }
    report.inlier_count = inliers;
    report.registration_rms = reg.rms_residual;
    return report;
}

std::string write_report(const QualityReport& report) {
    nlohmann::json j;
    j["pattern_id"] = report.pattern_id;
    if (!report.label.empty()) j["label"] = report.label;
    j["tolerance_m"] = report.tolerance;
    j["rmse_m"] = report.rmse;
    j["density_pts_per_m2"] = report.density;
    j["inlier_count"] = report.inlier_count;
    j["total_points"] = report.total_points;
    j["visible_area_m2"] = report.visible_area;
    j["camera_normal"] = {report.camera_normal.x(), report.camera_normal.y(),
                          report.camera_normal.z()};
    j["registration_rms_m"] = report.registration_rms;
    j["input_digests"] = report.input_digests;
    return j.dump(2) + "\n";
}

QualityReport parse_report(const std::string& text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw FormatError(std::string("report: invalid JSON: ") + e.what());
    }
    QualityReport r;
    try {
        r.pattern_id = j.at("pattern_id").get<std::string>();
        if (j.contains("label")) r.label = j["label"].get<std::string>();
        r.tolerance = j.at("tolerance_m").get<double>();
        r.rmse = j.at("rmse_m").get<double>();
        r.density = j.at("density_pts_per_m2").get<double>();
        r.inlier_count = j.at("inlier_count").get<std::size_t>();
        r.total_points = j.at("total_points").get<std::size_t>();
        r.visible_area = j.at("visible_area_m2").get<double>();
        const auto& c = j.at("camera_normal");
        r.camera_normal = Vec3(c.at(0).get<double>(), c.at(1).get<double>(),
                               c.at(2).get<double>());
        r.registration_rms = j.at("registration_rms_m").get<double>();
        if (j.contains("input_digests")) {
            r.input_digests =
                j["input_digests"].get<std::map<std::string, std::string>>();
        }
    } catch (const nlohmann::json::exception& e) {
        throw FormatError(std::string("report: ") + e.what());
    }
    return r;
}

} // namespace depthq
