#pragma once

#include "depthq/fixture.hpp"
#include "depthq/geometry.hpp"
#include "depthq/io.hpp"

#include <array>
#include <string>
#include <vector>

namespace depthq {

/// One detected fiducial corner: sub-pixel image position plus the depth
/// reading there, in raw units. Real-valued so sub-unit depth sources (for
/// example marker pose estimators) lose nothing; samples read from a depth
/// image are whole numbers.
struct CornerSample {
    double u = 0.0;
    double v = 0.0;
    double d = 0.0;
};

/// Detected corners of one marker, fixed order:
/// top-left, top-right, bottom-right, bottom-left.
struct MarkerObservation {
    int id = 0;
    std::array<CornerSample, 4> corners;
};

/// Corner detections for a frame. Registration requires every fixture marker
/// to be present exactly once with all four corners.
struct CornerObservations {
    std::vector<MarkerObservation> markers;
};

/// Outcome of fitting the camera-to-mesh transform to the 16 corners.
struct RegistrationResult {
    RigidTransform transform; // camera -> mesh
    double rms_residual = 0.0;
    std::vector<double> residuals; // meters, one per corner, marker-id order
};

/// Least-squares rigid fit: minimizes sum ||target_i - (R*source_i + t)||^2
/// over rotations and translations (no scale), via SVD of the centered
/// cross-covariance with determinant-sign correction.
/// Throws RegistrationError for fewer than 3 points, length mismatch, or a
/// degenerate (collinear) source set.
RigidTransform estimate_rigid(const std::vector<Vec3>& source, const std::vector<Vec3>& target);

/// Deprojects the 16 observed corners, fits the camera-to-mesh transform
/// against the descriptor corners, and applies it to the cloud.
/// Throws RegistrationError for missing/duplicate/unknown markers, zero
/// corner depth, or rms residual above reject_threshold (meters).
std::pair<PointCloud, RegistrationResult> register_cloud(const PointCloud& cloud,
                                                         const CornerObservations& obs,
                                                         const CameraIntrinsics& intr,
                                                         double depth_scale,
                                                         const FixtureDescriptor& desc,
                                                         double reject_threshold = 0.005);

// JSON corner files: {"markers": [{"id": n, "corners": [[u, v, d] x4]} x4]}.
std::string write_corner_observations(const CornerObservations& obs);
CornerObservations parse_corner_observations(const std::string& text);

} // namespace depthq
