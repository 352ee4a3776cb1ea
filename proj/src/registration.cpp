#include "depthq/registration.hpp"

#include "depthq/errors.hpp"

#include <json.hpp>

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>

namespace depthq {

RigidTransform estimate_rigid(const std::vector<Vec3>& source, const std::vector<Vec3>& target) {
    if (source.size() != target.size()) {
        throw RegistrationError("correspondence lists differ in length (" +
                                std::to_string(source.size()) + " vs " +
                                std::to_string(target.size()) + ")");
    }
    const std::size_t n = source.size();
    if (n < 3) {
        throw RegistrationError("rigid estimation needs at least 3 correspondences, got " +
                                std::to_string(n));
    }

    Vec3 src_mean = Vec3::Zero();
    Vec3 tgt_mean = Vec3::Zero();
    for (std::size_t i = 0; i < n; ++i) {
        src_mean += source[i];
        tgt_mean += target[i];
    }
    src_mean /= static_cast<double>(n);
    tgt_mean /= static_cast<double>(n);

    Mat3 cov = Mat3::Zero();
    for (std::size_t i = 0; i < n; ++i) {
        cov += (target[i] - tgt_mean) * (source[i] - src_mean).transpose();
    }
    cov /= static_cast<double>(n);

    Eigen::JacobiSVD<Mat3> svd(cov, Eigen::ComputeFullU | Eigen::ComputeFullV);
    const Vec3 sigma = svd.singularValues();
    // a collinear source set leaves the rotation about its axis unconstrained
    if (sigma(1) <= 1e-12 * std::max(sigma(0), 1e-300)) {
        throw RegistrationError("degenerate correspondence set (points are collinear)");
    }

    Mat3 s = Mat3::Identity();
    if ((svd.matrixU() * svd.matrixV().transpose()).determinant() < 0.0) {
        s(2, 2) = -1.0;
    }
    const Mat3 rotation = svd.matrixU() * s * svd.matrixV().transpose();
    return RigidTransform(rotation, tgt_mean - rotation * src_mean);
}

std::pair<PointCloud, RegistrationResult> register_cloud(const PointCloud& cloud,
                                                         const CornerObservations& obs,
                                                         const CameraIntrinsics& intr,
                                                         double depth_scale,
                                                         const FixtureDescriptor& desc,
                                                         double reject_threshold) {
    if (cloud.frame != Frame::Camera) {
        throw RegistrationError("cloud must be in the camera frame");
    }
    if (!(depth_scale > 0.0)) {
        throw RegistrationError("depth scale must be positive");
    }

    std::vector<Vec3> observed;   // camera frame
    std::vector<Vec3> reference;  // mesh frame
    observed.reserve(16);
    reference.reserve(16);
    for (const MarkerSpec& spec : desc.markers) {
        const MarkerObservation* found = nullptr;
        for (const MarkerObservation& m : obs.markers) {
            if (m.id != spec.id) continue;
            if (found) {
                throw RegistrationError("marker " + std::to_string(spec.id) +
                                        " observed more than once");
            }
            found = &m;
        }
        if (!found) {
            throw RegistrationError("marker " + std::to_string(spec.id) + " was not observed");
        }
        for (std::size_t k = 0; k < 4; ++k) {
            const CornerSample& c = found->corners[k];
            if (!(c.d > 0.0)) {
                throw RegistrationError("marker " + std::to_string(spec.id) + " corner " +
                                        std::to_string(k) + " has no depth reading");
            }
            const double z = c.d / depth_scale;
            observed.emplace_back(z * (c.u - intr.cx) / intr.fx, z * (c.v - intr.cy) / intr.fy,
                                  z);
            reference.push_back(spec.corners[k]);
        }
    }
    for (const MarkerObservation& m : obs.markers) {
        const bool known = std::any_of(desc.markers.begin(), desc.markers.end(),
                                       [&](const MarkerSpec& s) { return s.id == m.id; });
        if (!known) {
            throw RegistrationError("observed marker " + std::to_string(m.id) +
                                    " is not part of the fixture");
        }
    }

    RegistrationResult result;
    result.transform = estimate_rigid(observed, reference);
    result.residuals.reserve(observed.size());
    double sum_sq = 0.0;
    for (std::size_t i = 0; i < observed.size(); ++i) {
        const double r = (reference[i] - result.transform(observed[i])).norm();
        result.residuals.push_back(r);
        sum_sq += r * r;
    }
    result.rms_residual = std::sqrt(sum_sq / static_cast<double>(observed.size()));
    if (result.rms_residual > reject_threshold) {
        char buf[128];
        std::snprintf(buf, sizeof(buf),
                      "registration rms residual %.6f m exceeds the reject threshold %.6f m",
                      result.rms_residual, reject_threshold);
        throw RegistrationError(buf);
    }

    PointCloud registered = cloud.transformed(result.transform, Frame::Mesh);
    return {std::move(registered), std::move(result)};
}

std::string write_corner_observations(const CornerObservations& obs) {
    nlohmann::json markers = nlohmann::json::array();
    for (const MarkerObservation& m : obs.markers) {
        nlohmann::json corners = nlohmann::json::array();
        for (const CornerSample& c : m.corners) {
            corners.push_back(nlohmann::json::array({c.u, c.v, c.d}));
        }
        markers.push_back({{"id", m.id}, {"corners", corners}});
    }
    return nlohmann::json{{"markers", markers}}.dump(2) + "\n";
}

CornerObservations parse_corner_observations(const std::string& text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw FormatError(std::string("corner observations: invalid JSON: ") + e.what());
    }
    CornerObservations obs;
    try {
        for (const auto& mj : j.at("markers")) {
            MarkerObservation m;
            m.id = mj.at("id").get<int>();
            const auto& corners = mj.at("corners");
            if (!corners.is_array() || corners.size() != 4) {
                throw FormatError("corner observations: marker " + std::to_string(m.id) +
                                  " must list exactly 4 corners");
            }
            for (std::size_t k = 0; k < 4; ++k) {
                const auto& c = corners[k];
                if (!c.is_array() || c.size() != 3) {
                    throw FormatError("corner observations: corners must be [u, v, d] triples");
                }
                m.corners[k] = {c[0].get<double>(), c[1].get<double>(), c[2].get<double>()};
            }
            obs.markers.push_back(m);
        }
    } catch (const nlohmann::json::exception& e) {
        throw FormatError(std::string("corner observations: ") + e.what());
    }
    return obs;
}

} // namespace depthq
