#include "depthq/synth.hpp"

#include "depthq/errors.hpp"
#include "depthq/proximity.hpp"

#include <cmath>
#include <numbers>
#include <string>

namespace depthq {

namespace {

// Distinct per-purpose stream salts so depth noise, dropout, and corner
// noise never correlate even at the same pixel index.
constexpr std::uint64_t kDepthNoiseSalt = 0x9ad5ea5a0c7ff34bULL;
constexpr std::uint64_t kDropoutSalt = 0x41c64e6da3bc0074ULL;
constexpr std::uint64_t kCornerNoiseSalt = 0x6a09e667f3bcc909ULL;

std::uint64_t mix64(std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

/// Counter-based stream: every (seed, salt, index) pair owns an independent
/// sequence, so parallel render order can never change the output.
class Stream {
public:
    Stream(std::uint64_t seed, std::uint64_t salt, std::uint64_t index)
        : state_(mix64(mix64(seed ^ salt) ^ index)) {}

    std::uint64_t next() {
        state_ += 0x9e3779b97f4a7c15ULL;
        std::uint64_t z = state_;
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; } // [0, 1)

    double gaussian() {
        const double u1 = 1.0 - uniform(); // (0, 1]
        const double u2 = uniform();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
    }

private:
    std::uint64_t state_;
};

void validate_scene(const SyntheticScene& scene) {
    if (!(scene.depth_scale > 0.0)) {
        throw ValidationError("depth scale must be positive");
    }
    if (!(scene.noise.sigma >= 0.0)) {
        throw ValidationError("noise sigma must be non-negative");
    }
    if (!(scene.noise.dropout >= 0.0 && scene.noise.dropout <= 1.0)) {
        throw ValidationError("dropout probability must lie in [0, 1]");
    }
}

} // namespace

CameraIntrinsics default_synth_intrinsics() {
    return CameraIntrinsics(600.0, 600.0, 320.0, 240.0, 640, 480);
}

RigidTransform frontal_pose(double distance) {
    if (!(distance > 0.0)) {
        throw ValidationError("camera distance must be positive");
    }
    Mat3 r;
    r << 1, 0, 0, 0, -1, 0, 0, 0, -1;
    return RigidTransform(r, Vec3(0.0, 0.0, distance));
}

SyntheticScene make_scene(const TriangleMesh& reference, const FixtureDescriptor& desc,
                          const RigidTransform& pose, const CameraIntrinsics& intr,
                          double depth_scale, const NoiseModel& noise, std::uint64_t seed) {
    SyntheticScene scene;
    scene.reference = reference;
    scene.scene = reference;
    scene.scene.append(generate_backplate_mesh(desc.backplate_extent));
    scene.descriptor = desc;
    scene.pose = pose;
    scene.intrinsics = intr;
    scene.depth_scale = depth_scale;
    scene.noise = noise;
    scene.seed = seed;
    validate_scene(scene);
    return scene;
}

DepthImage render_depth(const SyntheticScene& scene) {
    validate_scene(scene);
    const CameraIntrinsics& intr = scene.intrinsics;
    DepthImage img(intr.width, intr.height, scene.depth_scale);
    if (scene.scene.empty()) return img;

    TriangleMesh camera_mesh = scene.scene.transformed(scene.pose);
    const Aabb bounds = camera_mesh.aabb();
    if (bounds.contains(Vec3::Zero())) {
        throw ValidationError("camera origin lies inside the scene bounds");
    }
    const MeshBvh bvh(std::move(camera_mesh));

    const Vec3 origin = Vec3::Zero();
    for (int v = 0; v < intr.height; ++v) {
        for (int u = 0; u < intr.width; ++u) {
            const std::uint64_t pixel = static_cast<std::uint64_t>(v) * intr.width + u;
            // direction scaled so the ray parameter equals camera z
            const Vec3 dir((u - intr.cx) / intr.fx, (v - intr.cy) / intr.fy, 1.0);
            const auto hit = bvh.raycast(origin, dir);
            if (!hit) continue;
            double z = hit->t;
            if (scene.noise.sigma > 0.0) {
                z += scene.noise.sigma *
                     Stream(scene.seed, kDepthNoiseSalt, pixel).gaussian();
            }
            if (scene.noise.dropout > 0.0 &&
                Stream(scene.seed, kDropoutSalt, pixel).uniform() < scene.noise.dropout) {
                continue;
            }
            long long raw = std::llround(z * scene.depth_scale);
            if (raw < 0) raw = 0;
            if (raw > 65535) raw = 65535;
            img.at(u, v) = static_cast<std::uint16_t>(raw);
        }
    }
    return img;
}

CornerObservations project_corners(const SyntheticScene& scene) {
    validate_scene(scene);
    const CameraIntrinsics& intr = scene.intrinsics;
    CornerObservations obs;
    std::string out_of_frame;

    for (std::size_t i = 0; i < scene.descriptor.markers.size(); ++i) {
        const MarkerSpec& marker = scene.descriptor.markers[i];
        MarkerObservation m;
        m.id = marker.id;
        bool ok = true;
        for (std::size_t k = 0; k < 4; ++k) {
            const Vec3 p = scene.pose(marker.corners[k]);
            if (p.z() <= 0.0) {
                ok = false;
                break;
            }
            const double u = intr.fx * p.x() / p.z() + intr.cx;
            const double v = intr.fy * p.y() / p.z() + intr.cy;
            if (u < 0.0 || u > intr.width - 1 || v < 0.0 || v > intr.height - 1) {
                ok = false;
                break;
            }
            double d = p.z() * scene.depth_scale;
            if (scene.noise.sigma > 0.0) {
                d += scene.noise.sigma * scene.depth_scale *
                     Stream(scene.seed, kCornerNoiseSalt, i * 4 + k).gaussian();
            }
            m.corners[k] = CornerSample{u, v, d};
        }
        if (!ok) {
            if (!out_of_frame.empty()) out_of_frame += ", ";
            out_of_frame += std::to_string(marker.id);
            continue;
        }
        obs.markers.push_back(m);
    }
    if (!out_of_frame.empty()) {
        throw ValidationError("markers not fully inside the frame: " + out_of_frame);
    }
    return obs;
}

void render_scene_bundle(const SyntheticScene& scene, const std::filesystem::path& outdir) {
    const DepthImage depth = render_depth(scene);
    const CornerObservations corners = project_corners(scene);

    std::error_code ec;
    std::filesystem::create_directories(outdir, ec);
    if (ec) {
        throw Error("cannot create output directory " + outdir.string() + ": " + ec.message());
    }

    write_file(outdir / "depth.pgm", write_depth_pgm(depth));
    write_file(outdir / "corners.json", write_corner_observations(corners));
    SensorConfig config;
    config.intrinsics = scene.intrinsics;
    config.depth_scale = scene.depth_scale;
    write_file(outdir / "intrinsics.json", write_intrinsics(config));
    write_file(outdir / "descriptor.json", write_descriptor(scene.descriptor));
    write_file(outdir / "reference.stl", write_stl(scene.reference));
}

} // namespace depthq
