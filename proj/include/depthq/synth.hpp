#pragma once

#include "depthq/fixture.hpp"
#include "depthq/geometry.hpp"
#include "depthq/io.hpp"
#include "depthq/registration.hpp"

#include <cstdint>
#include <filesystem>

namespace depthq {

/// Sensor imperfections applied to rendered depth, both optional.
/// sigma: gaussian noise along the optical axis, meters.
/// dropout: probability that a returned sample is discarded.
struct NoiseModel {
    double sigma = 0.0;
    double dropout = 0.0;
};

/// Everything needed to render one synthetic observation of a fixture.
/// pose maps mesh-frame points into the camera frame (+z into the scene).
/// scene is what the rays hit (pattern plus backplate); reference is the
/// pattern alone, i.e. the mesh measurements compare against.
struct SyntheticScene {
    TriangleMesh reference;
    TriangleMesh scene;
    FixtureDescriptor descriptor;
    RigidTransform pose;
    CameraIntrinsics intrinsics;
    double depth_scale = 4000.0;
    NoiseModel noise;
    std::uint64_t seed = 0;
};

/// VGA pinhole used by the synthetic camera unless overridden.
CameraIntrinsics default_synth_intrinsics();

/// Raw units per meter for synthetic frames. 4000 keeps the quantization
/// step at 0.25 mm, well under the default 2 mm tolerance, while the full
/// 16-bit range still covers depths past 16 m.
inline constexpr double kDefaultSynthDepthScale = 4000.0;

/// Camera squarely in front of the fixture at the given distance from the
/// backplate face, image up matching fixture up.
RigidTransform frontal_pose(double distance);

/// Assembles a scene for a generated fixture: scene mesh = pattern plus the
/// backplate slab from the descriptor extent. Validates the noise model.
SyntheticScene make_scene(const TriangleMesh& reference, const FixtureDescriptor& desc,
                          const RigidTransform& pose, const CameraIntrinsics& intr,
                          double depth_scale, const NoiseModel& noise, std::uint64_t seed);

/// Ray-casts the scene through every pixel center. Sample = round(z * s)
/// clamped to 16 bits, 0 on miss or dropout. Identical scene and seed give
/// identical images; noise streams are keyed per pixel, not per draw order.
/// Throws ValidationError when the camera sits inside the scene bounds.
DepthImage render_depth(const SyntheticScene& scene);

/// Exact pinhole projection of the 16 descriptor corners: full-precision
/// (u, v) and depth reading d = z * s with the scene's gaussian noise
/// applied (dropout never hits corners: detection is presumed, only depth is
/// simulated). Throws ValidationError naming markers outside the frame.
CornerObservations project_corners(const SyntheticScene& scene);

/// Renders and writes the complete input set for one evaluation:
/// depth.pgm, corners.json, intrinsics.json, descriptor.json, reference.stl.
void render_scene_bundle(const SyntheticScene& scene, const std::filesystem::path& outdir);

} // namespace depthq
