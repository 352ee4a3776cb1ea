#pragma once

#include "depthq/geometry.hpp"

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace depthq {

/// Raw 16-bit depth frame. Sample value 0 means "no return" and is excluded
/// from deprojection. depth_scale is raw units per meter (1000 = millimeters).
struct DepthImage {
    int width = 0;
    int height = 0;
    double depth_scale = 1.0;
    std::vector<std::uint16_t> data; // row-major, data[v*width + u]

    DepthImage() = default;
    DepthImage(int w, int h, double scale);
    DepthImage(int w, int h, double scale, std::vector<std::uint16_t> samples);

    std::uint16_t at(int u, int v) const { return data[static_cast<std::size_t>(v) * width + u]; }
    std::uint16_t& at(int u, int v) { return data[static_cast<std::size_t>(v) * width + u]; }
};

/// Ideal pinhole model. Focal lengths and principal point in pixels.
struct CameraIntrinsics {
    double fx = 0.0;
    double fy = 0.0;
    double cx = 0.0;
    double cy = 0.0;
    int width = 0;
    int height = 0;

    CameraIntrinsics() = default;
    CameraIntrinsics(double fx_, double fy_, double cx_, double cy_, int w, int h);
};

/// Intrinsics file payload: pinhole parameters plus the sensor depth scale.
struct SensorConfig {
    CameraIntrinsics intrinsics;
    double depth_scale = 1.0;
};

// --- STL (triangle meshes) ---------------------------------------------
// Binary STL: 80-byte header, uint32 face count, 50-byte little-endian
// records. ASCII "solid ... endsolid" is accepted on parse. Duplicated
// vertices are welded at exact coordinate equality; stored normals are
// ignored and recomputed from the winding.

TriangleMesh parse_stl(const std::vector<std::uint8_t>& bytes);

/// Canonical binary STL. Vertex coordinates are truncated to float32 and
/// normals recomputed from the truncated coordinates, so writing the parse
/// of a written file reproduces it byte for byte.
std::vector<std::uint8_t> write_stl(const TriangleMesh& mesh);

// --- PLY (point clouds, ASCII) ------------------------------------------
// element vertex with float x,y,z and optional uchar red,green,blue.
// Coordinates are printed with 9 significant digits.

PointCloud parse_ply_pointcloud(const std::vector<std::uint8_t>& bytes);
std::vector<std::uint8_t> write_ply_pointcloud(const PointCloud& cloud);

// --- PGM (depth frames) ---------------------------------------------------
// P5, maxval 65535, big-endian 16-bit samples. The depth scale rides in a
// comment line "# depth_scale <value>" so a frame is self-describing.

DepthImage parse_depth_pgm(const std::vector<std::uint8_t>& bytes);
std::vector<std::uint8_t> write_depth_pgm(const DepthImage& img);

// --- Intrinsics (flat JSON object) ---------------------------------------
// Keys: fx, fy, cx, cy, width, height, depth_scale.

SensorConfig parse_intrinsics(const std::string& text);
std::string write_intrinsics(const SensorConfig& config);

// --- File helpers ---------------------------------------------------------

std::vector<std::uint8_t> read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, const std::vector<std::uint8_t>& bytes);
void write_file(const std::filesystem::path& path, const std::string& text);

/// FNV-1a 64-bit digest, used to stamp input provenance into reports.
std::string fnv1a_digest(const std::vector<std::uint8_t>& bytes);

} // namespace depthq
