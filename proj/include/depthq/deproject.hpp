#pragma once

#include "depthq/geometry.hpp"
#include "depthq/io.hpp"

#include <optional>
#include <vector>

namespace depthq {

/// Row-major RGB image used only to color deprojected points.
struct ColorImage {
    int width = 0;
    int height = 0;
    std::vector<Color> data;

    ColorImage() = default;
    ColorImage(int w, int h);

    const Color& at(int u, int v) const {
        return data[static_cast<std::size_t>(v) * width + u];
    }
    Color& at(int u, int v) { return data[static_cast<std::size_t>(v) * width + u]; }
};

/// Pinhole back-projection of one sample:
///   x = (d/s)(u - cx)/fx,  y = (d/s)(v - cy)/fy,  z = d/s
/// Camera frame: +z along the optical axis into the scene. Integer (u, v)
/// address pixel centers.
/// Throws ValidationError when d == 0 or (u, v) is out of bounds.
Vec3 deproject_pixel(const CameraIntrinsics& intr, double depth_scale, double u, double v,
                     std::uint16_t d);

/// One point per valid (d > 0) pixel, row-major order, camera frame.
/// Colors come from rgb at the same pixel when provided.
/// Throws ValidationError when dimensions disagree with the intrinsics.
PointCloud deproject_image(const DepthImage& img, const CameraIntrinsics& intr,
                           const ColorImage* rgb = nullptr);

} // namespace depthq
