#include "depthq/deproject.hpp"

#include "depthq/errors.hpp"

#include <string>

namespace depthq {

ColorImage::ColorImage(int w, int h) : width(w), height(h) {
    if (w <= 0 || h <= 0) {
        throw ValidationError("color image dimensions must be positive");
    }
    data.assign(static_cast<std::size_t>(w) * h, Color{0, 0, 0});
}

Vec3 deproject_pixel(const CameraIntrinsics& intr, double depth_scale, double u, double v,
                     std::uint16_t d) {
    if (d == 0) {
        throw ValidationError("cannot deproject an invalid (zero) depth sample");
    }
    if (u < 0 || u >= intr.width || v < 0 || v >= intr.height) {
        throw ValidationError("pixel (" + std::to_string(u) + ", " + std::to_string(v) +
                              ") lies outside the image");
    }
    const double z = d / depth_scale;
    return Vec3(z * (u - intr.cx) / intr.fx, z * (v - intr.cy) / intr.fy, z);
}

PointCloud deproject_image(const DepthImage& img, const CameraIntrinsics& intr,
                           const ColorImage* rgb) {
    if (img.width != intr.width || img.height != intr.height) {
        throw ValidationError("depth image is " + std::to_string(img.width) + "x" +
                              std::to_string(img.height) + " but intrinsics expect " +
                              std::to_string(intr.width) + "x" + std::to_string(intr.height));
    }
    if (rgb && (rgb->width != img.width || rgb->height != img.height)) {
        throw ValidationError("color image dimensions do not match the depth image");
    }

    PointCloud cloud;
    cloud.frame = Frame::Camera;
    for (int v = 0; v < img.height; ++v) {
        for (int u = 0; u < img.width; ++u) {
            const std::uint16_t d = img.at(u, v);
            if (d == 0) continue;
            const double z = d / img.depth_scale;
            cloud.points.emplace_back(z * (u - intr.cx) / intr.fx, z * (v - intr.cy) / intr.fy,
                                      z);
            if (rgb) cloud.colors.push_back(rgb->at(u, v));
        }
    }
    return cloud;
}

} // namespace depthq
