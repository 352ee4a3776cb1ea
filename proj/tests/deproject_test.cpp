#include "depthq/deproject.hpp"
#include "depthq/errors.hpp"

#include <doctest.h>

#include <cmath>

using namespace depthq;

namespace {

const CameraIntrinsics kIntr(600.0, 600.0, 320.0, 240.0, 640, 480);

} // namespace

TEST_CASE("deproject_pixel matches the pinhole model") {
    // principal point at one meter
    CHECK(deproject_pixel(kIntr, 1000.0, 320.0, 240.0, 1000).isApprox(Vec3(0, 0, 1), 1e-15));
    // 300 pixels off center at two meters: x = 2 * 300 / fx
    const Vec3 p = deproject_pixel(kIntr, 1000.0, 620.0, 240.0, 2000);
    CHECK(p.isApprox(Vec3(1, 0, 2), 1e-15));

    CHECK_THROWS_AS(deproject_pixel(kIntr, 1000.0, 320.0, 240.0, 0), ValidationError);
    CHECK_THROWS_AS(deproject_pixel(kIntr, 1000.0, 640.0, 240.0, 100), ValidationError);
    CHECK_THROWS_AS(deproject_pixel(kIntr, 1000.0, -1.0, 240.0, 100), ValidationError);
}

TEST_CASE("deproject_image keeps only valid pixels in row-major order") {
    DepthImage img(640, 480, 1000.0);
    CHECK(deproject_image(img, kIntr).size() == 0); // all-zero image

    img.at(10, 2) = 500;
    img.at(5, 7) = 1500;
    const PointCloud cloud = deproject_image(img, kIntr);
    REQUIRE(cloud.size() == 2);
    CHECK(cloud.frame == Frame::Camera);
    CHECK(cloud.points[0].z() == doctest::Approx(0.5).epsilon(1e-15)); // row 2 before row 7
    CHECK(cloud.points[1].z() == doctest::Approx(1.5).epsilon(1e-15));

    DepthImage tiny(2, 2, 1000.0);
    tiny.at(1, 0) = 777;
    const CameraIntrinsics small(100.0, 100.0, 1.0, 1.0, 2, 2);
    CHECK(deproject_image(tiny, small).size() == 1);

    CHECK_THROWS_AS(deproject_image(tiny, kIntr), ValidationError); // dimension mismatch
}

TEST_CASE("projecting a deprojected point recovers the pixel") {
    const double s = 4000.0;
    DepthImage img(640, 480, s);
    for (int v = 0; v < 480; v += 37) {
        for (int u = 0; u < 640; u += 41) {
            img.at(u, v) = static_cast<std::uint16_t>(1000 + (u * 7 + v * 3) % 5000);
        }
    }
    const PointCloud cloud = deproject_image(img, kIntr);

    std::size_t i = 0;
    for (int v = 0; v < 480; ++v) {
        for (int u = 0; u < 640; ++u) {
            if (img.at(u, v) == 0) continue;
            const Vec3& p = cloud.points[i++];
            const double u_back = kIntr.fx * p.x() / p.z() + kIntr.cx;
            const double v_back = kIntr.fy * p.y() / p.z() + kIntr.cy;
            CHECK(std::abs(u_back - u) < 1e-9);
            CHECK(std::abs(v_back - v) < 1e-9);
            CHECK(std::llround(p.z() * s) == img.at(u, v)); // depth exactly recoverable
        }
    }
    CHECK(i == cloud.size());
}

TEST_CASE("cloud depends only on the ratio d over s") {
    DepthImage a(4, 4, 1000.0);
    DepthImage b(4, 4, 4000.0);
    for (int v = 0; v < 4; ++v) {
        for (int u = 0; u < 4; ++u) {
            a.at(u, v) = static_cast<std::uint16_t>(100 * (v * 4 + u));
            b.at(u, v) = static_cast<std::uint16_t>(4 * a.at(u, v));
        }
    }
    const CameraIntrinsics intr(50.0, 50.0, 2.0, 2.0, 4, 4);
    const PointCloud ca = deproject_image(a, intr);
    const PointCloud cb = deproject_image(b, intr);
    REQUIRE(ca.size() == cb.size());
    for (std::size_t i = 0; i < ca.size(); ++i) {
        CHECK(ca.points[i].isApprox(cb.points[i], 1e-15));
    }
}

TEST_CASE("colors ride along from the matching pixel") {
    DepthImage img(3, 2, 1000.0);
    img.at(2, 1) = 800;
    ColorImage rgb(3, 2);
    rgb.at(2, 1) = Color{9, 8, 7};

    const CameraIntrinsics intr(100.0, 100.0, 1.0, 1.0, 3, 2);
    const PointCloud cloud = deproject_image(img, intr, &rgb);
    REQUIRE(cloud.size() == 1);
    REQUIRE(cloud.has_colors());
    CHECK(cloud.colors[0] == Color{9, 8, 7});

    ColorImage wrong(2, 2);
    CHECK_THROWS_AS(deproject_image(img, intr, &wrong), ValidationError);
}
