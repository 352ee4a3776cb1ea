#include "depthq/errors.hpp"
#include "depthq/fixture.hpp"

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numbers>

using namespace depthq;

TEST_CASE("pattern ids parse both spellings") {
    CHECK(pattern_id_from_string("cylinders-vertical") == PatternId::CylindersVertical);
    CHECK(pattern_id_from_string("cylinders_horizontal") == PatternId::CylindersHorizontal);
    CHECK(pattern_id_from_string("spheres") == PatternId::Spheres);
    CHECK(pattern_id_from_string("angled-plates") == PatternId::AngledPlates);
    CHECK_THROWS_AS(pattern_id_from_string("hexagons"), ValidationError);
    CHECK(to_string(PatternId::AngledPlates) == "angled_plates");
}

TEST_CASE("default parameters per pattern") {
    const PatternParams cyl = PatternParams::defaults(PatternId::CylindersVertical);
    CHECK(cyl.radii == std::vector<double>{0.006, 0.009, 0.012});
    CHECK(cyl.cylinder_length == 0.080);

    const PatternParams sph = PatternParams::defaults(PatternId::Spheres);
    CHECK(sph.radii == std::vector<double>{0.010, 0.015, 0.020});

    const PatternParams pl = PatternParams::defaults(PatternId::AngledPlates);
    REQUIRE(pl.plate_angles.size() == 4);
    CHECK(pl.plate_angles[0] == doctest::Approx(15.0 * std::numbers::pi / 180).epsilon(1e-15));
    CHECK(pl.plate_angles[3] == doctest::Approx(60.0 * std::numbers::pi / 180).epsilon(1e-15));
}

TEST_CASE("marker corners sit inset on the backplate") {
    const FixtureDescriptor desc =
        generate_descriptor(PatternParams::defaults(PatternId::CylindersVertical));

    REQUIRE(desc.markers.size() == 4);
    CHECK(desc.markers[0].id == 0);
    // top-left marker, corners clockwise from its top-left corner;
    // backplate is 173.6 x 101.6 mm, markers 20 mm with a 5 mm inset
    CHECK(desc.markers[0].corners[0].isApprox(Vec3(-0.0818, 0.0458, 0.0), 1e-12));
    CHECK(desc.markers[0].corners[1].isApprox(Vec3(-0.0618, 0.0458, 0.0), 1e-12));
    CHECK(desc.markers[0].corners[2].isApprox(Vec3(-0.0618, 0.0258, 0.0), 1e-12));
    CHECK(desc.markers[0].corners[3].isApprox(Vec3(-0.0818, 0.0258, 0.0), 1e-12));
    // top-right marker mirrors it
    CHECK(desc.markers[1].corners[1].isApprox(Vec3(0.0818, 0.0458, 0.0), 1e-12));
    // bottom corners mirror vertically
    CHECK(desc.markers[2].corners[2].isApprox(Vec3(0.0818, -0.0458, 0.0), 1e-12));
    CHECK(desc.markers[3].corners[3].isApprox(Vec3(-0.0818, -0.0458, 0.0), 1e-12));

    CHECK(desc.all_corners().size() == 16);
    CHECK(desc.backplate_extent.x() == 0.1736);
    CHECK(desc.backplate_extent.y() == 0.1016);
}

TEST_CASE("generated pattern stands off the backplate and fits it") {
    for (const PatternId id : {PatternId::CylindersVertical, PatternId::CylindersHorizontal,
                               PatternId::Spheres, PatternId::AngledPlates}) {
        const PatternParams params = PatternParams::defaults(id);
        const TriangleMesh mesh = generate_pattern(params);
        const Aabb box = mesh.aabb();

        CHECK(box.min.z() == doctest::Approx(fixture_dims::kPatternBase).epsilon(1e-12));
        CHECK(box.min.x() >= -fixture_dims::kBackplateWidth / 2);
        CHECK(box.max.x() <= fixture_dims::kBackplateWidth / 2);
        CHECK(box.min.y() >= -fixture_dims::kBackplateHeight / 2);
        CHECK(box.max.y() <= fixture_dims::kBackplateHeight / 2);

        const FixtureDescriptor desc = generate_descriptor(params);
        CHECK(desc.roi_box.min.isApprox(box.min, 1e-15));
        CHECK(desc.roi_box.max.isApprox(box.max, 1e-15));
        CHECK(desc.pattern_id == id);
    }
}

TEST_CASE("cylinder pattern dimensions") {
    const TriangleMesh mesh =
        generate_pattern(PatternParams::defaults(PatternId::CylindersVertical));
    const Aabb box = mesh.aabb();
    // row of diameters 12+18+24 mm with two 12 mm gaps, centered
    CHECK(box.extent().x() == doctest::Approx(0.012 + 0.018 + 0.024 + 0.024).epsilon(1e-12));
    CHECK(box.extent().y() == doctest::Approx(0.080).epsilon(1e-12));
    // tallest cylinder: base + 2 * 12 mm
    CHECK(box.max.z() == doctest::Approx(0.008 + 0.024).epsilon(1e-12));
}

TEST_CASE("horizontal cylinders are the vertical mesh turned a quarter turn") {
    const TriangleMesh vertical =
        generate_pattern(PatternParams::defaults(PatternId::CylindersVertical));
    const TriangleMesh horizontal =
        generate_pattern(PatternParams::defaults(PatternId::CylindersHorizontal));

    REQUIRE(vertical.vertex_count() == horizontal.vertex_count());
    REQUIRE(vertical.faces() == horizontal.faces());
    for (std::size_t i = 0; i < vertical.vertex_count(); ++i) {
        const Vec3& v = vertical.vertices()[i];
        // (x, y, z) -> (-y, x, z), exact in floating point
        CHECK(horizontal.vertices()[i] == Vec3(-v.y(), v.x(), v.z()));
    }
}

TEST_CASE("rotate_pattern_90 flips cylinder orientation only") {
    PatternParams p = PatternParams::defaults(PatternId::CylindersVertical);
    CHECK(rotate_pattern_90(p).id == PatternId::CylindersHorizontal);
    CHECK(rotate_pattern_90(rotate_pattern_90(p)).id == PatternId::CylindersVertical);
    CHECK_THROWS_AS(rotate_pattern_90(PatternParams::defaults(PatternId::Spheres)),
                    ValidationError);
}

TEST_CASE("sphere pattern area approaches the analytic value") {
    PatternParams p = PatternParams::defaults(PatternId::Spheres);
    p.radii = {0.015};
    const TriangleMesh sphere = generate_pattern(p);
    const double analytic = 4.0 * std::numbers::pi * 0.015 * 0.015;
    CHECK(sphere.total_area() == doctest::Approx(analytic).epsilon(0.02));
    CHECK(sphere.total_area() < analytic); // inscribed polyhedron
}

TEST_CASE("angled plates rise at their angles") {
    PatternParams p = PatternParams::defaults(PatternId::AngledPlates);
    p.plate_angles = {std::numbers::pi / 4};
    const TriangleMesh plate = generate_pattern(p);
    const Aabb box = plate.aabb();
    const double span = 0.040 * std::sin(std::numbers::pi / 4) +
                        0.003 * std::cos(std::numbers::pi / 4);
    CHECK(box.extent().z() == doctest::Approx(span).epsilon(1e-12));
    CHECK(box.extent().x() == doctest::Approx(0.030).epsilon(1e-12));
}

TEST_CASE("layout failures are reported") {
    PatternParams crowded = PatternParams::defaults(PatternId::Spheres);
    crowded.radii = {0.030, 0.030, 0.030}; // 180 mm of spheres on a 173.6 mm plate
    CHECK_THROWS_AS(generate_pattern(crowded), LayoutError);

    PatternParams overlapping = PatternParams::defaults(PatternId::Spheres);
    overlapping.gap = 0.001; // a sliver of clearance is enough
    CHECK_NOTHROW(generate_pattern(overlapping));
    overlapping.gap = -0.005;
    CHECK_THROWS_AS(generate_pattern(overlapping), LayoutError);

    PatternParams tall = PatternParams::defaults(PatternId::CylindersVertical);
    tall.cylinder_length = 0.150; // longer than the plate is high
    CHECK_THROWS_AS(generate_pattern(tall), LayoutError);
}

TEST_CASE("parameter validation") {
    PatternParams coarse = PatternParams::defaults(PatternId::Spheres);
    coarse.resolution = 8;
    CHECK_THROWS_AS(generate_pattern(coarse), ValidationError);

    PatternParams negative = PatternParams::defaults(PatternId::CylindersVertical);
    negative.radii = {0.006, -0.009};
    CHECK_THROWS_AS(generate_pattern(negative), ValidationError);

    PatternParams empty = PatternParams::defaults(PatternId::Spheres);
    empty.radii.clear();
    CHECK_THROWS_AS(generate_pattern(empty), ValidationError);

    PatternParams steep = PatternParams::defaults(PatternId::AngledPlates);
    steep.plate_angles = {std::numbers::pi / 2};
    CHECK_THROWS_AS(generate_pattern(steep), ValidationError);
}

TEST_CASE("backplate mesh spans the requested extent") {
    const TriangleMesh plate = generate_backplate_mesh(Eigen::Vector2d(0.1736, 0.1016));
    const Aabb box = plate.aabb();
    CHECK(box.max.z() == 0.0);
    CHECK(box.min.z() == doctest::Approx(-fixture_dims::kBackplateThickness).epsilon(1e-15));
    CHECK(box.extent().x() == doctest::Approx(0.1736).epsilon(1e-15));
    CHECK(box.extent().y() == doctest::Approx(0.1016).epsilon(1e-15));
    CHECK(plate.face_count() == 12);
}

TEST_CASE("descriptor json round trip") {
    const FixtureDescriptor desc =
        generate_descriptor(PatternParams::defaults(PatternId::AngledPlates));
    const std::string text = write_descriptor(desc);
    const FixtureDescriptor back = parse_descriptor(text);

    CHECK(back.pattern_id == desc.pattern_id);
    CHECK(back.backplate_extent == desc.backplate_extent);
    CHECK(back.roi_box.min == desc.roi_box.min);
    CHECK(back.roi_box.max == desc.roi_box.max);
    for (std::size_t i = 0; i < 4; ++i) {
        CHECK(back.markers[i].id == desc.markers[i].id);
        for (std::size_t k = 0; k < 4; ++k) {
            CHECK(back.markers[i].corners[k] == desc.markers[i].corners[k]);
        }
    }
    CHECK(write_descriptor(back) == text);

    CHECK_THROWS_AS(parse_descriptor("{"), FormatError);
    CHECK_THROWS_AS(parse_descriptor("{\"pattern_id\": \"spheres\"}"), FormatError);
}

TEST_CASE("pattern parameter overrides") {
    const std::string text = R"({"radii": [0.005], "resolution": 32, "gap": 0.02})";
    const PatternParams p = parse_pattern_params(text, PatternId::CylindersVertical);
    CHECK(p.radii == std::vector<double>{0.005});
    CHECK(p.resolution == 32);
    CHECK(p.gap == 0.02);
    CHECK(p.cylinder_length == 0.080); // untouched default

    const PatternParams angles =
        parse_pattern_params(R"({"plate_angles_deg": [20, 40]})", PatternId::AngledPlates);
    REQUIRE(angles.plate_angles.size() == 2);
    CHECK(angles.plate_angles[0] == doctest::Approx(20.0 * std::numbers::pi / 180));

    CHECK_THROWS_AS(parse_pattern_params("nope", PatternId::Spheres), FormatError);
    CHECK_THROWS_AS(parse_pattern_params(R"({"radii": "big"})", PatternId::Spheres),
                    FormatError);
}
