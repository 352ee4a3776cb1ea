#include "depthq/errors.hpp"
#include "depthq/io.hpp"

#include <doctest.h>

#include <random>
#include <string>
#include <vector>

using namespace depthq;

namespace {

TriangleMesh unit_cube() {
    const std::vector<Vec3> v = {
        {0, 0, 0}, {1, 0, 0}, {1, 1, 0}, {0, 1, 0},
        {0, 0, 1}, {1, 0, 1}, {1, 1, 1}, {0, 1, 1},
    };
    const std::vector<Face> f = {
        {0, 2, 1}, {0, 3, 2}, {4, 5, 6}, {4, 6, 7}, {0, 1, 5}, {0, 5, 4},
        {3, 7, 6}, {3, 6, 2}, {0, 4, 7}, {0, 7, 3}, {1, 2, 6}, {1, 6, 5},
    };
    return TriangleMesh(v, f);
}

std::vector<std::uint8_t> bytes_of(const std::string& text) {
    return std::vector<std::uint8_t>(text.begin(), text.end());
}

TriangleMesh random_soup(std::mt19937_64& rng, int faces) {
    std::uniform_real_distribution<double> coord(-2.0, 2.0);
    std::vector<Vec3> verts;
    std::vector<Face> out;
    for (int i = 0; i < faces; ++i) {
        // spread apart so no face degenerates
        const Vec3 base(coord(rng), coord(rng), coord(rng));
        verts.push_back(base);
        verts.push_back(base + Vec3(0.1 + 0.05 * coord(rng), 0, 0.02 * coord(rng)));
        verts.push_back(base + Vec3(0, 0.1 + 0.05 * coord(rng), 0.02 * coord(rng)));
        const auto k = static_cast<std::uint32_t>(3 * i);
        out.push_back({k, k + 1, k + 2});
    }
    return TriangleMesh(std::move(verts), std::move(out));
}

} // namespace

TEST_CASE("binary stl writes canonically and round trips byte for byte") {
    const TriangleMesh cube = unit_cube();
    const std::vector<std::uint8_t> first = write_stl(cube);
    CHECK(first.size() == 84 + 50 * 12); // 684

    const TriangleMesh parsed = parse_stl(first);
    CHECK(parsed.vertex_count() == 8); // welded back from 36 file vertices
    CHECK(parsed.face_count() == 12);

    CHECK(write_stl(parsed) == first);
}

TEST_CASE("empty mesh stl is header plus zero count") {
    const std::vector<std::uint8_t> bytes = write_stl(TriangleMesh());
    CHECK(bytes.size() == 84);
    CHECK(parse_stl(bytes).empty());
}

TEST_CASE("ascii stl is accepted on parse") {
    const std::string text = "solid demo\n"
                             " facet normal 0 0 1\n"
                             "  outer loop\n"
                             "   vertex 0 0 0\n"
                             "   vertex 1 0 0\n"
                             "   vertex 0 1 0\n"
                             "  endloop\n"
                             " endfacet\n"
                             "endsolid demo\n";
    const TriangleMesh mesh = parse_stl(bytes_of(text));
    CHECK(mesh.face_count() == 1);
    CHECK(mesh.vertices()[1] == Vec3(1, 0, 0));
    CHECK(mesh.face_normal(0).isApprox(Vec3(0, 0, 1), 1e-15));

    CHECK_THROWS_AS(parse_stl(bytes_of("solid x\n facet normal 0 0 1\n")), FormatError);
    CHECK_THROWS_AS(parse_stl(bytes_of("solid x\n facet normal a b c\n")), FormatError);
}

TEST_CASE("stl rejects size lies") {
    std::vector<std::uint8_t> bytes = write_stl(unit_cube());
    bytes.pop_back();
    CHECK_THROWS_AS(parse_stl(bytes), FormatError);

    std::vector<std::uint8_t> grown = write_stl(unit_cube());
    grown.push_back(0);
    CHECK_THROWS_AS(parse_stl(grown), FormatError);

    CHECK_THROWS_AS(parse_stl(std::vector<std::uint8_t>(50, 0)), FormatError);
}

TEST_CASE("ply round trip with and without color") {
    PointCloud cloud({{0.125, -3.5, 2.0}, {1e-3, 2e-4, 0.75}}, Frame::Camera);
    const std::vector<std::uint8_t> plain = write_ply_pointcloud(cloud);
    const PointCloud back = parse_ply_pointcloud(plain);
    CHECK(back.size() == 2);
    CHECK(!back.has_colors());
    CHECK(back.points[0] == Vec3(0.125, -3.5, 2.0));
    CHECK(write_ply_pointcloud(back) == plain);

    cloud.colors = {{255, 0, 10}, {0, 128, 255}};
    const std::vector<std::uint8_t> colored = write_ply_pointcloud(cloud);
    const PointCloud back_colored = parse_ply_pointcloud(colored);
    CHECK(back_colored.colors == cloud.colors);
    CHECK(write_ply_pointcloud(back_colored) == colored);

    // frame comment survives
    PointCloud mesh_frame({{0, 0, 0}}, Frame::Mesh);
    CHECK(parse_ply_pointcloud(write_ply_pointcloud(mesh_frame)).frame == Frame::Mesh);
}

TEST_CASE("ply rejects malformed input") {
    CHECK_THROWS_AS(parse_ply_pointcloud(bytes_of("ply\nformat binary_little_endian 1.0\n")),
                    FormatError);
    const std::string missing_rows = "ply\nformat ascii 1.0\nelement vertex 2\n"
                                     "property float x\nproperty float y\nproperty float z\n"
                                     "end_header\n0 0 0\n";
    CHECK_THROWS_AS(parse_ply_pointcloud(bytes_of(missing_rows)), FormatError);
    const std::string trailing = "ply\nformat ascii 1.0\nelement vertex 1\n"
                                 "property float x\nproperty float y\nproperty float z\n"
                                 "end_header\n0 0 0\n1 2 3\n";
    CHECK_THROWS_AS(parse_ply_pointcloud(bytes_of(trailing)), FormatError);
}

TEST_CASE("pgm depth round trip keeps samples and scale") {
    DepthImage img(2, 2, 1000.0);
    img.at(0, 0) = 0;
    img.at(1, 0) = 1000;
    img.at(0, 1) = 2000;
    img.at(1, 1) = 65535;

    const std::vector<std::uint8_t> bytes = write_depth_pgm(img);
    const DepthImage back = parse_depth_pgm(bytes);
    CHECK(back.width == 2);
    CHECK(back.height == 2);
    CHECK(back.depth_scale == 1000.0);
    CHECK(back.at(0, 0) == 0);
    CHECK(back.at(1, 0) == 1000);
    CHECK(back.at(0, 1) == 2000);
    CHECK(back.at(1, 1) == 65535);
    CHECK(write_depth_pgm(back) == bytes);
}

TEST_CASE("pgm rejects wrong magic, maxval, scale, and sizes") {
    const DepthImage img(3, 2, 4000.0);
    std::vector<std::uint8_t> good = write_depth_pgm(img);

    std::vector<std::uint8_t> wrong_magic = good;
    wrong_magic[1] = '2';
    CHECK_THROWS_AS(parse_depth_pgm(wrong_magic), FormatError);

    CHECK_THROWS_AS(parse_depth_pgm(bytes_of("P5\n2 2\n255\n")), FormatError);
    CHECK_THROWS_AS(parse_depth_pgm(bytes_of("P5\n2 2\n65535\n") /* no scale comment */),
                    FormatError);

    std::vector<std::uint8_t> short_data = good;
    short_data.pop_back();
    CHECK_THROWS_AS(parse_depth_pgm(short_data), FormatError);
    std::vector<std::uint8_t> long_data = good;
    long_data.push_back(0);
    CHECK_THROWS_AS(parse_depth_pgm(long_data), FormatError);
}

TEST_CASE("intrinsics json round trip and validation") {
    SensorConfig config;
    config.intrinsics = CameraIntrinsics(600.0, 601.5, 320.0, 239.5, 640, 480);
    config.depth_scale = 4000.0;

    const std::string text = write_intrinsics(config);
    const SensorConfig back = parse_intrinsics(text);
    CHECK(back.intrinsics.fx == 600.0);
    CHECK(back.intrinsics.fy == 601.5);
    CHECK(back.intrinsics.cx == 320.0);
    CHECK(back.intrinsics.cy == 239.5);
    CHECK(back.intrinsics.width == 640);
    CHECK(back.intrinsics.height == 480);
    CHECK(back.depth_scale == 4000.0);
    CHECK(write_intrinsics(back) == text);

    CHECK_THROWS_AS(parse_intrinsics("not json"), FormatError);
    CHECK_THROWS_AS(parse_intrinsics("{\"fx\": 600}"), ValidationError);
    CHECK_THROWS_AS(parse_intrinsics(R"({"fx":600,"fy":600,"cx":320,"cy":240,)"
                                     R"("width":640,"height":480,"depth_scale":0})"),
                    ValidationError);
    CHECK_THROWS_AS(CameraIntrinsics(600, 600, 700, 240, 640, 480), ValidationError);
}

TEST_CASE("format round trips hold across generated artifacts") {
    std::mt19937_64 rng(7);
    std::uniform_int_distribution<int> face_count(1, 24);
    std::uniform_int_distribution<int> point_count(1, 64);
    std::uniform_int_distribution<int> dims(1, 12);
    std::uniform_int_distribution<int> raw(0, 65535);
    std::uniform_real_distribution<double> coord(-4.0, 4.0);

    for (int round = 0; round < 100; ++round) {
        const TriangleMesh mesh = random_soup(rng, face_count(rng));
        const auto stl = write_stl(mesh);
        CHECK(write_stl(parse_stl(stl)) == stl);

        PointCloud cloud;
        cloud.frame = (round % 2 == 0) ? Frame::Camera : Frame::Mesh;
        const int n = point_count(rng);
        for (int i = 0; i < n; ++i) {
            cloud.points.emplace_back(coord(rng), coord(rng), coord(rng));
        }
        const auto ply = write_ply_pointcloud(cloud);
        CHECK(write_ply_pointcloud(parse_ply_pointcloud(ply)) == ply);

        DepthImage img(dims(rng), dims(rng), 1000.0 + round);
        for (auto& s : img.data) s = static_cast<std::uint16_t>(raw(rng));
        const auto pgm = write_depth_pgm(img);
        CHECK(write_depth_pgm(parse_depth_pgm(pgm)) == pgm);
    }
}

TEST_CASE("truncated files are rejected, never crash") {
    std::mt19937_64 rng(99);
    const TriangleMesh mesh = random_soup(rng, 9);
    DepthImage img(5, 4, 4000.0);
    for (std::size_t i = 0; i < img.data.size(); ++i) {
        img.data[i] = static_cast<std::uint16_t>(13 * i);
    }
    PointCloud cloud({{1, 2, 3}, {4, 5, 6}, {7, 8, 9}}, Frame::Camera);

    const std::vector<std::vector<std::uint8_t>> originals = {
        write_stl(mesh), write_ply_pointcloud(cloud), write_depth_pgm(img)};

    for (const auto& whole : originals) {
        for (const std::size_t keep :
             {std::size_t{0}, std::size_t{1}, std::size_t{2}, std::size_t{17},
              whole.size() / 4, whole.size() / 2, 3 * whole.size() / 4, whole.size() - 10}) {
            if (keep >= whole.size()) continue;
            const std::vector<std::uint8_t> cut(whole.begin(),
                                                whole.begin() + static_cast<long>(keep));
            CHECK_THROWS_AS(parse_stl(cut), Error);
            CHECK_THROWS_AS(parse_ply_pointcloud(cut), Error);
            CHECK_THROWS_AS(parse_depth_pgm(cut), Error);
        }
    }
}

TEST_CASE("fnv1a digest is stable and input sensitive") {
    const std::vector<std::uint8_t> empty;
    CHECK(fnv1a_digest(empty) == "fnv1a64:cbf29ce484222325"); // offset basis
    const std::vector<std::uint8_t> a = {'a'};
    const std::vector<std::uint8_t> b = {'b'};
    CHECK(fnv1a_digest(a) != fnv1a_digest(b));
    CHECK(fnv1a_digest(a) == fnv1a_digest(a));
}
