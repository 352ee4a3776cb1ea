#include "depthq/io.hpp"

#include "depthq/errors.hpp"

#include <json.hpp>

#include <Eigen/Geometry>

#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>
#include <unordered_map>

namespace depthq {

namespace {

// --- little-endian primitives ---------------------------------------------

std::uint32_t read_u32le(const std::uint8_t* p) {
    return std::uint32_t(p[0]) | std::uint32_t(p[1]) << 8 | std::uint32_t(p[2]) << 16 |
           std::uint32_t(p[3]) << 24;
}

float read_f32le(const std::uint8_t* p) {
    std::uint32_t bits = read_u32le(p);
    float out;
    std::memcpy(&out, &bits, 4);
    return out;
}

void push_u32le(std::vector<std::uint8_t>& out, std::uint32_t v) {
    out.push_back(static_cast<std::uint8_t>(v));
    out.push_back(static_cast<std::uint8_t>(v >> 8));
    out.push_back(static_cast<std::uint8_t>(v >> 16));
    out.push_back(static_cast<std::uint8_t>(v >> 24));
}

void push_f32le(std::vector<std::uint8_t>& out, float f) {
    std::uint32_t bits;
    std::memcpy(&bits, &f, 4);
    push_u32le(out, bits);
}

// --- exact-equality vertex welding ----------------------------------------

struct VertexKey {
    double x, y, z;
    bool operator==(const VertexKey& o) const { return x == o.x && y == o.y && z == o.z; }
};

struct VertexKeyHash {
    std::size_t operator()(const VertexKey& k) const {
        auto mix = [](std::uint64_t h, double d) {
            std::uint64_t bits;
            std::memcpy(&bits, &d, 8);
            h ^= bits + 0x9e3779b97f4a7c15ull + (h << 6) + (h >> 2);
            return h;
        };
        std::uint64_t h = 0;
        h = mix(h, k.x);
        h = mix(h, k.y);
        h = mix(h, k.z);
        return static_cast<std::size_t>(h);
    }
};

class VertexWelder {
public:
    std::uint32_t intern(const Vec3& v) {
        // +0.0 so -0.0 and 0.0 weld to the same slot
        VertexKey key{v.x() + 0.0, v.y() + 0.0, v.z() + 0.0};
        auto [it, inserted] = index_.try_emplace(key, static_cast<std::uint32_t>(vertices_.size()));
        if (inserted) {
            vertices_.emplace_back(key.x, key.y, key.z);
        }
        return it->second;
    }

    std::vector<Vec3> take() { return std::move(vertices_); }

private:
    std::unordered_map<VertexKey, std::uint32_t, VertexKeyHash> index_;
    std::vector<Vec3> vertices_;
};

// --- ASCII STL tokenizer ----------------------------------------------------

struct Tokenizer {
    const char* p;
    const char* end;
    int line = 1;

    Tokenizer(const std::vector<std::uint8_t>& bytes)
        : p(reinterpret_cast<const char*>(bytes.data())), end(p + bytes.size()) {}

    void skip_space() {
        while (p < end && std::isspace(static_cast<unsigned char>(*p))) {
            if (*p == '\n') ++line;
            ++p;
        }
    }

    std::string next() {
        skip_space();
        const char* start = p;
        while (p < end && !std::isspace(static_cast<unsigned char>(*p))) ++p;
        return std::string(start, p);
    }

    /// Consumes the rest of the current line (facet/solid names).
    void skip_line() {
        while (p < end && *p != '\n') ++p;
    }

    double number(const char* what) {
        std::string tok = next();
        if (tok.empty()) {
            throw FormatError(std::string("ascii stl: unexpected end of input, expected ") + what +
                              " at line " + std::to_string(line));
        }
        char* parsed_end = nullptr;
        double value = std::strtod(tok.c_str(), &parsed_end);
        if (parsed_end != tok.c_str() + tok.size()) {
            throw FormatError("ascii stl: unparseable number '" + tok + "' at line " +
                              std::to_string(line));
        }
        return value;
    }

    void expect(const char* keyword) {
        std::string tok = next();
        if (tok != keyword) {
            throw FormatError(std::string("ascii stl: expected '") + keyword + "' but found '" +
                              tok + "' at line " + std::to_string(line));
        }
    }
};

TriangleMesh parse_stl_ascii(const std::vector<std::uint8_t>& bytes) {
    Tokenizer tok(bytes);
    tok.expect("solid");
    tok.skip_line();

    VertexWelder welder;
    std::vector<Face> faces;
    for (;;) {
        std::string word = tok.next();
        if (word == "endsolid") {
            break;
        }
        if (word != "facet") {
            throw FormatError("ascii stl: expected 'facet' or 'endsolid' but found '" + word +
                              "' at line " + std::to_string(tok.line));
        }
        tok.expect("normal");
        tok.number("normal x");
        tok.number("normal y");
        tok.number("normal z"); // stored normals ignored, recomputed from winding
        tok.expect("outer");
        tok.expect("loop");
        Face face{};
        for (int k = 0; k < 3; ++k) {
            tok.expect("vertex");
            const double x = tok.number("vertex x");
            const double y = tok.number("vertex y");
            const double z = tok.number("vertex z");
            face[k] = welder.intern(Vec3(x, y, z));
        }
        tok.expect("endloop");
        tok.expect("endfacet");
        faces.push_back(face);
    }
    return TriangleMesh(welder.take(), std::move(faces));
}

TriangleMesh parse_stl_binary(const std::vector<std::uint8_t>& bytes) {
    if (bytes.size() < 84) {
        throw FormatError("binary stl: file is " + std::to_string(bytes.size()) +
                          " bytes, need at least 84 (header + count)");
    }
    const std::uint32_t count = read_u32le(bytes.data() + 80);
    const std::size_t expected = 84 + std::size_t(count) * 50;
    if (bytes.size() != expected) {
        throw FormatError("binary stl: face count " + std::to_string(count) + " implies " +
                          std::to_string(expected) + " bytes but file has " +
                          std::to_string(bytes.size()) + " (body truncated at byte " +
                          std::to_string(bytes.size()) + ")");
    }

    VertexWelder welder;
    std::vector<Face> faces;
    faces.reserve(count);
    const std::uint8_t* rec = bytes.data() + 84;
    for (std::uint32_t i = 0; i < count; ++i, rec += 50) {
        // 12 bytes of stored normal skipped; recomputed from winding
        Face face{};
        for (int k = 0; k < 3; ++k) {
            const std::uint8_t* v = rec + 12 + 12 * k;
            face[k] =
                welder.intern(Vec3(read_f32le(v), read_f32le(v + 4), read_f32le(v + 8)));
        }
        faces.push_back(face);
    }
    return TriangleMesh(welder.take(), std::move(faces));
}

bool looks_like_ascii_stl(const std::vector<std::uint8_t>& bytes) {
    std::size_t i = 0;
    while (i < bytes.size() && std::isspace(bytes[i])) ++i;
    static const char magic[] = "solid";
    if (bytes.size() - i < 5 || std::memcmp(bytes.data() + i, magic, 5) != 0) {
        return false;
    }
    // Binary files may also begin with "solid"; require an ASCII keyword too.
    std::string_view view(reinterpret_cast<const char*>(bytes.data()), bytes.size());
    return view.find("facet") != std::string_view::npos ||
           view.find("endsolid") != std::string_view::npos;
}

} // namespace

DepthImage::DepthImage(int w, int h, double scale) : DepthImage(w, h, scale, {}) {
    data.assign(static_cast<std::size_t>(w) * h, 0);
}

DepthImage::DepthImage(int w, int h, double scale, std::vector<std::uint16_t> samples)
    : width(w), height(h), depth_scale(scale), data(std::move(samples)) {
    if (width <= 0 || height <= 0) {
        throw ValidationError("depth image dimensions must be positive");
    }
    if (!(depth_scale > 0.0) || !std::isfinite(depth_scale)) {
        throw ValidationError("depth_scale must be positive and finite");
    }
    if (data.empty()) {
        data.assign(static_cast<std::size_t>(width) * height, 0);
    } else if (data.size() != static_cast<std::size_t>(width) * height) {
        throw ValidationError("depth data length " + std::to_string(data.size()) +
                              " does not match " + std::to_string(width) + "x" +
                              std::to_string(height));
    }
}

CameraIntrinsics::CameraIntrinsics(double fx_, double fy_, double cx_, double cy_, int w, int h)
    : fx(fx_), fy(fy_), cx(cx_), cy(cy_), width(w), height(h) {
    if (width <= 0) throw ValidationError("width must be positive");
    if (height <= 0) throw ValidationError("height must be positive");
    if (!(fx > 0.0)) throw ValidationError("fx must be positive");
    if (!(fy > 0.0)) throw ValidationError("fy must be positive");
    if (!(cx >= 0.0 && cx < width)) throw ValidationError("cx must lie in [0, width)");
    if (!(cy >= 0.0 && cy < height)) throw ValidationError("cy must lie in [0, height)");
}

TriangleMesh parse_stl(const std::vector<std::uint8_t>& bytes) {
    if (looks_like_ascii_stl(bytes)) {
        return parse_stl_ascii(bytes);
    }
    return parse_stl_binary(bytes);
}

std::vector<std::uint8_t> write_stl(const TriangleMesh& mesh) {
    std::vector<std::uint8_t> out;
    out.reserve(84 + mesh.face_count() * 50);

    static const char header_text[] = "depthq binary STL";
    std::uint8_t header[80] = {};
    std::memcpy(header, header_text, sizeof(header_text) - 1);
    out.insert(out.end(), header, header + 80);
    push_u32le(out, static_cast<std::uint32_t>(mesh.face_count()));

    const auto& vertices = mesh.vertices();
    for (const Face& f : mesh.faces()) {
        // Work from float32-truncated coordinates so a reparse reproduces the
        // identical record.
        Eigen::Vector3f v[3];
        for (int k = 0; k < 3; ++k) {
            v[k] = vertices[f[k]].cast<float>();
        }
        const Vec3 e1 = (v[1] - v[0]).cast<double>();
        const Vec3 e2 = (v[2] - v[0]).cast<double>();
        Vec3 n = e1.cross(e2);
        const double len = n.norm();
        n = (len > 0.0) ? Vec3(n / len) : Vec3::Zero();
        for (int k = 0; k < 3; ++k) push_f32le(out, static_cast<float>(n[k]));
        for (int k = 0; k < 3; ++k) {
            push_f32le(out, v[k].x());
            push_f32le(out, v[k].y());
            push_f32le(out, v[k].z());
        }
        out.push_back(0);
        out.push_back(0); // attribute byte count
    }
    return out;
}

PointCloud parse_ply_pointcloud(const std::vector<std::uint8_t>& bytes) {
    std::istringstream in(std::string(reinterpret_cast<const char*>(bytes.data()), bytes.size()));
    std::string line;

    auto fail = [](const std::string& msg) -> void { throw FormatError("ply: " + msg); };

    if (!std::getline(in, line) || line != "ply") fail("missing 'ply' magic");
    if (!std::getline(in, line) || line != "format ascii 1.0")
        fail("only 'format ascii 1.0' is supported");

    std::size_t vertex_count = 0;
    bool saw_element = false;
    bool has_color = false;
    Frame frame = Frame::Camera;
    std::vector<std::string> props;
    while (std::getline(in, line)) {
        if (line == "end_header") break;
        std::istringstream ls(line);
        std::string word;
        ls >> word;
        if (word == "comment") {
            std::string key, value;
            ls >> key >> value;
            if (key == "frame" && value == "mesh") frame = Frame::Mesh;
            continue;
        }
        if (word == "element") {
            std::string name;
            ls >> name >> vertex_count;
            if (name != "vertex") fail("unsupported element '" + name + "'");
            saw_element = true;
            continue;
        }
        if (word == "property") {
            std::string type, name;
            ls >> type >> name;
            props.push_back(name);
            continue;
        }
        fail("unexpected header line '" + line + "'");
    }
    if (!saw_element) fail("missing 'element vertex' declaration");
    if (props.size() >= 3 && props[0] == "x" && props[1] == "y" && props[2] == "z") {
        if (props.size() == 3) {
            has_color = false;
        } else if (props.size() == 6 && props[3] == "red" && props[4] == "green" &&
                   props[5] == "blue") {
            has_color = true;
        } else {
            fail("unsupported property layout");
        }
    } else {
        fail("missing x,y,z property declarations");
    }

    std::vector<Vec3> points;
    std::vector<Color> colors;
    points.reserve(vertex_count);
    for (std::size_t i = 0; i < vertex_count; ++i) {
        double x, y, z;
        if (!(in >> x >> y >> z)) {
            fail("body ended at row " + std::to_string(i) + " of " +
                 std::to_string(vertex_count));
        }
        points.emplace_back(x, y, z);
        if (has_color) {
            int r, g, b;
            if (!(in >> r >> g >> b)) {
                fail("color missing at row " + std::to_string(i));
            }
            if (r < 0 || r > 255 || g < 0 || g > 255 || b < 0 || b > 255) {
                fail("color out of range at row " + std::to_string(i));
            }
            colors.push_back(
                {static_cast<std::uint8_t>(r), static_cast<std::uint8_t>(g),
                 static_cast<std::uint8_t>(b)});
        }
    }
    // the final row must be newline-terminated and the file must end there,
    // so every strict prefix of a written file is invalid
    if (vertex_count > 0) {
        std::string rest;
        if (!std::getline(in, rest) || !rest.empty()) {
            fail("last row is not newline-terminated");
        }
    }
    if (in.peek() != std::char_traits<char>::eof()) {
        fail("trailing data after " + std::to_string(vertex_count) + " rows");
    }
    return PointCloud(std::move(points), std::move(colors), frame);
}

std::vector<std::uint8_t> write_ply_pointcloud(const PointCloud& cloud) {
    std::string out;
    out += "ply\nformat ascii 1.0\n";
    out += (cloud.frame == Frame::Mesh) ? "comment frame mesh\n" : "comment frame camera\n";
    out += "element vertex " + std::to_string(cloud.size()) + "\n";
    out += "property float x\nproperty float y\nproperty float z\n";
    if (cloud.has_colors()) {
        out += "property uchar red\nproperty uchar green\nproperty uchar blue\n";
    }
    out += "end_header\n";

    char buf[128];
    for (std::size_t i = 0; i < cloud.size(); ++i) {
        const Vec3& p = cloud.points[i];
        std::snprintf(buf, sizeof(buf), "%.9g %.9g %.9g", p.x(), p.y(), p.z());
        out += buf;
        if (cloud.has_colors()) {
            const Color& c = cloud.colors[i];
            std::snprintf(buf, sizeof(buf), " %d %d %d", c[0], c[1], c[2]);
            out += buf;
        }
        out += '\n';
    }
    return std::vector<std::uint8_t>(out.begin(), out.end());
}

namespace {

/// Whitespace/comment-aware header scanner for PGM.
struct PgmScanner {
    const std::uint8_t* p;
    const std::uint8_t* end;
    std::vector<std::string> comments;

    PgmScanner(const std::vector<std::uint8_t>& bytes)
        : p(bytes.data()), end(bytes.data() + bytes.size()) {}

    void skip_space_and_comments() {
        for (;;) {
            while (p < end && std::isspace(*p)) ++p;
            if (p < end && *p == '#') {
                const std::uint8_t* start = ++p;
                while (p < end && *p != '\n') ++p;
                comments.emplace_back(reinterpret_cast<const char*>(start),
                                      reinterpret_cast<const char*>(p));
            } else {
                return;
            }
        }
    }

    std::string token(const char* what) {
        skip_space_and_comments();
        const std::uint8_t* start = p;
        while (p < end && !std::isspace(*p) && *p != '#') ++p;
        if (start == p) {
            throw FormatError(std::string("pgm: unexpected end of header, expected ") + what);
        }
        return std::string(reinterpret_cast<const char*>(start),
                           reinterpret_cast<const char*>(p));
    }

    long integer(const char* what) {
        std::string tok = token(what);
        char* tok_end = nullptr;
        long v = std::strtol(tok.c_str(), &tok_end, 10);
        if (tok_end != tok.c_str() + tok.size()) {
            throw FormatError("pgm: expected integer for " + std::string(what) + ", got '" + tok +
                              "'");
        }
        return v;
    }
};

} // namespace

DepthImage parse_depth_pgm(const std::vector<std::uint8_t>& bytes) {
    PgmScanner scan(bytes);
    if (scan.token("magic") != "P5") {
        throw FormatError("pgm: not a P5 file");
    }
    const long width = scan.integer("width");
    const long height = scan.integer("height");
    const long maxval = scan.integer("maxval");
    if (maxval != 65535) {
        throw FormatError("pgm: maxval must be 65535 for 16-bit depth, got " +
                          std::to_string(maxval));
    }
    if (width <= 0 || height <= 0) {
        throw FormatError("pgm: non-positive dimensions");
    }

    double depth_scale = 0.0;
    bool have_scale = false;
    for (const std::string& c : scan.comments) {
        std::istringstream cs(c);
        std::string key;
        cs >> key;
        if (key == "depth_scale") {
            if (!(cs >> depth_scale)) {
                throw FormatError("pgm: malformed depth_scale comment '" + c + "'");
            }
            have_scale = true;
        }
    }
    if (!have_scale) {
        throw FormatError("pgm: missing '# depth_scale <value>' comment");
    }
    if (!(depth_scale > 0.0)) {
        throw FormatError("pgm: depth_scale must be positive");
    }

    // exactly one whitespace byte separates maxval from the sample data
    if (scan.p >= scan.end || !std::isspace(*scan.p)) {
        throw FormatError("pgm: missing whitespace before sample data");
    }
    ++scan.p;
    const std::size_t expected = static_cast<std::size_t>(width) * height * 2;
    const std::size_t available = static_cast<std::size_t>(scan.end - scan.p);
    if (available != expected) {
        throw FormatError("pgm: expected " + std::to_string(expected) + " sample bytes, found " +
                          std::to_string(available));
    }

    std::vector<std::uint16_t> samples(static_cast<std::size_t>(width) * height);
    for (std::size_t i = 0; i < samples.size(); ++i) {
        samples[i] = static_cast<std::uint16_t>(std::uint16_t(scan.p[2 * i]) << 8 |
                                                std::uint16_t(scan.p[2 * i + 1]));
    }
    return DepthImage(static_cast<int>(width), static_cast<int>(height), depth_scale,
                      std::move(samples));
}

std::vector<std::uint8_t> write_depth_pgm(const DepthImage& img) {
    char buf[96];
    std::snprintf(buf, sizeof(buf), "P5\n# depth_scale %.17g\n%d %d\n65535\n", img.depth_scale,
                  img.width, img.height);
    std::string header(buf);
    std::vector<std::uint8_t> out(header.begin(), header.end());
    out.reserve(out.size() + img.data.size() * 2);
    for (std::uint16_t s : img.data) {
        out.push_back(static_cast<std::uint8_t>(s >> 8));
        out.push_back(static_cast<std::uint8_t>(s & 0xff));
    }
    return out;
}

SensorConfig parse_intrinsics(const std::string& text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw FormatError(std::string("intrinsics: invalid JSON: ") + e.what());
    }
    auto require = [&](const char* key) -> double {
        if (!j.contains(key)) {
            throw ValidationError(std::string("intrinsics: missing key '") + key + "'");
        }
        if (!j[key].is_number()) {
            throw ValidationError(std::string("intrinsics: key '") + key + "' must be a number");
        }
        return j[key].get<double>();
    };
    const double fx = require("fx");
    const double fy = require("fy");
    const double cx = require("cx");
    const double cy = require("cy");
    const double width = require("width");
    const double height = require("height");
    const double depth_scale = require("depth_scale");
    if (!(depth_scale > 0.0)) {
        throw ValidationError("intrinsics: key 'depth_scale' must be positive");
    }
    try {
        return SensorConfig{
            CameraIntrinsics(fx, fy, cx, cy, static_cast<int>(width), static_cast<int>(height)),
            depth_scale};
    } catch (const ValidationError& e) {
        throw ValidationError(std::string("intrinsics: ") + e.what());
    }
}

std::string write_intrinsics(const SensorConfig& config) {
    nlohmann::json j;
    j["fx"] = config.intrinsics.fx;
    j["fy"] = config.intrinsics.fy;
    j["cx"] = config.intrinsics.cx;
    j["cy"] = config.intrinsics.cy;
    j["width"] = config.intrinsics.width;
    j["height"] = config.intrinsics.height;
    j["depth_scale"] = config.depth_scale;
    return j.dump(2) + "\n";
}

std::vector<std::uint8_t> read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw Error("cannot open " + path.string() + " for reading");
    }
    std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                    std::istreambuf_iterator<char>());
    if (in.bad()) {
        throw Error("read failure on " + path.string());
    }
    return bytes;
}

void write_file(const std::filesystem::path& path, const std::vector<std::uint8_t>& bytes) {
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw Error("cannot open " + path.string() + " for writing");
    }
    out.write(reinterpret_cast<const char*>(bytes.data()),
              static_cast<std::streamsize>(bytes.size()));
    if (!out) {
        throw Error("write failure on " + path.string());
    }
}

void write_file(const std::filesystem::path& path, const std::string& text) {
    write_file(path, std::vector<std::uint8_t>(text.begin(), text.end()));
}

std::string fnv1a_digest(const std::vector<std::uint8_t>& bytes) {
    std::uint64_t h = 0xcbf29ce484222325ull;
    for (std::uint8_t b : bytes) {
        h ^= b;
        h *= 0x100000001b3ull;
    }
    char buf[32];
    std::snprintf(buf, sizeof(buf), "fnv1a64:%016llx", static_cast<unsigned long long>(h));
    return buf;
}

} // namespace depthq
