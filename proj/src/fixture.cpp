#include "depthq/fixture.hpp"

#include "depthq/errors.hpp"

#include <json.hpp>

#include <cmath>
#include <numbers>

namespace depthq {

namespace {

using std::numbers::pi;

TriangleMesh make_box(const Vec3& lo, const Vec3& hi) {
    const std::vector<Vec3> v = {
        {lo.x(), lo.y(), lo.z()}, {hi.x(), lo.y(), lo.z()}, {hi.x(), hi.y(), lo.z()},
        {lo.x(), hi.y(), lo.z()}, {lo.x(), lo.y(), hi.z()}, {hi.x(), lo.y(), hi.z()},
        {hi.x(), hi.y(), hi.z()}, {lo.x(), hi.y(), hi.z()},
    };
    const std::vector<Face> f = {
        {0, 2, 1}, {0, 3, 2}, // -z
        {4, 5, 6}, {4, 6, 7}, // +z
        {0, 1, 5}, {0, 5, 4}, // -y
        {3, 7, 6}, {3, 6, 2}, // +y
        {0, 4, 7}, {0, 7, 3}, // -x
        {1, 2, 6}, {1, 6, 5}, // +x
    };
    return TriangleMesh(v, f);
}

/// Closed cylinder, axis along y through (cx, cz), y in [y0, y1].
TriangleMesh make_cylinder_y(double cx, double cz, double radius, double y0, double y1,
                             int segments) {
    std::vector<Vec3> verts;
    std::vector<Face> faces;
    verts.reserve(2 * segments + 2);

    for (int i = 0; i < segments; ++i) {
        const double a = 2.0 * pi * i / segments;
        const double x = cx + radius * std::cos(a);
        const double z = cz + radius * std::sin(a);
        verts.emplace_back(x, y0, z);
        verts.emplace_back(x, y1, z);
    }
    const auto bottom_center = static_cast<std::uint32_t>(verts.size());
    verts.emplace_back(cx, y0, cz);
    const auto top_center = static_cast<std::uint32_t>(verts.size());
    verts.emplace_back(cx, y1, cz);

    for (int i = 0; i < segments; ++i) {
        const std::uint32_t a0 = 2 * i;         // ring i, y0
        const std::uint32_t a1 = 2 * i + 1;     // ring i, y1
        const std::uint32_t b0 = 2 * ((i + 1) % segments);
        const std::uint32_t b1 = b0 + 1;
        faces.push_back({a0, a1, b1}); // outward lateral
        faces.push_back({a0, b1, b0});
        faces.push_back({bottom_center, a0, b0}); // -y cap
        faces.push_back({top_center, b1, a1});    // +y cap
    }
    return TriangleMesh(std::move(verts), std::move(faces));
}

/// Latitude/longitude sphere with shared pole vertices; `segments` around the
/// equator, segments/2 latitude bands.
TriangleMesh make_uv_sphere(const Vec3& center, double radius, int segments) {
    const int rings = segments / 2;
    std::vector<Vec3> verts;
    std::vector<Face> faces;

    const auto north = static_cast<std::uint32_t>(verts.size());
    verts.emplace_back(center + Vec3(0, 0, radius));
    // interior rings j = 1 .. rings-1
    for (int j = 1; j < rings; ++j) {
        const double theta = pi * j / rings;
        const double st = std::sin(theta), ct = std::cos(theta);
        for (int i = 0; i < segments; ++i) {
            const double phi = 2.0 * pi * i / segments;
            verts.emplace_back(center + radius * Vec3(st * std::cos(phi), st * std::sin(phi), ct));
        }
    }
    const auto south = static_cast<std::uint32_t>(verts.size());
    verts.emplace_back(center + Vec3(0, 0, -radius));

    auto ring_vertex = [&](int j, int i) {
        return static_cast<std::uint32_t>(1 + (j - 1) * segments + (i % segments));
    };

    for (int i = 0; i < segments; ++i) {
        faces.push_back({north, ring_vertex(1, i), ring_vertex(1, i + 1)});
        faces.push_back({south, ring_vertex(rings - 1, i + 1), ring_vertex(rings - 1, i)});
    }
    for (int j = 1; j < rings - 1; ++j) {
        for (int i = 0; i < segments; ++i) {
            const std::uint32_t a = ring_vertex(j, i);
            const std::uint32_t b = ring_vertex(j, i + 1);
            const std::uint32_t c = ring_vertex(j + 1, i + 1);
            const std::uint32_t d = ring_vertex(j + 1, i);
            faces.push_back({a, d, c});
            faces.push_back({a, c, b});
        }
    }
    return TriangleMesh(std::move(verts), std::move(faces));
}

/// Rectangular slab tilted by `angle` about the x axis, lowest edge at z0,
/// footprint centered on (cx, 0).
TriangleMesh make_angled_plate(double cx, double angle, double width, double length,
                               double thickness, double z0) {
    TriangleMesh slab = make_box(Vec3(0, 0, 0), Vec3(width, length, thickness));
    Mat3 rx;
    rx << 1, 0, 0, //
        0, std::cos(angle), -std::sin(angle), //
        0, std::sin(angle), std::cos(angle);
    TriangleMesh tilted = slab.transformed(RigidTransform(rx, Vec3::Zero()));
    const Aabb box = tilted.aabb();
    const Vec3 shift(cx - 0.5 * (box.min.x() + box.max.x()), -0.5 * (box.min.y() + box.max.y()),
                     z0 - box.min.z());
    return tilted.transformed(RigidTransform(Mat3::Identity(), shift));
}

void validate_params(const PatternParams& p) {
    if (p.resolution < 16) {
        throw ValidationError("pattern resolution must be >= 16, got " +
                              std::to_string(p.resolution));
    }
    const bool cylinders =
        p.id == PatternId::CylindersVertical || p.id == PatternId::CylindersHorizontal;
    if (cylinders || p.id == PatternId::Spheres) {
        if (p.radii.empty()) throw ValidationError("pattern needs at least one radius");
        for (double r : p.radii) {
            if (!(r > 0.0)) throw ValidationError("element radii must be positive");
        }
    }
    if (cylinders && !(p.cylinder_length > 0.0)) {
        throw ValidationError("cylinder length must be positive");
    }
    if (p.id == PatternId::AngledPlates) {
        if (p.plate_angles.empty()) throw ValidationError("pattern needs at least one angle");
        for (double a : p.plate_angles) {
            if (!(a > 0.0 && a < pi / 2)) {
                throw ValidationError("plate angles must lie in (0, pi/2) radians");
            }
        }
        if (!(p.plate_width > 0.0 && p.plate_length > 0.0 && p.plate_thickness > 0.0)) {
            throw ValidationError("plate dimensions must be positive");
        }
    }
}

bool boxes_overlap(const Aabb& a, const Aabb& b) {
    for (int i = 0; i < 3; ++i) {
        if (a.max[i] <= b.min[i] || b.max[i] <= a.min[i]) return false;
    }
    return true;
}

void check_layout(const std::vector<Aabb>& element_boxes) {
    for (std::size_t i = 0; i < element_boxes.size(); ++i) {
        for (std::size_t j = i + 1; j < element_boxes.size(); ++j) {
            if (boxes_overlap(element_boxes[i], element_boxes[j])) {
                throw LayoutError("pattern elements " + std::to_string(i) + " and " +
                                  std::to_string(j) + " overlap");
            }
        }
    }
    const double hw = fixture_dims::kBackplateWidth / 2;
    const double hh = fixture_dims::kBackplateHeight / 2;
    for (std::size_t i = 0; i < element_boxes.size(); ++i) {
        const Aabb& b = element_boxes[i];
        if (b.min.x() < -hw || b.max.x() > hw || b.min.y() < -hh || b.max.y() > hh) {
            throw LayoutError("pattern element " + std::to_string(i) +
                              " does not fit the backplate footprint");
        }
    }
}

/// Row layout: element i occupies `widths[i]` along x with `gap` clearance,
/// whole row centered on x = 0. Returns element center x positions.
std::vector<double> row_centers(const std::vector<double>& widths, double gap) {
    double total = gap * (widths.empty() ? 0 : widths.size() - 1);
    for (double w : widths) total += w;
    std::vector<double> centers;
    double cursor = -total / 2;
    for (double w : widths) {
        centers.push_back(cursor + w / 2);
        cursor += w + gap;
    }
    return centers;
}

/// Element meshes of the row-layout pattern in canonical (vertical)
/// orientation; horizontal cylinders are handled by the caller.
std::vector<TriangleMesh> generate_elements(const PatternParams& p) {
    const double base = fixture_dims::kPatternBase;
    std::vector<TriangleMesh> elements;

    switch (p.id) {
    case PatternId::CylindersVertical: {
        std::vector<double> widths;
        for (double r : p.radii) widths.push_back(2 * r);
        const auto centers = row_centers(widths, p.gap);
        for (std::size_t i = 0; i < p.radii.size(); ++i) {
            const double r = p.radii[i];
            elements.push_back(make_cylinder_y(centers[i], base + r, r, -p.cylinder_length / 2,
                                               p.cylinder_length / 2, p.resolution));
        }
        break;
    }
    case PatternId::Spheres: {
        std::vector<double> widths;
        for (double r : p.radii) widths.push_back(2 * r);
        const auto centers = row_centers(widths, p.gap);
        for (std::size_t i = 0; i < p.radii.size(); ++i) {
            elements.push_back(
                make_uv_sphere(Vec3(centers[i], 0.0, base + p.radii[i]), p.radii[i],
                               p.resolution));
        }
        break;
    }
    case PatternId::AngledPlates: {
        std::vector<double> widths(p.plate_angles.size(), p.plate_width);
        const auto centers = row_centers(widths, p.gap);
        for (std::size_t i = 0; i < p.plate_angles.size(); ++i) {
            elements.push_back(make_angled_plate(centers[i], p.plate_angles[i], p.plate_width,
                                                 p.plate_length, p.plate_thickness, base));
        }
        break;
    }
    case PatternId::CylindersHorizontal:
        break; // handled by generate_pattern
    }
    return elements;
}

} // namespace

PatternId pattern_id_from_string(const std::string& name) {
    std::string s = name;
    for (char& c : s) {
        if (c == '-') c = '_';
    }
    if (s == "cylinders_vertical") return PatternId::CylindersVertical;
    if (s == "cylinders_horizontal") return PatternId::CylindersHorizontal;
    if (s == "spheres") return PatternId::Spheres;
    if (s == "angled_plates") return PatternId::AngledPlates;
    throw ValidationError("unknown pattern '" + name + "'");
}

std::string to_string(PatternId id) {
    switch (id) {
    case PatternId::CylindersVertical: return "cylinders_vertical";
    case PatternId::CylindersHorizontal: return "cylinders_horizontal";
    case PatternId::Spheres: return "spheres";
    case PatternId::AngledPlates: return "angled_plates";
    }
    return "unknown";
}

PatternParams PatternParams::defaults(PatternId id) {
    PatternParams p;
    p.id = id;
    switch (id) {
    case PatternId::CylindersVertical:
    case PatternId::CylindersHorizontal:
        p.radii = {0.006, 0.009, 0.012};
        break;
    case PatternId::Spheres:
        p.radii = {0.010, 0.015, 0.020};
        break;
    case PatternId::AngledPlates:
        p.plate_angles = {15.0 * pi / 180, 30.0 * pi / 180, 45.0 * pi / 180, 60.0 * pi / 180};
        break;
    }
    return p;
}

FixtureDescriptor::FixtureDescriptor()
    : roi_box(Vec3::Zero(), Vec3::Zero()),
      backplate_extent(fixture_dims::kBackplateWidth, fixture_dims::kBackplateHeight) {}

FixtureDescriptor::FixtureDescriptor(PatternId id, std::array<MarkerSpec, 4> marker_specs,
                                     Aabb roi, const Eigen::Vector2d& extent)
    : pattern_id(id), markers(std::move(marker_specs)), roi_box(roi), backplate_extent(extent) {}

std::vector<Vec3> FixtureDescriptor::all_corners() const {
    std::vector<Vec3> out;
    out.reserve(16);
    for (const MarkerSpec& m : markers) {
        out.insert(out.end(), m.corners.begin(), m.corners.end());
    }
    return out;
}

TriangleMesh generate_pattern(const PatternParams& params) {
    validate_params(params);
    PatternParams canonical = params;
    if (params.id == PatternId::CylindersHorizontal) {
        canonical.id = PatternId::CylindersVertical;
    }
    std::vector<TriangleMesh> elements = generate_elements(canonical);
    if (params.id == PatternId::CylindersHorizontal) {
        // quarter turn about the backplate normal through the pattern center;
        // exact in floating point (components are permuted and negated)
        Mat3 rz90;
        rz90 << 0, -1, 0, 1, 0, 0, 0, 0, 1;
        const RigidTransform turn(rz90, Vec3::Zero());
        for (TriangleMesh& e : elements) e = e.transformed(turn);
    }
    TriangleMesh pattern;
    std::vector<Aabb> boxes;
    boxes.reserve(elements.size());
    for (const TriangleMesh& e : elements) {
        boxes.push_back(e.aabb());
        pattern.append(e);
    }
    check_layout(boxes);
    return pattern;
}

FixtureDescriptor generate_descriptor(const PatternParams& params) {
    const TriangleMesh pattern = generate_pattern(params);

    const double hw = fixture_dims::kBackplateWidth / 2;
    const double hh = fixture_dims::kBackplateHeight / 2;
    const double inset = fixture_dims::kMarkerInset;
    const double side = fixture_dims::kMarkerSide;

    // marker square with top-left corner at (x, y), corners ordered
    // top-left, top-right, bottom-right, bottom-left, all on z = 0
    auto square = [&](int id, double x, double y) {
        MarkerSpec m;
        m.id = id;
        m.corners = {Vec3(x, y, 0), Vec3(x + side, y, 0), Vec3(x + side, y - side, 0),
                     Vec3(x, y - side, 0)};
        return m;
    };
    std::array<MarkerSpec, 4> markers = {
        square(0, -hw + inset, hh - inset),        // top-left
        square(1, hw - inset - side, hh - inset),  // top-right
        square(2, hw - inset - side, -hh + inset + side), // bottom-right
        square(3, -hw + inset, -hh + inset + side),       // bottom-left
    };

    return FixtureDescriptor(
        params.id, markers, pattern.aabb(),
        Eigen::Vector2d(fixture_dims::kBackplateWidth, fixture_dims::kBackplateHeight));
}

PatternParams rotate_pattern_90(const PatternParams& params) {
    PatternParams out = params;
    switch (params.id) {
    case PatternId::CylindersVertical:
        out.id = PatternId::CylindersHorizontal;
        return out;
    case PatternId::CylindersHorizontal:
        out.id = PatternId::CylindersVertical;
        return out;
    default:
        throw ValidationError("only cylinder patterns support 90-degree rotation, got " +
                              to_string(params.id));
    }
}

TriangleMesh generate_backplate_mesh(const Eigen::Vector2d& extent) {
    const double hw = extent.x() / 2, hh = extent.y() / 2;
    return make_box(Vec3(-hw, -hh, -fixture_dims::kBackplateThickness), Vec3(hw, hh, 0.0));
}

namespace {

nlohmann::json vec3_to_json(const Vec3& v) { return nlohmann::json::array({v.x(), v.y(), v.z()}); }

Vec3 vec3_from_json(const nlohmann::json& j, const char* what) {
    if (!j.is_array() || j.size() != 3) {
        throw FormatError(std::string("descriptor: ") + what + " must be a 3-array");
    }
    return Vec3(j[0].get<double>(), j[1].get<double>(), j[2].get<double>());
}

} // namespace

std::string write_descriptor(const FixtureDescriptor& desc) {
    nlohmann::json j;
    j["pattern_id"] = to_string(desc.pattern_id);
    j["backplate_extent"] = {desc.backplate_extent.x(), desc.backplate_extent.y()};
    j["roi_box"] = {{"min", vec3_to_json(desc.roi_box.min)},
                    {"max", vec3_to_json(desc.roi_box.max)}};
    nlohmann::json markers = nlohmann::json::array();
    for (const MarkerSpec& m : desc.markers) {
        nlohmann::json corners = nlohmann::json::array();
        for (const Vec3& c : m.corners) corners.push_back(vec3_to_json(c));
        markers.push_back({{"id", m.id}, {"corners", corners}});
    }
    j["markers"] = markers;
    return j.dump(2) + "\n";
}

FixtureDescriptor parse_descriptor(const std::string& text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw FormatError(std::string("descriptor: invalid JSON: ") + e.what());
    }
    try {
        const PatternId id = pattern_id_from_string(j.at("pattern_id").get<std::string>());
        const auto& ext = j.at("backplate_extent");
        const Eigen::Vector2d extent(ext.at(0).get<double>(), ext.at(1).get<double>());
        const Aabb roi(vec3_from_json(j.at("roi_box").at("min"), "roi min"),
                       vec3_from_json(j.at("roi_box").at("max"), "roi max"));
        const auto& markers_json = j.at("markers");
        if (!markers_json.is_array() || markers_json.size() != 4) {
            throw FormatError("descriptor: expected exactly 4 markers");
        }
        std::array<MarkerSpec, 4> markers;
        for (std::size_t i = 0; i < 4; ++i) {
            const auto& mj = markers_json[i];
            markers[i].id = mj.at("id").get<int>();
            const auto& corners = mj.at("corners");
            if (!corners.is_array() || corners.size() != 4) {
                throw FormatError("descriptor: marker " + std::to_string(markers[i].id) +
                                  " must have exactly 4 corners");
            }
            for (std::size_t k = 0; k < 4; ++k) {
                markers[i].corners[k] = vec3_from_json(corners[k], "marker corner");
            }
        }
        return FixtureDescriptor(id, markers, roi, extent);
    } catch (const nlohmann::json::exception& e) {
        throw FormatError(std::string("descriptor: ") + e.what());
    }
}

PatternParams parse_pattern_params(const std::string& text, PatternId id) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw FormatError(std::string("pattern params: invalid JSON: ") + e.what());
    }
    PatternParams p = PatternParams::defaults(id);
    try {
        if (j.contains("radii")) p.radii = j["radii"].get<std::vector<double>>();
        if (j.contains("cylinder_length")) p.cylinder_length = j["cylinder_length"].get<double>();
        if (j.contains("plate_angles_deg")) {
            p.plate_angles.clear();
            for (double deg : j["plate_angles_deg"].get<std::vector<double>>()) {
                p.plate_angles.push_back(deg * pi / 180.0);
            }
        }
        if (j.contains("plate_width")) p.plate_width = j["plate_width"].get<double>();
        if (j.contains("plate_length")) p.plate_length = j["plate_length"].get<double>();
        if (j.contains("plate_thickness"))
            p.plate_thickness = j["plate_thickness"].get<double>();
        if (j.contains("resolution")) p.resolution = j["resolution"].get<int>();
        if (j.contains("gap")) p.gap = j["gap"].get<double>();
    } catch (const nlohmann::json::exception& e) {
        throw FormatError(std::string("pattern params: ") + e.what());
    }
    return p;
}

} // namespace depthq
