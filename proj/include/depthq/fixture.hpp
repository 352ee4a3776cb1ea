#pragma once

#include "depthq/geometry.hpp"

#include <array>
#include <optional>
#include <string>
#include <vector>

namespace depthq {

enum class PatternId {
    CylindersVertical,
    CylindersHorizontal,
    Spheres,
    AngledPlates,
};

/// Accepts "cylinders_vertical" and the dashed CLI form "cylinders-vertical".
PatternId pattern_id_from_string(const std::string& name);
std::string to_string(PatternId id);

/// Parameters for the procedural test patterns.
///
/// The published fixture only fixes the envelope (backplate 173.6 mm x
/// 101.6 mm, 20 mm markers); element dimensions are this library's documented
/// defaults, sized to fit that envelope.
struct PatternParams {
    PatternId id = PatternId::CylindersVertical;

    std::vector<double> radii;        // cylinders & spheres, meters
    double cylinder_length = 0.080;   // meters
    std::vector<double> plate_angles; // angled plates, radians from the base plane
    double plate_width = 0.030;       // meters, along the row axis
    double plate_length = 0.040;      // meters, along the tilted direction
    double plate_thickness = 0.003;   // meters
    int resolution = 64;              // segments per full revolution, >= 16
    double gap = 0.012;               // clearance between element boxes, meters

    static PatternParams defaults(PatternId id);
};

/// Fixed fixture constants, meters.
namespace fixture_dims {
inline constexpr double kBackplateWidth = 0.1736;
inline constexpr double kBackplateHeight = 0.1016;
inline constexpr double kBackplateThickness = 0.006;
inline constexpr double kMarkerSide = 0.020;
inline constexpr double kMarkerInset = 0.005; // from backplate edge
/// Standoff between the backplate face (z = 0) and the lowest pattern point.
/// Keeps the mounting surfaces out of the tolerance-expanded measurement box.
inline constexpr double kPatternBase = 0.008;
} // namespace fixture_dims

/// One square fiducial: 4 corners in mesh frame, fixed order
/// top-left, top-right, bottom-right, bottom-left.
struct MarkerSpec {
    int id = 0;
    std::array<Vec3, 4> corners;
};

/// Ties the physical fixture to the mesh frame: where the marker corners sit,
/// which region the test pattern occupies, and how big the backplate is.
/// Mesh frame: backplate face is z = 0, +z toward the camera side, +y up.
struct FixtureDescriptor {
    PatternId pattern_id = PatternId::CylindersVertical;
    std::array<MarkerSpec, 4> markers;
    Aabb roi_box;
    Eigen::Vector2d backplate_extent{0.0, 0.0};

    FixtureDescriptor();
    FixtureDescriptor(PatternId id, std::array<MarkerSpec, 4> marker_specs, Aabb roi,
                      const Eigen::Vector2d& extent);

    /// 16 corners flattened in marker-id order, then corner order.
    std::vector<Vec3> all_corners() const;
};

/// Builds the test-pattern reference mesh: watertight elements in mesh frame,
/// lowest point at z = kPatternBase, laid out in a centered row.
/// Throws LayoutError when elements overlap or overflow the backplate.
TriangleMesh generate_pattern(const PatternParams& params);

/// Marker corner coordinates plus the pattern bounding box for params.
FixtureDescriptor generate_descriptor(const PatternParams& params);

/// Swaps a cylinder pattern between vertical and horizontal orientation.
/// The horizontal pattern mesh is exactly the vertical one rotated 90 degrees
/// about the backplate normal through the pattern center.
PatternParams rotate_pattern_90(const PatternParams& params);

/// Backplate slab (front face at z = 0) for scene composition/visualization.
/// Not part of the reference pattern or the measurement region.
TriangleMesh generate_backplate_mesh(const Eigen::Vector2d& extent);

// JSON serialization (descriptor files and optional pattern parameter files).
std::string write_descriptor(const FixtureDescriptor& desc);
FixtureDescriptor parse_descriptor(const std::string& text);

/// Reads a parameter override file; keys absent from the file keep the
/// defaults for the given pattern. Angles are given as "plate_angles_deg".
PatternParams parse_pattern_params(const std::string& text, PatternId id);

} // namespace depthq
