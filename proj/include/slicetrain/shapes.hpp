#pragma once

// Procedural training shapes with per-triangle part labels, analytic
// primitives for tests and item generation, and the area sweep oracle.

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "slicetrain/geometry.hpp"

namespace slicetrain {

enum class ShapeId { hourglass, taper, y_branch, potato_hole, tutorial_capsule };

const char* to_string(ShapeId id);
std::optional<ShapeId> parse_shape_id(std::string_view name);

struct ShapeSpec {
    ShapeId shape_id = ShapeId::hourglass;
    int radial_segments = 64;
    int axial_segments = 64;
    std::uint64_t seed = 0;
    std::vector<std::string> part_set;

    bool operator==(const ShapeSpec&) const = default;
};

inline constexpr int kMinSegments = 32;
inline constexpr int kMaxSegments = 1024;

// Geometry constants shared with task calibration.
namespace shape_params {
inline constexpr double kBranchAngleDeg = 35.0;
inline constexpr double kTorusMajor = 1.0;
inline constexpr double kTorusMinor = 0.4;
inline constexpr double kPotatoNoise = 0.08;
}  // namespace shape_params

ShapeSpec default_spec(ShapeId id);
std::vector<ShapeSpec> shape_catalog();
nlohmann::json to_json(const ShapeSpec& spec);
nlohmann::json catalog_json();

// Throws InvalidSpec for out-of-range segment counts.
LabeledMesh make_shape(const ShapeSpec& spec);

// --- primitives (single part "body" unless noted) ----------------------------

LabeledMesh make_uv_sphere(double radius, int radial_segments, int axial_segments);
// Closed cylinder along +Y centred on the origin.
LabeledMesh make_cylinder(double radius, double half_height, int radial_segments, int axial_segments);
// Torus whose hole axis is +X; parts {outer_surface, hole_surface}.
LabeledMesh make_torus(double major_radius, double minor_radius, int major_segments, int minor_segments);

// Catalog ids plus "sphere", "cylinder" and "torus" primitives at test
// resolution. Throws InvalidSpec for unknown names.
LabeledMesh make_named_shape(std::string_view name);
std::vector<std::string> named_shapes();

struct SweepProfile {
    Vec3 axis;
    std::vector<double> offsets;
    std::vector<double> areas;  // material area: loops at odd depth subtract
    std::vector<std::size_t> loop_counts;
    std::vector<double> largest_loop_areas;
};

// Offsets start at the lowest vertex projection and step by extent/samples,
// so the bottom-most sample sits (after the degeneracy nudge) just inside
// the mesh and the midpoint is sampled exactly.
SweepProfile sweep_areas(const LabeledMesh& mesh, const Vec3& axis, int samples);

}  // namespace slicetrain
