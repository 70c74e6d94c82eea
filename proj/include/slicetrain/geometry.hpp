#pragma once

// Mesh/plane cross-section kernel: slicing, loop metrics, nesting,
// classification and capped cut-aways. All functions are pure.

#include <array>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "slicetrain/vec.hpp"

namespace slicetrain {

using Triangle = std::array<std::uint32_t, 3>;

// Closed triangle mesh with one semantic part label per triangle. part_of[i]
// indexes into part_set.
struct LabeledMesh {
    std::vector<Vec3> vertices;
    std::vector<Triangle> triangles;
    std::vector<std::string> part_set;
    std::vector<std::uint16_t> part_of;

    const std::string& part_name(std::size_t tri) const { return part_set[part_of[tri]]; }
};

struct Plane {
    Vec3 origin;
    Vec3 normal{0.0, 1.0, 0.0};
};

// Right-handed orthonormal in-plane basis: u x v = normal.
struct PlaneFrame {
    Vec3 origin;
    Vec3 u;
    Vec3 v;
    Vec3 normal;

    Vec2 project(const Vec3& p) const {
        const Vec3 d = p - origin;
        return {d.dot(u), d.dot(v)};
    }
    Vec3 lift(const Vec2& q) const { return origin + u * q.x + v * q.y; }
};

// Canonical frame derived only from the plane; rotating it by `angle_rad`
// about the normal gives any other orthonormal frame.
PlaneFrame make_frame(const Plane& plane, double angle_rad = 0.0);

struct Loop {
    std::vector<Vec3> points;
    // Mesh provenance: point k lies on mesh edge edge_ids[k]; segment
    // (k, k+1) was cut from triangle triangle_ids[k].
    std::vector<std::uint32_t> edge_ids;
    std::vector<std::uint32_t> triangle_ids;
};

struct LoopMetrics {
    double area = 0.0;
    double perimeter = 0.0;
    double axis_ratio = 1.0;
    Vec3 centroid;
};

inline constexpr int kRoot = -1;

struct CrossSection {
    // Plane actually used for slicing (the input plane, possibly nudged off
    // mesh vertices along its normal).
    Plane plane;
    std::vector<Loop> loops;
    std::vector<int> parent;  // kRoot for top-level loops
    std::vector<LoopMetrics> metrics;
    std::vector<std::set<std::string>> parts;

    std::size_t size() const { return loops.size(); }
    bool empty() const { return loops.empty(); }
    int depth(std::size_t loop) const;
    double total_area() const;
};

struct CutawayMesh {
    LabeledMesh mesh;
    std::vector<bool> is_cap;
    Plane plane;  // effective slicing plane, as in CrossSection
};

enum class Side { positive, negative };

enum class LoopShape { circle, oval, other };

struct ClassifierThresholds {
    double circle_max = 1.15;
    double oval_min = 1.30;
};

// Undirected edge table of a watertight mesh. Building it validates the
// two-triangles-per-edge invariant.
struct MeshTopology {
    std::vector<std::array<std::uint32_t, 2>> edges;  // (lo, hi) vertex ids
    std::vector<std::array<std::uint32_t, 3>> tri_edges;  // edge (v0,v1),(v1,v2),(v2,v0)
    std::vector<std::array<std::uint32_t, 2>> edge_tris;
};

MeshTopology build_topology(const LabeledMesh& mesh);

// Throws NonWatertightMesh / InvalidSpec style errors describing the first
// violated LabeledMesh invariant.
void validate_mesh(const LabeledMesh& mesh);

double triangle_area(const LabeledMesh& mesh, std::size_t tri);
double surface_area(const LabeledMesh& mesh);
long euler_characteristic(const LabeledMesh& mesh);
Vec3 bbox_min(const LabeledMesh& mesh);
Vec3 bbox_max(const LabeledMesh& mesh);
Vec3 bbox_center(const LabeledMesh& mesh);

// Returns the plane shifted off every vertex (|distance| > 1e-9) by steps of
// 1e-7 x bounding-box diagonal along the normal.
Plane effective_plane(const LabeledMesh& mesh, const Plane& plane);

CrossSection slice_mesh(const LabeledMesh& mesh, const Plane& plane);
CrossSection slice_mesh(const LabeledMesh& mesh, const MeshTopology& topo, const Plane& plane);

LoopMetrics compute_metrics(const Loop& loop, const Plane& plane);
LoopMetrics compute_metrics(const Loop& loop, const PlaneFrame& frame);

LoopShape classify_loop(const LoopMetrics& metrics, const ClassifierThresholds& thresholds = {});
const char* to_string(LoopShape shape);

std::vector<int> build_nesting(const std::vector<Loop>& loops, const Plane& plane);

std::set<std::string> loop_parts(const Loop& loop, const LabeledMesh& mesh);

CutawayMesh clip_and_cap(const LabeledMesh& mesh, const Plane& plane, Side keep_side);

// Triangulates a counter-clockwise outer ring with clockwise holes. Output
// triangles index the concatenation outer ++ holes[0] ++ holes[1] ..., and
// are counter-clockwise. Every ring vertex appears in the output.
std::vector<std::array<std::uint32_t, 3>> triangulate_polygon(
    const std::vector<Vec2>& outer, const std::vector<std::vector<Vec2>>& holes);

// --- file formats -----------------------------------------------------------

void write_obj(std::ostream& out, const LabeledMesh& mesh);
LabeledMesh read_obj(std::istream& in);

std::string cross_section_svg(const CrossSection& section, const Plane& requested_plane);

}  // namespace slicetrain
