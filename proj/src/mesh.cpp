#include <algorithm>
#include <cmath>
#include <limits>
#include <unordered_map>
#include <unordered_set>

#include "slicetrain/errors.hpp"
#include "slicetrain/geometry.hpp"

namespace slicetrain {

namespace {

constexpr double kVertexOnPlaneTol = 1e-9;
constexpr double kPlaneNudge = 1e-7;
// Area relative to the squared longest edge; below this the triangle is
// numerically a segment.
constexpr double kMinRelativeArea = 1e-12;

std::uint64_t edge_key(std::uint32_t a, std::uint32_t b) {
    if (a > b) std::swap(a, b);
    return (static_cast<std::uint64_t>(a) << 32) | b;
}

}  // namespace

PlaneFrame make_frame(const Plane& plane, double angle_rad) {
    const Vec3 n = plane.normal;
    // Helper axis least aligned with the normal; ties resolved x, y, z.
    const double ax = std::abs(n.x), ay = std::abs(n.y), az = std::abs(n.z);
    Vec3 helper{1.0, 0.0, 0.0};
    if (ay < ax && ay <= az) helper = {0.0, 1.0, 0.0};
    else if (az < ax && az < ay) helper = {0.0, 0.0, 1.0};

    Vec3 u = helper.cross(n).normalized();
    Vec3 v = n.cross(u);
    if (angle_rad != 0.0) {
        const double c = std::cos(angle_rad), s = std::sin(angle_rad);
        const Vec3 ru = u * c + v * s;
        const Vec3 rv = v * c - u * s;
        u = ru;
        v = rv;
    }
    return {plane.origin, u, v, n};
}

MeshTopology build_topology(const LabeledMesh& mesh) {
    MeshTopology topo;
    topo.tri_edges.resize(mesh.triangles.size());
    std::unordered_map<std::uint64_t, std::uint32_t> index;
    index.reserve(mesh.triangles.size() * 2);
    std::vector<std::uint32_t> count;

    for (std::size_t t = 0; t < mesh.triangles.size(); ++t) {
        const auto& tri = mesh.triangles[t];
        for (int k = 0; k < 3; ++k) {
            const std::uint32_t a = tri[k];
            const std::uint32_t b = tri[(k + 1) % 3];
            const auto [it, inserted] =
                index.try_emplace(edge_key(a, b), static_cast<std::uint32_t>(topo.edges.size()));
            if (inserted) {
                topo.edges.push_back({std::min(a, b), std::max(a, b)});
                topo.edge_tris.push_back({0, 0});
                count.push_back(0);
            }
            const std::uint32_t e = it->second;
            if (count[e] < 2) topo.edge_tris[e][count[e]] = static_cast<std::uint32_t>(t);
            ++count[e];
            topo.tri_edges[t][k] = e;
        }
    }
    for (std::size_t e = 0; e < count.size(); ++e) {
        if (count[e] != 2) {
            throw NonWatertightMesh("edge (" + std::to_string(topo.edges[e][0]) + ", " +
                                    std::to_string(topo.edges[e][1]) + ") has " +
                                    std::to_string(count[e]) + " incident triangles");
        }
    }
    return topo;
}

void validate_mesh(const LabeledMesh& mesh) {
    if (mesh.part_of.size() != mesh.triangles.size())
        throw MeshFormatError("part label count does not match triangle count");
    for (const auto& tri : mesh.triangles)
        for (auto v : tri)
            if (v >= mesh.vertices.size()) throw MeshFormatError("vertex index out of range");
    for (auto p : mesh.part_of)
        if (p >= mesh.part_set.size()) throw MeshFormatError("part label outside the part set");

    const MeshTopology topo = build_topology(mesh);

    // Consistent winding: each edge is walked once in each direction.
    for (std::size_t e = 0; e < topo.edges.size(); ++e) {
        int forward = 0;
        for (auto t : topo.edge_tris[e]) {
            const auto& tri = mesh.triangles[t];
            for (int k = 0; k < 3; ++k)
                if (tri[k] == topo.edges[e][0] && tri[(k + 1) % 3] == topo.edges[e][1]) ++forward;
        }
        if (forward != 1) throw MeshFormatError("inconsistent triangle winding at edge " + std::to_string(e));
    }
    for (std::size_t t = 0; t < mesh.triangles.size(); ++t) {
        const auto& tri = mesh.triangles[t];
        double longest = 0.0;
        for (int k = 0; k < 3; ++k)
            longest = std::max(longest, (mesh.vertices[tri[(k + 1) % 3]] - mesh.vertices[tri[k]]).norm());
        if (!(triangle_area(mesh, t) > kMinRelativeArea * longest * longest))
            throw MeshFormatError("degenerate triangle " + std::to_string(t));
    }
}

double triangle_area(const LabeledMesh& mesh, std::size_t tri) {
    const auto& t = mesh.triangles[tri];
    const Vec3& a = mesh.vertices[t[0]];
    const Vec3& b = mesh.vertices[t[1]];
    const Vec3& c = mesh.vertices[t[2]];
    return 0.5 * (b - a).cross(c - a).norm();
}

double surface_area(const LabeledMesh& mesh) {
    double total = 0.0;
    for (std::size_t t = 0; t < mesh.triangles.size(); ++t) total += triangle_area(mesh, t);
    return total;
}

long euler_characteristic(const LabeledMesh& mesh) {
    std::unordered_set<std::uint32_t> used;
    std::unordered_set<std::uint64_t> edges;
    for (const auto& tri : mesh.triangles) {
        for (int k = 0; k < 3; ++k) {
            used.insert(tri[k]);
            edges.insert(edge_key(tri[k], tri[(k + 1) % 3]));
        }
    }
    return static_cast<long>(used.size()) - static_cast<long>(edges.size()) +
           static_cast<long>(mesh.triangles.size());
}

Vec3 bbox_min(const LabeledMesh& mesh) {
    constexpr double inf = std::numeric_limits<double>::infinity();
    Vec3 lo{inf, inf, inf};
    for (const auto& p : mesh.vertices) {
        lo.x = std::min(lo.x, p.x);
        lo.y = std::min(lo.y, p.y);
        lo.z = std::min(lo.z, p.z);
    }
    return lo;
}

Vec3 bbox_max(const LabeledMesh& mesh) {
    constexpr double inf = std::numeric_limits<double>::infinity();
    Vec3 hi{-inf, -inf, -inf};
    for (const auto& p : mesh.vertices) {
        hi.x = std::max(hi.x, p.x);
        hi.y = std::max(hi.y, p.y);
        hi.z = std::max(hi.z, p.z);
    }
    return hi;
}

Vec3 bbox_center(const LabeledMesh& mesh) {
    return (bbox_min(mesh) + bbox_max(mesh)) * 0.5;
}

Plane effective_plane(const LabeledMesh& mesh, const Plane& plane) {
    const double nn = plane.normal.norm();
    if (!std::isfinite(nn) || std::abs(nn - 1.0) > 1e-9)
        throw DegeneratePlane("plane normal has length " + std::to_string(nn));
    if (mesh.vertices.empty()) return plane;

    const double step = kPlaneNudge * (bbox_max(mesh) - bbox_min(mesh)).norm();
    Plane p = plane;
    for (int attempt = 0; attempt < 16; ++attempt) {
        bool touching = false;
        for (const auto& v : mesh.vertices) {
            if (std::abs((v - p.origin).dot(p.normal)) <= kVertexOnPlaneTol) {
                touching = true;
                break;
            }
        }
        if (!touching) return p;
        p.origin = p.origin + p.normal * step;
    }
    return p;
}

}  // namespace slicetrain
