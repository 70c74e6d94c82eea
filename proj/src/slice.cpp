#include <algorithm>
#include <cmath>
#include <numeric>

#include "slicetrain/errors.hpp"
#include "slicetrain/geometry.hpp"

namespace slicetrain {

namespace {

constexpr std::uint32_t kNone = 0xffffffffu;

bool point_in_polygon(const Vec2& p, const std::vector<Vec2>& poly) {
    bool inside = false;
    const std::size_t n = poly.size();
    for (std::size_t i = 0, j = n - 1; i < n; j = i++) {
        const Vec2& a = poly[i];
        const Vec2& b = poly[j];
        if ((a.y > p.y) != (b.y > p.y)) {
            const double x = a.x + (p.y - a.y) * (b.x - a.x) / (b.y - a.y);
            if (p.x < x) inside = !inside;
        }
    }
    return inside;
}

double signed_area(const std::vector<Vec2>& poly) {
    double twice = 0.0;
    const std::size_t n = poly.size();
    for (std::size_t i = 0; i < n; ++i) {
        const Vec2& a = poly[i];
        const Vec2& b = poly[(i + 1) % n];
        twice += a.x * b.y - b.x * a.y;
    }
    return 0.5 * twice;
}

std::vector<Vec2> project_loop(const Loop& loop, const PlaneFrame& frame) {
    std::vector<Vec2> out;
    out.reserve(loop.points.size());
    for (const auto& p : loop.points) out.push_back(frame.project(p));
    return out;
}

void reverse_loop(Loop& loop) {
    const std::size_t n = loop.points.size();
    std::reverse(loop.points.begin(), loop.points.end());
    std::reverse(loop.edge_ids.begin(), loop.edge_ids.end());
    std::vector<std::uint32_t> tris(n);
    for (std::size_t j = 0; j < n; ++j) tris[j] = loop.triangle_ids[(2 * n - 2 - j) % n];
    loop.triangle_ids = std::move(tris);
}

}  // namespace

int CrossSection::depth(std::size_t loop) const {
    int d = 0;
    for (int p = parent[loop]; p != kRoot; p = parent[static_cast<std::size_t>(p)]) ++d;
    return d;
}

double CrossSection::total_area() const {
    double a = 0.0;
    for (const auto& m : metrics) a += m.area;
    return a;
}

CrossSection slice_mesh(const LabeledMesh& mesh, const Plane& plane) {
    return slice_mesh(mesh, build_topology(mesh), plane);
}

CrossSection slice_mesh(const LabeledMesh& mesh, const MeshTopology& topo, const Plane& plane) {
    CrossSection out;
    out.plane = effective_plane(mesh, plane);
    const Plane& p = out.plane;

    std::vector<double> dist(mesh.vertices.size());
    for (std::size_t i = 0; i < mesh.vertices.size(); ++i)
        dist[i] = (mesh.vertices[i] - p.origin).dot(p.normal);

    const std::size_t edge_count = topo.edges.size();
    std::vector<bool> crossing(edge_count, false);
    std::vector<Vec3> cut_point(edge_count);
    for (std::size_t e = 0; e < edge_count; ++e) {
        const auto [a, b] = topo.edges[e];
        if ((dist[a] > 0.0) == (dist[b] > 0.0)) continue;
        crossing[e] = true;
        const double t = dist[a] / (dist[a] - dist[b]);
        cut_point[e] = mesh.vertices[a] + (mesh.vertices[b] - mesh.vertices[a]) * t;
    }

    // Each straddling triangle links exactly two crossing edges.
    std::vector<std::array<std::uint32_t, 2>> tri_link(mesh.triangles.size(), {kNone, kNone});
    for (std::size_t t = 0; t < mesh.triangles.size(); ++t) {
        int found = 0;
        for (auto e : topo.tri_edges[t]) {
            if (!crossing[e]) continue;
            if (found < 2) tri_link[t][found] = e;
            ++found;
        }
        if (found != 0 && found != 2)
            throw NonWatertightMesh("triangle " + std::to_string(t) + " has " + std::to_string(found) +
                                    " plane-crossing edges");
    }

    std::vector<bool> visited(edge_count, false);
    for (std::size_t start = 0; start < edge_count; ++start) {
        if (!crossing[start] || visited[start]) continue;
        Loop loop;
        std::uint32_t e = static_cast<std::uint32_t>(start);
        std::uint32_t tri = topo.edge_tris[e][0];
        do {
            visited[e] = true;
            loop.points.push_back(cut_point[e]);
            loop.edge_ids.push_back(e);
            loop.triangle_ids.push_back(tri);
            const auto& link = tri_link[tri];
            e = link[0] == e ? link[1] : link[0];
            tri = topo.edge_tris[e][0] == tri ? topo.edge_tris[e][1] : topo.edge_tris[e][0];
            if (visited[e] && e != start) throw NonWatertightMesh("slice chain revisits an edge");
        } while (e != start);
        out.loops.push_back(std::move(loop));
    }

    if (out.loops.empty()) return out;

    out.parent = build_nesting(out.loops, p);

    const PlaneFrame frame = make_frame(p);
    for (std::size_t i = 0; i < out.loops.size(); ++i) {
        const bool want_ccw = out.depth(i) % 2 == 0;
        const bool is_ccw = signed_area(project_loop(out.loops[i], frame)) > 0.0;
        if (want_ccw != is_ccw) reverse_loop(out.loops[i]);
    }
    out.metrics.reserve(out.loops.size());
    out.parts.reserve(out.loops.size());
    for (const auto& loop : out.loops) {
        out.metrics.push_back(compute_metrics(loop, frame));
        out.parts.push_back(loop_parts(loop, mesh));
    }
    return out;
}

std::vector<int> build_nesting(const std::vector<Loop>& loops, const Plane& plane) {
    const PlaneFrame frame = make_frame(plane);
    const std::size_t n = loops.size();
    std::vector<std::vector<Vec2>> flat(n);
    std::vector<double> area(n);
    for (std::size_t i = 0; i < n; ++i) {
        flat[i] = project_loop(loops[i], frame);
        area[i] = std::abs(signed_area(flat[i]));
    }

    // contains[i][j]: loop i lies inside loop j.
    std::vector<std::vector<bool>> contains(n, std::vector<bool>(n, false));
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            if (i == j) continue;
            std::size_t inside = 0;
            for (const auto& q : flat[i]) inside += point_in_polygon(q, flat[j]) ? 1 : 0;
            if (inside != 0 && inside != flat[i].size())
                throw CrossingLoops("loops " + std::to_string(i) + " and " + std::to_string(j) + " cross");
            contains[i][j] = inside != 0;
        }
    }

    std::vector<int> parent(n, kRoot);
    for (std::size_t i = 0; i < n; ++i) {
        double best = 0.0;
        for (std::size_t j = 0; j < n; ++j) {
            if (!contains[i][j]) continue;
            if (contains[j][i])
                throw CrossingLoops("loops " + std::to_string(i) + " and " + std::to_string(j) +
                                    " contain each other");
            if (parent[i] == kRoot || area[j] < best) {
                parent[i] = static_cast<int>(j);
                best = area[j];
            }
        }
    }
    return parent;
}

std::set<std::string> loop_parts(const Loop& loop, const LabeledMesh& mesh) {
    std::set<std::string> parts;
    for (auto t : loop.triangle_ids) parts.insert(mesh.part_name(t));
    return parts;
}

LoopMetrics compute_metrics(const Loop& loop, const Plane& plane) {
    return compute_metrics(loop, make_frame(plane));
}

LoopMetrics compute_metrics(const Loop& loop, const PlaneFrame& frame) {
    const std::size_t n = loop.points.size();
    if (n < 3) throw DegenerateLoop("loop has " + std::to_string(n) + " points");

    std::vector<Vec2> q = project_loop(loop, frame);
    Vec2 mean{};
    for (const auto& p : q) mean = mean + p;
    mean = mean * (1.0 / static_cast<double>(n));
    for (auto& p : q) p = p - mean;

    double twice_area = 0.0, sx = 0.0, sy = 0.0, sxx = 0.0, syy = 0.0, sxy = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const Vec2& a = q[i];
        const Vec2& b = q[(i + 1) % n];
        const double c = a.x * b.y - b.x * a.y;
        twice_area += c;
        sx += (a.x + b.x) * c;
        sy += (a.y + b.y) * c;
        sxx += (a.x * a.x + a.x * b.x + b.x * b.x) * c;
        syy += (a.y * a.y + a.y * b.y + b.y * b.y) * c;
        sxy += (a.x * b.y + 2.0 * a.x * a.y + 2.0 * b.x * b.y + b.x * a.y) * c;
    }

    double perimeter = 0.0;
    for (std::size_t i = 0; i < n; ++i) perimeter += (loop.points[(i + 1) % n] - loop.points[i]).norm();

    const double signed_a = 0.5 * twice_area;
    if (!(std::abs(signed_a) > 1e-12 * perimeter * perimeter))
        throw DegenerateLoop("loop encloses no area");

    const double cx = sx / (6.0 * signed_a);
    const double cy = sy / (6.0 * signed_a);
    // Central second moments of the enclosed region, per unit area.
    const double mxx = sxx / (12.0 * signed_a) - cx * cx;
    const double myy = syy / (12.0 * signed_a) - cy * cy;
    const double mxy = sxy / (24.0 * signed_a) - cx * cy;

    const double half_trace = 0.5 * (mxx + myy);
    const double disc = std::sqrt(0.25 * (mxx - myy) * (mxx - myy) + mxy * mxy);
    const double major = half_trace + disc;
    const double minor = half_trace - disc;
    if (!(minor > 1e-12 * major)) throw DegenerateLoop("loop is collinear");

    LoopMetrics m;
    m.area = std::abs(signed_a);
    m.perimeter = perimeter;
    m.axis_ratio = std::max(1.0, std::sqrt(major / minor));
    m.centroid = frame.lift(Vec2{cx + mean.x, cy + mean.y});
    return m;
}

LoopShape classify_loop(const LoopMetrics& metrics, const ClassifierThresholds& thresholds) {
    if (metrics.axis_ratio <= thresholds.circle_max) return LoopShape::circle;
    if (metrics.axis_ratio >= thresholds.oval_min) return LoopShape::oval;
    return LoopShape::other;
}

const char* to_string(LoopShape shape) {
    switch (shape) {
        case LoopShape::circle: return "circle";
        case LoopShape::oval: return "oval";
        case LoopShape::other: return "other";
    }
    return "other";
}

}  // namespace slicetrain
