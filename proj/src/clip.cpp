#include <algorithm>

#include "slicetrain/errors.hpp"
#include "slicetrain/geometry.hpp"

namespace slicetrain {

namespace {

constexpr std::uint32_t kUnset = 0xffffffffu;

}  // namespace

CutawayMesh clip_and_cap(const LabeledMesh& mesh, const Plane& plane, Side keep_side) {
    const MeshTopology topo = build_topology(mesh);
    const Plane eff = effective_plane(mesh, plane);

    CutawayMesh out;
    out.plane = eff;
    LabeledMesh& res = out.mesh;
    res.part_set = mesh.part_set;

    const double sign = keep_side == Side::positive ? 1.0 : -1.0;
    std::vector<bool> keep(mesh.vertices.size());
    for (std::size_t i = 0; i < mesh.vertices.size(); ++i)
        keep[i] = sign * (mesh.vertices[i] - eff.origin).dot(eff.normal) > 0.0;

    std::vector<std::uint32_t> vmap(mesh.vertices.size(), kUnset);
    for (const auto& tri : mesh.triangles) {
        for (auto v : tri) {
            if (keep[v] && vmap[v] == kUnset) {
                vmap[v] = static_cast<std::uint32_t>(res.vertices.size());
                res.vertices.push_back(mesh.vertices[v]);
            }
        }
    }

    // One new vertex per plane-crossing edge, shared by both incident
    // triangles and by the cap.
    std::vector<std::uint32_t> cut_vertex(topo.edges.size(), kUnset);
    auto cut = [&](std::uint32_t e) {
        if (cut_vertex[e] == kUnset) {
            const auto [a, b] = topo.edges[e];
            const double da = (mesh.vertices[a] - eff.origin).dot(eff.normal);
            const double db = (mesh.vertices[b] - eff.origin).dot(eff.normal);
            const double t = da / (da - db);
            cut_vertex[e] = static_cast<std::uint32_t>(res.vertices.size());
            res.vertices.push_back(mesh.vertices[a] + (mesh.vertices[b] - mesh.vertices[a]) * t);
        }
        return cut_vertex[e];
    };
    auto add = [&](std::uint32_t a, std::uint32_t b, std::uint32_t c, std::uint16_t part) {
        res.triangles.push_back({a, b, c});
        res.part_of.push_back(part);
        out.is_cap.push_back(false);
    };

    for (std::size_t t = 0; t < mesh.triangles.size(); ++t) {
        const auto& tri = mesh.triangles[t];
        const auto& te = topo.tri_edges[t];
        const std::uint16_t part = mesh.part_of[t];
        const int kept = int(keep[tri[0]]) + int(keep[tri[1]]) + int(keep[tri[2]]);
        if (kept == 0) continue;
        if (kept == 3) {
            add(vmap[tri[0]], vmap[tri[1]], vmap[tri[2]], part);
            continue;
        }
        // Rotate so corner k is the odd one out: kept alone (kept == 1) or
        // dropped alone (kept == 2). Edge k joins corner k to corner k+1.
        int k = 0;
        for (int i = 0; i < 3; ++i)
            if (keep[tri[i]] == (kept == 1)) k = i;
        const int k1 = (k + 1) % 3, k2 = (k + 2) % 3;
        const std::uint32_t p_ab = cut(te[k]);   // corner k -> k1
        const std::uint32_t p_ca = cut(te[k2]);  // corner k2 -> k
        if (kept == 1) {
            add(vmap[tri[k]], p_ab, p_ca, part);
        } else {
            add(p_ab, vmap[tri[k1]], vmap[tri[k2]], part);
            add(p_ab, vmap[tri[k2]], p_ca, part);
        }
    }

    const CrossSection section = slice_mesh(mesh, topo, eff);
    if (section.empty()) return out;

    const auto cap_part = static_cast<std::uint16_t>(res.part_set.size());
    res.part_set.push_back("cap");
    const PlaneFrame frame = make_frame(eff);

    for (std::size_t i = 0; i < section.size(); ++i) {
        if (section.depth(i) % 2 != 0) continue;

        std::vector<Vec2> outer;
        std::vector<std::uint32_t> ids;
        for (std::size_t k = 0; k < section.loops[i].points.size(); ++k) {
            outer.push_back(frame.project(section.loops[i].points[k]));
            ids.push_back(cut(section.loops[i].edge_ids[k]));
        }
        std::vector<std::vector<Vec2>> holes;
        for (std::size_t j = 0; j < section.size(); ++j) {
            if (section.parent[j] != static_cast<int>(i)) continue;
            auto& hole = holes.emplace_back();
            for (std::size_t k = 0; k < section.loops[j].points.size(); ++k) {
                hole.push_back(frame.project(section.loops[j].points[k]));
                ids.push_back(cut(section.loops[j].edge_ids[k]));
            }
        }

        for (const auto& t : triangulate_polygon(outer, holes)) {
            // Triangulation is counter-clockwise about +normal; the cap must
            // face away from the kept half-space.
            if (keep_side == Side::negative) add(ids[t[0]], ids[t[1]], ids[t[2]], cap_part);
            else add(ids[t[0]], ids[t[2]], ids[t[1]], cap_part);
            out.is_cap.back() = true;
        }
    }
    return out;
}

}  // namespace slicetrain
