#include <algorithm>
#include <cmath>
#include <istream>
#include <limits>
#include <map>
#include <ostream>
#include <sstream>

#include "format.hpp"
#include "slicetrain/errors.hpp"
#include "slicetrain/geometry.hpp"

namespace slicetrain {

using detail::fmt_double;

void write_obj(std::ostream& out, const LabeledMesh& mesh) {
    out << "# slicetrain labeled mesh\n";
    for (const auto& v : mesh.vertices)
        out << "v " << fmt_double(v.x) << ' ' << fmt_double(v.y) << ' ' << fmt_double(v.z) << '\n';
    for (std::size_t part = 0; part < mesh.part_set.size(); ++part) {
        out << "g " << mesh.part_set[part] << '\n';
        for (std::size_t t = 0; t < mesh.triangles.size(); ++t) {
            if (mesh.part_of[t] != part) continue;
            const auto& tri = mesh.triangles[t];
            out << "f " << tri[0] + 1 << ' ' << tri[1] + 1 << ' ' << tri[2] + 1 << '\n';
        }
    }
}

LabeledMesh read_obj(std::istream& in) {
    LabeledMesh mesh;
    std::map<std::string, std::uint16_t> part_index;
    std::uint16_t current = 0;
    bool have_group = false;

    auto part_for = [&](const std::string& name) {
        auto it = part_index.find(name);
        if (it != part_index.end()) return it->second;
        const auto id = static_cast<std::uint16_t>(mesh.part_set.size());
        mesh.part_set.push_back(name);
        part_index.emplace(name, id);
        return id;
    };

    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        std::istringstream ls(line);
        std::string tag;
        if (!(ls >> tag) || tag[0] == '#') continue;
        if (tag == "v") {
            Vec3 p;
            if (!(ls >> p.x >> p.y >> p.z))
                throw MeshFormatError("bad vertex on line " + std::to_string(line_no));
            mesh.vertices.push_back(p);
        } else if (tag == "g" || tag == "o") {
            std::string name;
            ls >> name;
            if (name.empty()) name = "default";
            current = part_for(name);
            have_group = true;
        } else if (tag == "f") {
            std::vector<std::uint32_t> idx;
            std::string tok;
            while (ls >> tok) {
                const long v = std::stol(tok.substr(0, tok.find('/')));
                const long n = static_cast<long>(mesh.vertices.size());
                const long resolved = v < 0 ? n + v : v - 1;
                if (resolved < 0 || resolved >= n)
                    throw MeshFormatError("face index out of range on line " + std::to_string(line_no));
                idx.push_back(static_cast<std::uint32_t>(resolved));
            }
            if (idx.size() < 3) throw MeshFormatError("face with fewer than 3 vertices on line " + std::to_string(line_no));
            if (!have_group) {
                current = part_for("default");
                have_group = true;
            }
            for (std::size_t k = 1; k + 1 < idx.size(); ++k) {
                mesh.triangles.push_back({idx[0], idx[k], idx[k + 1]});
                mesh.part_of.push_back(current);
            }
        }
    }
    return mesh;
}

std::string cross_section_svg(const CrossSection& section, const Plane& requested_plane) {
    const PlaneFrame frame = make_frame(section.plane);
    double x0 = std::numeric_limits<double>::infinity(), y0 = x0;
    double x1 = -x0, y1 = -x0;
    std::vector<std::vector<Vec2>> flat;
    for (const auto& loop : section.loops) {
        auto& f = flat.emplace_back();
        for (const auto& p : loop.points) {
            const Vec2 q = frame.project(p);
            f.push_back({q.x, -q.y});  // svg y grows downward
            x0 = std::min(x0, q.x);
            x1 = std::max(x1, q.x);
            y0 = std::min(y0, -q.y);
            y1 = std::max(y1, -q.y);
        }
    }
    if (flat.empty()) x0 = y0 = -1.0, x1 = y1 = 1.0;
    const double margin = 0.05 * std::max({x1 - x0, y1 - y0, 1e-6});

    auto vec = [](const Vec3& v) {
        return fmt_double(v.x) + " " + fmt_double(v.y) + " " + fmt_double(v.z);
    };

    std::ostringstream svg;
    svg << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
    svg << "<!-- plane origin " << vec(requested_plane.origin) << " normal " << vec(requested_plane.normal)
        << " -->\n";
    svg << "<!-- effective origin " << vec(section.plane.origin) << " normal " << vec(section.plane.normal)
        << " loops " << section.size() << " -->\n";
    svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"" << fmt_double(x0 - margin) << ' '
        << fmt_double(y0 - margin) << ' ' << fmt_double(x1 - x0 + 2 * margin) << ' '
        << fmt_double(y1 - y0 + 2 * margin) << "\">\n";
    for (std::size_t i = 0; i < flat.size(); ++i) {
        svg << "  <path id=\"loop" << i << "\" fill=\"white\" stroke=\"black\" fill-rule=\"evenodd\" "
            << "stroke-width=\"" << fmt_double(margin * 0.2) << "\" d=\"";
        for (std::size_t k = 0; k < flat[i].size(); ++k)
            svg << (k == 0 ? "M" : " L") << fmt_double(flat[i][k].x) << ' ' << fmt_double(flat[i][k].y);
        svg << " Z\"/>\n";
    }
    svg << "</svg>\n";
    return svg.str();
}

}  // namespace slicetrain
