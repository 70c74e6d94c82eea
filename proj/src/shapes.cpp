#include <algorithm>
#include <cmath>
#include <functional>
#include <random>

#include "slicetrain/errors.hpp"
#include "slicetrain/shapes.hpp"

namespace slicetrain {

namespace {

using Ring = std::vector<std::uint32_t>;

class MeshBuilder {
public:
    explicit MeshBuilder(std::vector<std::string> parts) { mesh_.part_set = std::move(parts); }

    std::uint32_t vertex(const Vec3& p) {
        mesh_.vertices.push_back(p);
        return static_cast<std::uint32_t>(mesh_.vertices.size() - 1);
    }

    void tri(std::uint32_t a, std::uint32_t b, std::uint32_t c, std::uint16_t part) {
        mesh_.triangles.push_back({a, b, c});
        mesh_.part_of.push_back(part);
    }

    // Quads between two rings of equal size, both running counter-clockwise
    // seen from +Y, `upper` above `lower`.
    void stitch(const Ring& lower, const Ring& upper, std::uint16_t part) {
        const std::size_t n = lower.size();
        for (std::size_t i = 0; i < n; ++i) {
            const std::size_t j = (i + 1) % n;
            tri(lower[i], upper[i], lower[j], part);
            tri(lower[j], upper[i], upper[j], part);
        }
    }

    void fan_bottom(std::uint32_t pole, const Ring& ring, std::uint16_t part) {
        for (std::size_t i = 0; i < ring.size(); ++i) tri(pole, ring[i], ring[(i + 1) % ring.size()], part);
    }

    void fan_top(std::uint32_t pole, const Ring& ring, std::uint16_t part) {
        for (std::size_t i = 0; i < ring.size(); ++i) tri(pole, ring[(i + 1) % ring.size()], ring[i], part);
    }

    // Orients the closed surface outward (positive enclosed volume).
    LabeledMesh finish() {
        double six_volume = 0.0;
        for (const auto& t : mesh_.triangles)
            six_volume += mesh_.vertices[t[0]].dot(mesh_.vertices[t[1]].cross(mesh_.vertices[t[2]]));
        if (six_volume < 0.0)
            for (auto& t : mesh_.triangles) std::swap(t[1], t[2]);
        return std::move(mesh_);
    }

private:
    LabeledMesh mesh_;
};

// Ring in the XZ plane at height y; angle 0 on +X, increasing toward +Z.
Ring circle_ring(MeshBuilder& b, int n, double radius, double y, Vec3 center = {}) {
    Ring ring(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
        const double a = 2.0 * kPi * i / n;
        ring[i] = b.vertex({center.x + radius * std::cos(a), y, center.z + radius * std::sin(a)});
    }
    return ring;
}

struct ProfilePoint {
    double radius;
    double y;
};

// Closed surface of revolution about +Y; poles at the ends of the profile.
LabeledMesh revolve(const std::vector<ProfilePoint>& profile, double y_bottom, double y_top, int radial,
                    const std::string& part) {
    MeshBuilder b({part});
    std::vector<Ring> rings;
    for (const auto& p : profile) rings.push_back(circle_ring(b, radial, p.radius, p.y));
    const std::uint32_t bottom = b.vertex({0.0, y_bottom, 0.0});
    const std::uint32_t top = b.vertex({0.0, y_top, 0.0});
    b.fan_bottom(bottom, rings.front(), 0);
    for (std::size_t j = 0; j + 1 < rings.size(); ++j) b.stitch(rings[j], rings[j + 1], 0);
    b.fan_top(top, rings.back(), 0);
    return b.finish();
}

LabeledMesh make_profile_shape(const std::function<double(double)>& radius_at, int radial, int axial) {
    std::vector<ProfilePoint> profile;
    for (int j = 0; j <= axial; ++j) {
        const double y = -1.0 + 2.0 * j / axial;
        profile.push_back({radius_at(y), y});
    }
    profile.front().y = -1.0;
    profile.back().y = 1.0;
    return revolve(profile, -1.0, 1.0, radial, "body");
}

LabeledMesh make_capsule(double radius, double half_length, int radial, int axial) {
    // Hemisphere latitudes get a quarter of the axial budget each.
    const int cap = std::max(4, axial / 4);
    const int body = std::max(1, axial - 2 * cap);
    std::vector<ProfilePoint> profile;
    for (int j = 1; j <= cap; ++j) {
        const double a = 0.5 * kPi * j / cap;  // from the pole
        profile.push_back({radius * std::sin(a), -half_length - radius * std::cos(a)});
    }
    for (int j = 1; j < body; ++j) profile.push_back({radius, -half_length + 2.0 * half_length * j / body});
    for (int j = cap; j >= 1; --j) {
        const double a = 0.5 * kPi * j / cap;
        profile.push_back({radius * std::sin(a), half_length + radius * std::cos(a)});
    }
    return revolve(profile, -half_length - radius, half_length + radius, radial, "body");
}

double smoothstep(double t) {
    t = std::clamp(t, 0.0, 1.0);
    return t * t * (3.0 - 2.0 * t);
}

LabeledMesh make_y_branch(int radial, int axial) {
    if (radial % 4 != 0) throw InvalidSpec("y_branch needs radial_segments divisible by 4");

    constexpr double kTrunkRadius = 0.28;
    constexpr double kLobeRadius = 0.16;  // junction lobes and branch tube radius
    constexpr double kBottom = -1.0;
    constexpr double kBlendStart = -0.2;
    constexpr double kSplit = 0.0;
    constexpr double kTop = 0.9;
    constexpr double kFlare = 0.15;  // height over which lobes become tilted tubes
    const double tilt = deg_to_rad(shape_params::kBranchAngleDeg);
    const double slope = std::tan(tilt);

    enum : std::uint16_t { kStem = 0, kLeft = 1, kRight = 2 };
    MeshBuilder b({"stem", "branch_left", "branch_right"});

    const double height = kTop - kBottom;
    const int n_trunk = std::max(2, static_cast<int>(std::lround(axial * (kBlendStart - kBottom) / height)));
    const int n_blend = std::max(4, static_cast<int>(std::lround(axial * (kSplit - kBlendStart) / height)));
    const int n_branch = std::max(4, axial - n_trunk - n_blend);

    const int n = radial;
    const int quarter = n / 4;

    // Junction figure: two touching circles, angle doubled about each lobe
    // centre so the waist points (phi = 90, 270 deg) land on the origin.
    auto junction = [&](int i) -> Vec2 {
        const double phi = 2.0 * kPi * i / n;
        const bool right = i <= quarter || i >= 3 * quarter;
        if (right) {
            const double t = 2.0 * phi;
            return {kLobeRadius + kLobeRadius * std::cos(t), kLobeRadius * std::sin(t)};
        }
        const double t = 2.0 * (phi - kPi);
        return {-kLobeRadius - kLobeRadius * std::cos(t), -kLobeRadius * std::sin(t)};
    };

    std::vector<Ring> stem_rings;
    for (int j = 0; j <= n_trunk; ++j)
        stem_rings.push_back(circle_ring(b, n, kTrunkRadius, kBottom + (kBlendStart - kBottom) * j / n_trunk));
    for (int j = 1; j < n_blend; ++j) {
        const double y = kBlendStart + (kSplit - kBlendStart) * j / n_blend;
        const double s = smoothstep(static_cast<double>(j) / n_blend);
        Ring ring(n);
        for (int i = 0; i < n; ++i) {
            const double phi = 2.0 * kPi * i / n;
            const Vec2 c{kTrunkRadius * std::cos(phi), kTrunkRadius * std::sin(phi)};
            const Vec2 jpt = junction(i);
            ring[i] = b.vertex({c.x + (jpt.x - c.x) * s, y, c.y + (jpt.y - c.y) * s});
        }
        stem_rings.push_back(std::move(ring));
    }
    Ring split_ring(n);
    const std::uint32_t saddle = b.vertex({0.0, kSplit, 0.0});
    for (int i = 0; i < n; ++i) {
        if (i == quarter || i == 3 * quarter) {
            split_ring[i] = saddle;
        } else {
            const Vec2 jpt = junction(i);
            split_ring[i] = b.vertex({jpt.x, kSplit, jpt.y});
        }
    }
    stem_rings.push_back(split_ring);

    b.fan_bottom(b.vertex({0.0, kBottom, 0.0}), stem_rings.front(), kStem);
    for (std::size_t j = 0; j + 1 < stem_rings.size(); ++j) b.stitch(stem_rings[j], stem_rings[j + 1], kStem);

    // Branch k: side = +1 right, -1 left. Lobe rings start at the saddle.
    for (int side : {+1, -1}) {
        const std::uint16_t part = side > 0 ? kRight : kLeft;
        Ring lobe;
        const int first = side > 0 ? 3 * quarter : quarter;
        for (int k = 0; k < n / 2; ++k) lobe.push_back(split_ring[(first + k) % n]);

        Ring prev = lobe;
        for (int j = 1; j <= n_branch; ++j) {
            const double y = kSplit + (kTop - kSplit) * j / n_branch;
            const double flare = smoothstep((y - kSplit) / kFlare);
            const double centre = kLobeRadius + (y - kSplit) * slope;
            const double semi_x = kLobeRadius * (1.0 + flare * (1.0 / std::cos(tilt) - 1.0));
            Ring ring(n / 2);
            for (int k = 0; k < n / 2; ++k) {
                const double t = -kPi + 2.0 * kPi * k / (n / 2);
                if (side > 0) {
                    ring[k] = b.vertex({centre + semi_x * std::cos(t), y, kLobeRadius * std::sin(t)});
                } else {
                    ring[k] = b.vertex({-centre - semi_x * std::cos(t), y, -kLobeRadius * std::sin(t)});
                }
            }
            b.stitch(prev, ring, part);
            prev = std::move(ring);
        }
        const double top_centre = side * (kLobeRadius + (kTop - kSplit) * slope);
        b.fan_top(b.vertex({top_centre, kTop, 0.0}), prev, part);
    }
    return b.finish();
}

double unit_from(std::mt19937_64& rng) {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

LabeledMesh torus_like(double major, int major_segments, int minor_segments,
                       const std::function<double(double, double)>& minor_at, const Vec3& scale,
                       bool normalize) {
    enum : std::uint16_t { kOuter = 0, kHole = 1 };
    MeshBuilder b({"outer_surface", "hole_surface"});
    std::vector<Ring> rings;
    std::vector<Vec3> raw;
    for (int i = 0; i < major_segments; ++i) {
        const double phi = 2.0 * kPi * i / major_segments;
        Ring ring(static_cast<std::size_t>(minor_segments));
        for (int k = 0; k < minor_segments; ++k) {
            const double psi = 2.0 * kPi * k / minor_segments;
            const double r = minor_at(phi, psi);
            const double rho = major + r * std::cos(psi);
            const Vec3 p{r * std::sin(psi), rho * std::cos(phi), rho * std::sin(phi)};
            raw.push_back(p);
            ring[k] = b.vertex({p.x * scale.x, p.y * scale.y, p.z * scale.z});
        }
        rings.push_back(std::move(ring));
    }
    // Labels come from the undeformed-scale torus: hole side is within
    // `major` of the hole axis.
    auto label = [&](std::uint32_t a, std::uint32_t c, std::uint32_t d) -> std::uint16_t {
        const Vec3 m = (raw[a] + raw[c] + raw[d]) / 3.0;
        return std::hypot(m.y, m.z) < major ? kHole : kOuter;
    };
    for (int i = 0; i < major_segments; ++i) {
        const Ring& r0 = rings[i];
        const Ring& r1 = rings[(i + 1) % major_segments];
        for (int k = 0; k < minor_segments; ++k) {
            const int k1 = (k + 1) % minor_segments;
            b.tri(r0[k], r1[k], r0[k1], label(r0[k], r1[k], r0[k1]));
            b.tri(r0[k1], r1[k], r1[k1], label(r0[k1], r1[k], r1[k1]));
        }
    }
    LabeledMesh mesh = b.finish();
    if (normalize) {
        double extent = 0.0;
        for (const auto& p : mesh.vertices)
            extent = std::max({extent, std::abs(p.x), std::abs(p.y), std::abs(p.z)});
        for (auto& p : mesh.vertices) p = p / extent;
    }
    return mesh;
}

LabeledMesh make_potato(int radial, int axial, std::uint64_t seed) {
    struct Wave {
        int m, n;
        double weight, phase;
    };
    std::mt19937_64 rng(seed);
    std::vector<Wave> waves;
    double total = 0.0;
    for (int k = 0; k < 4; ++k) {
        Wave w;
        w.m = 1 + static_cast<int>(unit_from(rng) * 3.0);  // 1..3 around the ring
        w.n = static_cast<int>(unit_from(rng) * 3.0);      // 0..2 around the tube
        w.weight = 0.5 + unit_from(rng);
        w.phase = 2.0 * kPi * unit_from(rng);
        total += w.weight;
        waves.push_back(w);
    }
    auto minor_at = [&](double phi, double psi) {
        double n = 0.0;
        for (const auto& w : waves) n += w.weight * std::sin(w.m * phi + w.n * psi + w.phase);
        return shape_params::kTorusMinor + shape_params::kPotatoNoise * n / total;
    };
    return torus_like(shape_params::kTorusMajor, axial, radial, minor_at,
                      {1.0, 0.9, 1.1}, true);
}

void check_segments(const ShapeSpec& spec) {
    for (int s : {spec.radial_segments, spec.axial_segments}) {
        if (s < kMinSegments || s > kMaxSegments)
            throw InvalidSpec("segment count " + std::to_string(s) + " outside [" + std::to_string(kMinSegments) +
                              ", " + std::to_string(kMaxSegments) + "]");
    }
}

}  // namespace

const char* to_string(ShapeId id) {
    switch (id) {
        case ShapeId::hourglass: return "hourglass";
        case ShapeId::taper: return "taper";
        case ShapeId::y_branch: return "y_branch";
        case ShapeId::potato_hole: return "potato_hole";
        case ShapeId::tutorial_capsule: return "tutorial_capsule";
    }
    return "unknown";
}

std::optional<ShapeId> parse_shape_id(std::string_view name) {
    for (ShapeId id : {ShapeId::hourglass, ShapeId::taper, ShapeId::y_branch, ShapeId::potato_hole,
                       ShapeId::tutorial_capsule})
        if (name == to_string(id)) return id;
    return std::nullopt;
}

ShapeSpec default_spec(ShapeId id) {
    ShapeSpec s;
    s.shape_id = id;
    switch (id) {
        case ShapeId::hourglass:
        case ShapeId::taper:
        case ShapeId::tutorial_capsule:
            s.part_set = {"body"};
            break;
        case ShapeId::y_branch:
            s.part_set = {"stem", "branch_left", "branch_right"};
            break;
        case ShapeId::potato_hole:
            s.radial_segments = 96;
            s.axial_segments = 96;
            s.seed = 7;
            s.part_set = {"outer_surface", "hole_surface"};
            break;
    }
    return s;
}

std::vector<ShapeSpec> shape_catalog() {
    return {default_spec(ShapeId::hourglass), default_spec(ShapeId::taper), default_spec(ShapeId::y_branch),
            default_spec(ShapeId::potato_hole), default_spec(ShapeId::tutorial_capsule)};
}

nlohmann::json to_json(const ShapeSpec& spec) {
    return {{"shape_id", to_string(spec.shape_id)},
            {"radial_segments", spec.radial_segments},
            {"axial_segments", spec.axial_segments},
            {"seed", spec.seed},
            {"part_set", spec.part_set}};
}

nlohmann::json catalog_json() {
    nlohmann::json shapes = nlohmann::json::array();
    for (const auto& s : shape_catalog()) shapes.push_back(to_json(s));
    return {{"shapes", shapes}};
}

LabeledMesh make_shape(const ShapeSpec& spec) {
    check_segments(spec);
    switch (spec.shape_id) {
        case ShapeId::hourglass:
            return make_profile_shape([](double y) { return 0.3 + 0.7 * y * y; }, spec.radial_segments,
                                      spec.axial_segments);
        case ShapeId::taper:
            return make_profile_shape([](double y) { return 1.0 - 0.35 * (y + 1.0); }, spec.radial_segments,
                                      spec.axial_segments);
        case ShapeId::y_branch:
            return make_y_branch(spec.radial_segments, spec.axial_segments);
        case ShapeId::potato_hole:
            return make_potato(spec.radial_segments, spec.axial_segments, spec.seed);
        case ShapeId::tutorial_capsule:
            return make_capsule(0.5, 0.5, spec.radial_segments, spec.axial_segments);
    }
    throw InvalidSpec("unknown shape id");
}

LabeledMesh make_uv_sphere(double radius, int radial_segments, int axial_segments) {
    std::vector<ProfilePoint> profile;
    for (int j = 1; j < axial_segments; ++j) {
        const double a = kPi * j / axial_segments;
        profile.push_back({radius * std::sin(a), -radius * std::cos(a)});
    }
    return revolve(profile, -radius, radius, radial_segments, "body");
}

LabeledMesh make_cylinder(double radius, double half_height, int radial_segments, int axial_segments) {
    std::vector<ProfilePoint> profile;
    for (int j = 0; j <= axial_segments; ++j)
        profile.push_back({radius, -half_height + 2.0 * half_height * j / axial_segments});
    return revolve(profile, -half_height, half_height, radial_segments, "body");
}

LabeledMesh make_torus(double major_radius, double minor_radius, int major_segments, int minor_segments) {
    return torus_like(major_radius, major_segments, minor_segments,
                      [minor_radius](double, double) { return minor_radius; }, {1.0, 1.0, 1.0}, false);
}

std::vector<std::string> named_shapes() {
    std::vector<std::string> names;
    for (const auto& s : shape_catalog()) names.emplace_back(to_string(s.shape_id));
    names.insert(names.end(), {"sphere", "cylinder", "torus"});
    return names;
}

LabeledMesh make_named_shape(std::string_view name) {
    if (auto id = parse_shape_id(name)) return make_shape(default_spec(*id));
    if (name == "sphere") return make_uv_sphere(1.0, 128, 128);
    if (name == "cylinder") return make_cylinder(1.0, 1.0, 128, 8);
    if (name == "torus") return make_torus(shape_params::kTorusMajor, shape_params::kTorusMinor, 128, 128);
    throw InvalidSpec("unknown shape '" + std::string(name) + "'");
}

SweepProfile sweep_areas(const LabeledMesh& mesh, const Vec3& axis, int samples) {
    if (samples < 64) throw InvalidSpec("sweep needs at least 64 samples");
    SweepProfile profile;
    profile.axis = axis.normalized();
    double lo = std::numeric_limits<double>::infinity(), hi = -lo;
    for (const auto& v : mesh.vertices) {
        const double d = v.dot(profile.axis);
        lo = std::min(lo, d);
        hi = std::max(hi, d);
    }
    const MeshTopology topo = build_topology(mesh);
    const double step = (hi - lo) / samples;
    for (int i = 0; i < samples; ++i) {
        const double offset = lo + step * i;
        const CrossSection cs = slice_mesh(mesh, topo, Plane{profile.axis * offset, profile.axis});
        double material = 0.0, largest = 0.0;
        for (std::size_t k = 0; k < cs.size(); ++k) {
            material += (cs.depth(k) % 2 == 0 ? 1.0 : -1.0) * cs.metrics[k].area;
            largest = std::max(largest, cs.metrics[k].area);
        }
        profile.offsets.push_back(offset);
        profile.areas.push_back(std::max(0.0, material));
        profile.loop_counts.push_back(cs.size());
        profile.largest_loop_areas.push_back(largest);
    }
    return profile;
}

}  // namespace slicetrain
