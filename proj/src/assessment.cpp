#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <random>

#include "slicetrain/assessment.hpp"
#include "slicetrain/errors.hpp"
#include "slicetrain/shapes.hpp"

namespace slicetrain {

namespace {

// Distribution objects are implementation-defined, so draws are derived from
// the raw engine output to keep items identical across standard libraries.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
    double sign() { return (engine_() >> 63) ? 1.0 : -1.0; }
    std::size_t index(std::size_t n) { return static_cast<std::size_t>(uniform() * static_cast<double>(n)) % n; }

    template <typename T>
    void shuffle(std::vector<T>& v) {
        for (std::size_t i = v.size(); i > 1; --i) std::swap(v[i - 1], v[index(i)]);
    }

private:
    std::mt19937_64 engine_;
};

std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t k) {
    std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (k + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

double relative_diff(double a, double b) {
    const double m = std::max(std::abs(a), std::abs(b));
    return m == 0.0 ? 0.0 : std::abs(a - b) / m;
}

Vec3 rotate_about(const Vec3& v, const Vec3& axis, double angle) {
    return v * std::cos(angle) + axis.cross(v) * std::sin(angle) + axis * (axis.dot(v) * (1.0 - std::cos(angle)));
}

Plane rotate_plane(const Plane& p, Rng& rng) {
    const PlaneFrame f = make_frame(p);
    const double phi = rng.uniform(0.0, 2.0 * kPi);
    const Vec3 axis = (f.u * std::cos(phi) + f.v * std::sin(phi)).normalized();
    const double angle = rng.sign() * deg_to_rad(rng.uniform(20.0, 60.0));
    return {p.origin, rotate_about(p.normal, axis, angle).normalized()};
}

Plane translate_plane(const Plane& p, Rng& rng) {
    return {p.origin + p.normal * (rng.sign() * rng.uniform(0.2, 0.6)), p.normal};
}

struct Candidate {
    std::string shape_id;
    Plane plane;
};

// Same-shape plane perturbation, or (when allowed) the same relative plane on
// another library shape.
Candidate perturb(const ShapeLibrary& lib, const std::string& shape_id, const Plane& plane, Rng& rng,
                  bool allow_other_shape) {
    const double r = rng.uniform();
    if (allow_other_shape && r >= 0.8 && lib.names().size() > 1) {
        std::string other = shape_id;
        while (other == shape_id) other = lib.names()[rng.index(lib.names().size())];
        return {other, {plane.origin - lib.center(shape_id) + lib.center(other), plane.normal}};
    }
    if (r < 0.4) return {shape_id, rotate_plane(plane, rng)};
    return {shape_id, translate_plane(plane, rng)};
}

std::optional<ContourSignature> try_signature(const ShapeLibrary& lib, const std::string& shape, const Plane& p) {
    try {
        const CrossSection cs = lib.slice(shape, p);
        if (cs.empty()) return std::nullopt;
        return signature(cs);
    } catch (const Error&) {
        return std::nullopt;
    }
}

void require_options(int n_options) {
    if (n_options < 3) throw PreconditionViolation("an item needs at least 3 options, got " + std::to_string(n_options));
}

ContourSignature stimulus_signature(const ShapeLibrary& lib, const std::string& shape, const Plane& p) {
    const auto sig = try_signature(lib, shape, p);
    if (!sig) throw PreconditionViolation("stimulus plane does not cut " + shape);
    return *sig;
}

bool distinct_from_all(const std::vector<ItemOption>& options, const std::vector<ContourSignature>& sigs) {
    return std::all_of(options.begin(), options.end(), [&](const ItemOption& o) {
        return sequence_distance(o.signatures, sigs) >= kDistinctThreshold;
    });
}

// Shuffles the options and records where the keyed one landed.
void shuffle_options(TestItem& item, Rng& rng) {
    std::vector<std::size_t> order(item.options.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    rng.shuffle(order);
    const std::size_t key = item.correct;
    std::vector<ItemOption> shuffled;
    for (std::size_t i = 0; i < order.size(); ++i) {
        shuffled.push_back(item.options[order[i]]);
        if (order[i] == key) item.correct = i;
    }
    item.options = std::move(shuffled);
}

[[noreturn]] void unreachable(const TestItem& item, std::size_t slot) {
    throw DistinctnessUnreachable("category " + std::to_string(item.category) + " item on " + item.shape_id +
                                  ": no distinct distractor for slot " + std::to_string(slot) + " after " +
                                  std::to_string(kDistractorAttempts) + " attempts");
}

}  // namespace

ContourSignature signature(const CrossSection& cs) {
    ContourSignature s;
    s.loop_count = cs.size();
    double largest = -1.0;
    for (std::size_t i = 0; i < cs.size(); ++i) {
        const double a = cs.metrics[i].area;
        s.area += cs.depth(i) % 2 == 0 ? a : -a;
        if (a > largest) {
            largest = a;
            s.axis_ratio = cs.metrics[i].axis_ratio;
        }
    }
    return s;
}

double contour_distance(const ContourSignature& a, const ContourSignature& b) {
    if (a.loop_count != b.loop_count) return 1.0;
    return std::max(relative_diff(a.area, b.area), relative_diff(a.axis_ratio, b.axis_ratio));
}

double sequence_distance(const std::vector<ContourSignature>& a, const std::vector<ContourSignature>& b) {
    if (a.size() != b.size()) return 1.0;
    double d = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) d = std::max(d, contour_distance(a[i], b[i]));
    return d;
}

// --- library ------------------------------------------------------------------

ShapeLibrary::ShapeLibrary(std::vector<std::string> names) : names_(std::move(names)) {
    for (const auto& n : names_) {
        LabeledMesh m = make_named_shape(n);
        topologies_.emplace(n, build_topology(m));
        meshes_.emplace(n, std::move(m));
    }
}

ShapeLibrary::ShapeLibrary() : ShapeLibrary(named_shapes()) {}

const LabeledMesh& ShapeLibrary::mesh(const std::string& name) const {
    const auto it = meshes_.find(name);
    if (it == meshes_.end()) throw InvalidSpec("shape '" + name + "' is not in the library");
    return it->second;
}

const MeshTopology& ShapeLibrary::topology(const std::string& name) const {
    mesh(name);
    return topologies_.at(name);
}

Vec3 ShapeLibrary::center(const std::string& name) const { return bbox_center(mesh(name)); }

CrossSection ShapeLibrary::slice(const std::string& name, const Plane& plane) const {
    return slice_mesh(mesh(name), topology(name), plane);
}

// --- generators ---------------------------------------------------------------

TestItem gen_item_cat1(const ShapeLibrary& lib, const std::string& shape_id, const Plane& plane, int n_options,
                       std::uint64_t seed) {
    require_options(n_options);
    TestItem item;
    item.category = 1;
    item.shape_id = shape_id;
    item.stimulus_planes = {plane};
    item.seed = seed;
    const ContourSignature key = stimulus_signature(lib, shape_id, plane);
    item.options.push_back({{shape_id}, {plane}, {key}});

    Rng rng(seed);
    for (int slot = 1; slot < n_options; ++slot) {
        bool placed = false;
        for (int attempt = 0; attempt < kDistractorAttempts && !placed; ++attempt) {
            const Candidate c = perturb(lib, shape_id, plane, rng, true);
            const auto sig = try_signature(lib, c.shape_id, c.plane);
            if (!sig || !distinct_from_all(item.options, {*sig})) continue;
            item.options.push_back({{c.shape_id}, {c.plane}, {*sig}});
            placed = true;
        }
        if (!placed) unreachable(item, static_cast<std::size_t>(slot));
    }
    shuffle_options(item, rng);
    return item;
}

TestItem gen_item_cat2(const ShapeLibrary& lib, const std::string& shape_id, const Plane& target_plane,
                       int n_options, std::uint64_t seed) {
    require_options(n_options);
    TestItem item;
    item.category = 2;
    item.shape_id = shape_id;
    item.stimulus_planes = {target_plane};
    item.seed = seed;
    const ContourSignature key = stimulus_signature(lib, shape_id, target_plane);
    item.options.push_back({{shape_id}, {target_plane}, {key}});

    Rng rng(seed);
    for (int slot = 1; slot < n_options; ++slot) {
        bool placed = false;
        for (int attempt = 0; attempt < kDistractorAttempts && !placed; ++attempt) {
            const Candidate c = perturb(lib, shape_id, target_plane, rng, false);
            const auto sig = try_signature(lib, shape_id, c.plane);
            if (!sig || !distinct_from_all(item.options, {*sig})) continue;
            item.options.push_back({{shape_id}, {c.plane}, {*sig}});
            placed = true;
        }
        if (!placed) unreachable(item, static_cast<std::size_t>(slot));
    }
    shuffle_options(item, rng);
    return item;
}

TestItem gen_item_cat3(const ShapeLibrary& lib, const std::string& shape_id, const std::vector<Plane>& planes,
                       int n_options, std::uint64_t seed) {
    require_options(n_options);
    if (planes.size() < 3) throw PreconditionViolation("a slice sequence needs at least 3 planes");
    TestItem item;
    item.category = 3;
    item.shape_id = shape_id;
    item.stimulus_planes = planes;
    item.seed = seed;
    ItemOption key;
    for (const auto& p : planes) {
        key.shape_ids.push_back(shape_id);
        key.planes.push_back(p);
        key.signatures.push_back(stimulus_signature(lib, shape_id, p));
    }
    item.options.push_back(key);

    Rng rng(seed);
    for (int slot = 1; slot < n_options; ++slot) {
        bool placed = false;
        for (int attempt = 0; attempt < kDistractorAttempts && !placed; ++attempt) {
            ItemOption cand = key;
            if (attempt % 2 == 0) {
                std::vector<std::size_t> order(planes.size());
                for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
                rng.shuffle(order);
                for (std::size_t i = 0; i < order.size(); ++i) {
                    cand.planes[i] = key.planes[order[i]];
                    cand.signatures[i] = key.signatures[order[i]];
                }
            } else {
                const std::size_t pos = rng.index(planes.size());
                const Candidate c = perturb(lib, shape_id, planes[pos], rng, false);
                const auto sig = try_signature(lib, shape_id, c.plane);
                if (!sig) continue;
                cand.planes[pos] = c.plane;
                cand.signatures[pos] = *sig;
            }
            if (!distinct_from_all(item.options, cand.signatures)) continue;
            item.options.push_back(std::move(cand));
            placed = true;
        }
        if (!placed) unreachable(item, static_cast<std::size_t>(slot));
    }
    shuffle_options(item, rng);
    return item;
}

// --- verification -------------------------------------------------------------

ItemCheck verify_item(const ShapeLibrary& lib, const TestItem& item) {
    ItemCheck check;
    auto fail = [&](std::string why) {
        check.sound = false;
        check.problems.push_back(item.item_id + ": " + std::move(why));
    };
    if (item.options.size() < 3) fail("fewer than 3 options");
    if (item.correct >= item.options.size()) {
        fail("answer key out of range");
        return check;
    }

    std::vector<ContourSignature> stimulus;
    for (const auto& p : item.stimulus_planes) {
        const auto sig = try_signature(lib, item.shape_id, p);
        if (!sig) {
            fail("stimulus slice is empty");
            return check;
        }
        stimulus.push_back(*sig);
    }

    std::vector<std::vector<ContourSignature>> resliced;
    for (std::size_t i = 0; i < item.options.size(); ++i) {
        const ItemOption& o = item.options[i];
        if (o.planes.size() != o.shape_ids.size() || o.planes.size() != o.signatures.size()) {
            fail("option " + std::to_string(i) + " is inconsistent");
            return check;
        }
        std::vector<ContourSignature> sigs;
        for (std::size_t k = 0; k < o.planes.size(); ++k) {
            const auto sig = try_signature(lib, o.shape_ids[k], o.planes[k]);
            if (!sig) {
                fail("option " + std::to_string(i) + " slices to nothing");
                return check;
            }
            sigs.push_back(*sig);
        }
        if (sequence_distance(sigs, o.signatures) > 1e-9) fail("option " + std::to_string(i) + " has a stale signature");
        const double d = sequence_distance(sigs, stimulus);
        if (i == item.correct && d > kMatchTolerance) fail("keyed option does not match the stimulus");
        if (i != item.correct && d < kDistinctThreshold) fail("option " + std::to_string(i) + " is too close to the key");
        resliced.push_back(std::move(sigs));
    }
    for (std::size_t i = 0; i < resliced.size(); ++i) {
        for (std::size_t j = i + 1; j < resliced.size(); ++j) {
            if (sequence_distance(resliced[i], resliced[j]) < kDistinctThreshold) {
                fail("options " + std::to_string(i) + " and " + std::to_string(j) + " are not distinct");
            }
        }
    }
    return check;
}

// --- bank ---------------------------------------------------------------------

namespace {

std::pair<double, double> extent_along(const LabeledMesh& mesh, const Vec3& n) {
    double lo = mesh.vertices.front().dot(n), hi = lo;
    for (const auto& v : mesh.vertices) {
        lo = std::min(lo, v.dot(n));
        hi = std::max(hi, v.dot(n));
    }
    return {lo, hi};
}

Vec3 random_normal(Rng& rng) {
    static const Vec3 axes[3] = {{1.0, 0.0, 0.0}, {0.0, 1.0, 0.0}, {0.0, 0.0, 1.0}};
    const Vec3 base = axes[rng.index(3)];
    const PlaneFrame f = make_frame({{}, base});
    const double phi = rng.uniform(0.0, 2.0 * kPi);
    const Vec3 axis = (f.u * std::cos(phi) + f.v * std::sin(phi)).normalized();
    return rotate_about(base, axis, deg_to_rad(rng.uniform(0.0, 40.0))).normalized();
}

Plane plane_at(const LabeledMesh& mesh, const Vec3& n, double fraction) {
    const auto [lo, hi] = extent_along(mesh, n);
    return {n * (lo + (hi - lo) * fraction), n};
}

std::string item_id(int category, int index) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "c%d-%02d", category, index + 1);
    return buf;
}

}  // namespace

std::vector<TestItem> generate_bank(const ShapeLibrary& lib, const BankConfig& config) {
    constexpr int kStimulusAttempts = 32;
    require_options(config.n_options);
    if (config.shapes.empty()) throw PreconditionViolation("bank needs at least one shape");
    std::vector<TestItem> bank;
    std::uint64_t stream = 0;
    const int counts[3] = {config.category1, config.category2, config.category3};
    for (int category = 1; category <= 3; ++category) {
        for (int index = 0; index < counts[category - 1]; ++index) {
            bool made = false;
            for (int attempt = 0; attempt < kStimulusAttempts && !made; ++attempt) {
                const std::uint64_t seed = mix_seed(config.seed, stream++);
                Rng rng(seed);
                const std::string& shape = config.shapes[rng.index(config.shapes.size())];
                const LabeledMesh& mesh = lib.mesh(shape);
                const Vec3 n = random_normal(rng);
                try {
                    TestItem item;
                    if (category == 3) {
                        std::vector<Plane> planes;
                        for (double f : {0.2, 0.4, 0.6, 0.8}) planes.push_back(plane_at(mesh, n, f + rng.uniform(-0.05, 0.05)));
                        item = gen_item_cat3(lib, shape, planes, config.n_options, seed);
                    } else {
                        const Plane p = plane_at(mesh, n, rng.uniform(0.3, 0.7));
                        item = category == 1 ? gen_item_cat1(lib, shape, p, config.n_options, seed)
                                             : gen_item_cat2(lib, shape, p, config.n_options, seed);
                    }
                    item.item_id = item_id(category, index);
                    if (!verify_item(lib, item).sound) continue;
                    bank.push_back(std::move(item));
                    made = true;
                } catch (const DistinctnessUnreachable&) {
                } catch (const PreconditionViolation&) {
                }
            }
            if (!made) {
                throw DistinctnessUnreachable("could not build item " + item_id(category, index) + " after " +
                                              std::to_string(kStimulusAttempts) + " stimulus draws");
            }
        }
    }

    // Consistency checks: repeat items spread across the bank with their
    // options in a different order.
    Rng rng(mix_seed(config.seed, stream++));
    const std::size_t originals = bank.size();
    for (int k = 0; k < config.controls && originals > 0; ++k) {
        const std::size_t source = (static_cast<std::size_t>(k) * originals) / static_cast<std::size_t>(config.controls);
        TestItem dup = bank[source];
        dup.control_of = dup.item_id;
        dup.item_id += "-ctl";
        const std::size_t before = dup.correct;
        for (int tries = 0; tries < 8 && dup.correct == before; ++tries) shuffle_options(dup, rng);
        bank.push_back(std::move(dup));
    }
    return bank;
}

// --- serialization ------------------------------------------------------------

nlohmann::json to_json(const Plane& plane) {
    return {{"origin", {plane.origin.x, plane.origin.y, plane.origin.z}},
            {"normal", {plane.normal.x, plane.normal.y, plane.normal.z}}};
}

nlohmann::json to_json(const ContourSignature& sig) {
    return {{"loop_count", sig.loop_count}, {"area", sig.area}, {"axis_ratio", sig.axis_ratio}};
}

namespace {

std::vector<std::string> option_svg_names(const TestItem& item, std::size_t option) {
    std::vector<std::string> names;
    if (item.category == 2) return names;
    const std::size_t n = item.options[option].planes.size();
    for (std::size_t k = 0; k < n; ++k) {
        std::string name = item.item_id + "/option_" + std::to_string(option);
        if (item.category == 3) name += "_" + std::to_string(k);
        names.push_back(name + ".svg");
    }
    return names;
}

}  // namespace

nlohmann::json to_json(const TestItem& item) {
    nlohmann::json stim = nlohmann::json::array();
    for (const auto& p : item.stimulus_planes) stim.push_back(to_json(p));
    nlohmann::json options = nlohmann::json::array();
    for (std::size_t i = 0; i < item.options.size(); ++i) {
        const ItemOption& o = item.options[i];
        nlohmann::json planes = nlohmann::json::array(), sigs = nlohmann::json::array();
        for (const auto& p : o.planes) planes.push_back(to_json(p));
        for (const auto& s : o.signatures) sigs.push_back(to_json(s));
        options.push_back(
            {{"shape_ids", o.shape_ids}, {"planes", planes}, {"signatures", sigs}, {"svgs", option_svg_names(item, i)}});
    }
    nlohmann::json j{{"item_id", item.item_id},     {"category", item.category},
                     {"shape_id", item.shape_id},   {"stimulus_planes", stim},
                     {"options", options},          {"correct", item.correct},
                     {"seed", item.seed}};
    if (item.category == 2) j["stimulus_svg"] = item.item_id + "/stimulus.svg";
    if (!item.control_of.empty()) j["control_of"] = item.control_of;
    return j;
}

nlohmann::json bank_manifest(const std::vector<TestItem>& items, const BankConfig& config) {
    nlohmann::json list = nlohmann::json::array();
    for (const auto& it : items) list.push_back(to_json(it));
    return {{"schema_version", 1},
            {"seed", config.seed},
            {"n_options", config.n_options},
            {"counts",
             {{"category1", config.category1},
              {"category2", config.category2},
              {"category3", config.category3},
              {"controls", config.controls}}},
            {"distinct_threshold", kDistinctThreshold},
            {"match_tolerance", kMatchTolerance},
            {"items", list}};
}

std::vector<std::filesystem::path> export_bank(const ShapeLibrary& lib, const std::vector<TestItem>& items,
                                               const BankConfig& config, const std::filesystem::path& dir) {
    std::vector<std::filesystem::path> written;
    auto write = [&](const std::filesystem::path& path, const std::string& text) {
        std::filesystem::create_directories(path.parent_path());
        std::ofstream out(path, std::ios::binary);
        out << text;
        if (!out) throw IoError("cannot write " + path.string());
        written.push_back(path);
    };
    for (const auto& item : items) {
        if (item.category == 2) {
            const Plane& p = item.stimulus_planes.front();
            write(dir / (item.item_id + "/stimulus.svg"), cross_section_svg(lib.slice(item.shape_id, p), p));
        }
        for (std::size_t i = 0; i < item.options.size(); ++i) {
            const auto names = option_svg_names(item, i);
            const ItemOption& o = item.options[i];
            for (std::size_t k = 0; k < names.size(); ++k) {
                write(dir / names[k], cross_section_svg(lib.slice(o.shape_ids[k], o.planes[k]), o.planes[k]));
            }
        }
    }
    write(dir / "manifest.json", bank_manifest(items, config).dump(2) + "\n");
    return written;
}

}  // namespace slicetrain
