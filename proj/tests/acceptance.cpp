// Acceptance suite: one PASS/FAIL line per criterion, each under a wall-clock
// budget. Usage: slicetrain_acceptance <path-to-slicetrain-cli> [criterion]

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <random>
#include <sstream>
#include <string>
#include <sys/wait.h>
#include <vector>

#include "slicetrain/assessment.hpp"
#include "slicetrain/errors.hpp"
#include "slicetrain/session_log.hpp"
#include "slicetrain/shapes.hpp"
#include "slicetrain/task_engine.hpp"

using namespace slicetrain;
namespace fs = std::filesystem;

namespace {

// Collects failed checks; an empty list means the criterion passed.
class Checks {
public:
    void expect(bool ok, const std::string& what) {
        ++count_;
        if (!ok) failures_.push_back(what);
    }
    const std::vector<std::string>& failures() const { return failures_; }
    int count() const { return count_; }

private:
    std::vector<std::string> failures_;
    int count_ = 0;
};

std::string fmt(double v) {
    std::ostringstream s;
    s.precision(6);
    s << v;
    return s.str();
}

bool within(double value, double expected, double rel) { return std::abs(value - expected) <= rel * std::abs(expected); }

struct Shell {
    int exit_code = -1;
    std::string out;
};

std::string quote(const std::string& s) {
    std::string q = "'";
    for (char c : s) q += c == '\'' ? std::string("'\\''") : std::string(1, c);
    return q + "'";
}

Shell shell(const std::string& cli, const std::vector<std::string>& args) {
    std::string cmd = quote(cli);
    for (const auto& a : args) cmd += " " + quote(a);
    cmd += " 2>&1";
    Shell r;
    FILE* pipe = popen(cmd.c_str(), "r");
    if (!pipe) return r;
    char buf[4096];
    for (std::size_t n; (n = std::fread(buf, 1, sizeof buf, pipe)) > 0;) r.out.append(buf, n);
    const int status = pclose(pipe);
    r.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    return r;
}

std::string read_file(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

// --- criteria -------------------------------------------------------------------

void task_structure(Checks& c, const std::string&) {
    const auto catalog = TaskCatalog::build();
    std::set<int> levels, difficulties;
    for (const auto& t : catalog->tasks()) {
        levels.insert(t.level);
        difficulties.insert(t.difficulty);
    }
    c.expect(catalog->tasks().size() == 6, "6 tasks");
    c.expect(levels == std::set<int>{1, 2, 3}, "levels 1-3");
    c.expect(difficulties == std::set<int>{1, 2, 3, 4, 5, 6}, "difficulties 1-6");
    const std::map<std::string, std::string> prompts{
        {"L1T1", "Move the plane so that it creates a cross-section for the skinniest/ thinnest part of the given 3D shape"},
        {"L1T2", "Move the plane so that it creates a cross-section for the fattest/thickest part of the given 3D shape"},
        {"L1T3", "Adjust the plane to change the cross-section shape from a circle to an oval"},
        {"L2T1", "Adjust the plane so that it creates a cross-section that cuts across both branches but not the stem."},
        {"L2T2",
         "Adjust the plane to create a single, oval-ish cross-section that crosses both one branch and the trunk."},
        {"L3T1",
         "Adjust the plane so that the hole in the object creates a circular cross section (surrounded by an oval-ish "
         "cross section for the outside of the shape). Place the plane through the fattest part of the shape."},
    };
    for (const auto& [id, prompt] : prompts) c.expect(catalog->spec(id).prompt == prompt, id + " prompt verbatim");

    // Play the scripts, completing each task, and total the points.
    int total = 0;
    TaskState state = load_task(*catalog, task_order().front());
    while (true) {
        for (const auto& step : solution_script(*catalog, state.task_id)) {
            state = apply_control(catalog->spec(state.task_id), state, step.event);
        }
        total += complete_task(*catalog, state).points;
        if (!catalog->successor(state.task_id)) break;
        state = next_task(*catalog, state);
    }
    c.expect(total == 600, "scripted total " + std::to_string(total) + " == 600");
}

void analytic_slices(Checks& c, const std::string&) {
    const LabeledMesh sphere = make_uv_sphere(1.0, 128, 128);
    const CrossSection eq = slice_mesh(sphere, {{0, 0, 0}, {0, 1, 0}});
    c.expect(eq.size() == 1 && within(eq.metrics[0].area, kPi, 0.01),
             "sphere equator area " + fmt(eq.size() ? eq.metrics[0].area : 0) + " ~ pi");
    const CrossSection half = slice_mesh(sphere, {{0, 0.5, 0}, {0, 1, 0}});
    c.expect(half.size() == 1 && within(half.metrics[0].area, 0.75 * kPi, 0.01),
             "sphere h=0.5 area " + fmt(half.size() ? half.metrics[0].area : 0) + " ~ 0.75 pi");

    const LabeledMesh cylinder = make_cylinder(1.0, 1.0, 128, 8);
    const double tilt = 30.0 * kPi / 180.0;
    const CrossSection oblique = slice_mesh(cylinder, {{0, 0, 0}, {0, std::cos(tilt), std::sin(tilt)}});
    c.expect(oblique.size() == 1 && within(oblique.metrics[0].axis_ratio, 1.1547, 0.01),
             "cylinder 30 deg axis_ratio " + fmt(oblique.size() ? oblique.metrics[0].axis_ratio : 0) + " ~ 1.1547");

    const LabeledMesh torus = make_torus(1.0, 0.4, 128, 128);
    const CrossSection ring = slice_mesh(torus, {{0, 0, 0}, {1, 0, 0}});
    const bool nested = ring.size() == 2 && ((ring.parent[0] == kRoot && ring.parent[1] == 0) ||
                                             (ring.parent[1] == kRoot && ring.parent[0] == 1));
    c.expect(nested, "torus x=0 gives 2 nested loops");
    if (nested) {
        std::vector<double> radii{std::sqrt(ring.metrics[0].area / kPi), std::sqrt(ring.metrics[1].area / kPi)};
        std::sort(radii.begin(), radii.end());
        c.expect(within(radii[0], 0.6, 0.01), "torus inner radius " + fmt(radii[0]) + " ~ 0.6");
        c.expect(within(radii[1], 1.4, 0.01), "torus outer radius " + fmt(radii[1]) + " ~ 1.4");
    }
}

void topology(Checks& c, const std::string&) {
    const LabeledMesh y = make_shape(default_spec(ShapeId::y_branch));
    for (double h : {-0.8, -0.5, -0.2}) {
        c.expect(slice_mesh(y, {{0, h, 0}, {0, 1, 0}}).size() == 1, "y_branch 1 loop at y=" + fmt(h));
    }
    for (double h : {0.2, 0.5, 0.8}) {
        const CrossSection cs = slice_mesh(y, {{0, h, 0}, {0, 1, 0}});
        c.expect(cs.size() == 2 && cs.parent[0] == kRoot && cs.parent[1] == kRoot,
                 "y_branch 2 non-nested loops at y=" + fmt(h));
    }

    const LabeledMesh potato = make_shape(default_spec(ShapeId::potato_hole));
    const CrossSection cs = slice_mesh(potato, {bbox_center(potato), {1, 0, 0}});
    bool ok = cs.size() == 2;
    if (ok) {
        const std::size_t inner = cs.parent[0] == kRoot ? 1 : 0;
        ok = cs.parent[inner] == static_cast<int>(1 - inner) && cs.parent[1 - inner] == kRoot;
        for (const auto& p : cs.parts[inner]) ok = ok && p == "hole_surface";
    }
    c.expect(ok, "potato_hole through-hole slice: 2 nested loops, inner on hole_surface only");

    const std::map<ShapeId, long> genus{{ShapeId::hourglass, 0},
                                        {ShapeId::taper, 0},
                                        {ShapeId::y_branch, 0},
                                        {ShapeId::potato_hole, 1},
                                        {ShapeId::tutorial_capsule, 0}};
    for (const auto& spec : shape_catalog()) {
        const LabeledMesh mesh = make_shape(spec);
        bool watertight = true;
        try {
            validate_mesh(mesh);
        } catch (const Error&) {
            watertight = false;
        }
        const long g = (2 - euler_characteristic(mesh)) / 2;
        c.expect(watertight, std::string(to_string(spec.shape_id)) + " watertight");
        c.expect(genus.count(spec.shape_id) && g == genus.at(spec.shape_id),
                 std::string(to_string(spec.shape_id)) + " genus " + std::to_string(g));
    }
}

void clip_conservation(Checks& c, const std::string&) {
    std::mt19937_64 rng(20240611);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    double worst = 0.0;
    for (const auto& name : named_shapes()) {
        const LabeledMesh mesh = make_named_shape(name);
        const Vec3 center = bbox_center(mesh);
        const double total = surface_area(mesh);
        for (int trial = 0; trial < 10; ++trial) {
            Vec3 n{u(rng), u(rng), u(rng)};
            while (n.norm() < 1e-3) n = {u(rng), u(rng), u(rng)};
            const Plane plane{center + Vec3{0.5 * u(rng), 0.5 * u(rng), 0.5 * u(rng)}, n.normalized()};
            const CutawayMesh pos = clip_and_cap(mesh, plane, Side::positive);
            const CutawayMesh neg = clip_and_cap(mesh, plane, Side::negative);
            double cap = 0.0;
            for (std::size_t t = 0; t < pos.mesh.triangles.size(); ++t) {
                if (pos.is_cap[t]) cap += triangle_area(pos.mesh, t);
            }
            const double rel = std::abs(surface_area(pos.mesh) + surface_area(neg.mesh) - 2.0 * cap - total) / total;
            worst = std::max(worst, rel);
            c.expect(rel <= 1e-6, name + " trial " + std::to_string(trial) + " residual " + fmt(rel));
            for (const CutawayMesh* half : {&pos, &neg}) {
                bool closed = true;
                try {
                    if (!half->mesh.triangles.empty()) validate_mesh(half->mesh);
                } catch (const Error&) {
                    closed = false;
                }
                c.expect(closed, name + " trial " + std::to_string(trial) + " half watertight");
            }
        }
    }
    std::cout << "      worst relative residual " << fmt(worst) << "\n";
}

void oracle_agreement(Checks& c, const std::string&) {
    const auto catalog = TaskCatalog::build();
    for (const char* id : {"L1T1", "L1T2"}) {
        const TaskSpec& spec = catalog->spec(id);
        const LabeledMesh& mesh = catalog->mesh(spec.shape);
        const Vec3 center = catalog->shape_center(spec.shape);
        const SweepProfile sweep = sweep_areas(mesh, {0, 1, 0}, 512);
        const bool skinny = spec.goal.kind == GoalKind::skinniest;
        // Oracle: single-loop samples within 5% of the single-loop extremum.
        double extremum = skinny ? INFINITY : 0.0;
        for (std::size_t i = 0; i < sweep.areas.size(); ++i) {
            if (sweep.loop_counts[i] != 1) continue;
            extremum = skinny ? std::min(extremum, sweep.areas[i]) : std::max(extremum, sweep.areas[i]);
        }
        int disagree = 0, inside = 0;
        for (std::size_t i = 0; i < sweep.offsets.size(); ++i) {
            const bool oracle = sweep.loop_counts[i] == 1 &&
                                (skinny ? sweep.areas[i] <= 1.05 * extremum : sweep.areas[i] >= 0.95 * extremum);
            TaskState state = load_task(*catalog, id);
            state = apply_control(spec, state, {ControlKind::set_m1, sweep.offsets[i] - center.y});
            const bool engine = evaluate_goal(*catalog, state).satisfied;
            inside += oracle ? 1 : 0;
            if (oracle != engine) ++disagree;
        }
        c.expect(disagree == 0, std::string(id) + ": " + std::to_string(disagree) + " of 512 samples disagree");
        c.expect(inside > 0 && inside < 512, std::string(id) + ": band is a proper subset (" + std::to_string(inside) + ")");
        std::cout << "      " << id << " band samples " << inside << ", disagreements " << disagree << "\n";
    }
}

void solutions(Checks& c, const std::string& cli) {
    const Shell r = shell(cli, {"validate-solutions"});
    c.expect(r.exit_code == 0, "validate-solutions exit " + std::to_string(r.exit_code));
    for (const char* id : {"L1T1", "L1T2", "L1T3", "L2T1", "L2T2", "L3T1"}) {
        c.expect(r.out.find(std::string(id) + " satisfied") != std::string::npos, std::string(id) + " satisfied");
    }
    c.expect(r.out.find("total 600") != std::string::npos, "total 600");

    const auto catalog = TaskCatalog::build();
    const Script& script = solution_script(*catalog, "L3T1");
    long first_view = -1, first_rotate = -1;
    for (std::size_t i = 0; i < script.size(); ++i) {
        const ControlKind k = script[i].event.kind;
        const bool view = k == ControlKind::view_left || k == ControlKind::view_right || k == ControlKind::view_up ||
                          k == ControlKind::view_down;
        const bool rotate = k == ControlKind::set_r1 || k == ControlKind::set_r2;
        if (view && first_view < 0) first_view = static_cast<long>(i);
        if (rotate && first_rotate < 0) first_rotate = static_cast<long>(i);
    }
    c.expect(first_view >= 0 && first_rotate >= 0 && first_view < first_rotate,
             "L3T1 view rotation (event " + std::to_string(first_view) + ") before plane rotation (event " +
                 std::to_string(first_rotate) + ")");
}

void replay_determinism(Checks& c, const std::string& cli) {
    const fs::path dir = fs::temp_directory_path() / "slicetrain_acceptance_replay";
    fs::remove_all(dir);
    fs::create_directories(dir);
    const fs::path log = dir / "session.ndjson";
    c.expect(shell(cli, {"validate-solutions", "--log", log.string()}).exit_code == 0, "record session");

    std::vector<std::string> states, csvs, outs;
    for (int run = 0; run < 3; ++run) {
        const fs::path s = dir / ("states" + std::to_string(run) + ".json");
        const fs::path csv = dir / ("summary" + std::to_string(run) + ".csv");
        const Shell r = shell(cli, {"replay", "--log", log.string(), "--out", s.string(), "--csv", csv.string()});
        c.expect(r.exit_code == 0, "replay run " + std::to_string(run) + " exit " + std::to_string(r.exit_code));
        states.push_back(read_file(s));
        csvs.push_back(read_file(csv));
        std::string summary = r.out;
        // Drop the "wrote <path>" lines; they name per-run files.
        std::istringstream in(r.out);
        summary.clear();
        for (std::string line; std::getline(in, line);) {
            if (line.rfind("wrote ", 0) != 0) summary += line + "\n";
        }
        outs.push_back(summary);
    }
    c.expect(!states[0].empty() && states[0] == states[1] && states[1] == states[2], "final snapshots bit-identical");
    c.expect(csvs[0] == csvs[1] && csvs[1] == csvs[2], "summary CSV bit-identical");
    c.expect(outs[0] == outs[1] && outs[1] == outs[2], "printed summary identical");

    const std::string header =
        "Score,Help,Move Plane,Rotate Plane,Change View Up/down,Change View Left/right,Show Answer,Check Cross-section";
    c.expect(csvs[0].rfind(header + "\n", 0) == 0, "summary columns match the usage features");
    const std::string row = csvs[0].substr(std::min(csvs[0].size(), header.size() + 1));
    c.expect(row.rfind("600,", 0) == 0, "total score 600 in summary row");

    // Library path: the same log replayed in-process three times.
    const auto catalog = TaskCatalog::build();
    std::ifstream in(log);
    const SessionLog parsed = SessionLog::read_ndjson(in);
    std::string first;
    for (int run = 0; run < 3; ++run) {
        const ReplayResult r = replay(catalog, parsed);
        const std::string snap = r.snapshot() + summary_csv(r.summary);
        if (run == 0) first = snap;
        c.expect(snap == first, "in-process replay " + std::to_string(run) + " identical");
        c.expect(r.summary.total_score == 600, "in-process total 600");
        c.expect(summary_csv(r.summary) == csvs[0], "in-process summary equals CLI summary");
    }
    fs::remove_all(dir);
}

void assessment_soundness(Checks& c, const std::string& cli) {
    const ShapeLibrary lib;
    BankConfig config;
    const auto bank = generate_bank(lib, config);
    int cat[4] = {0, 0, 0, 0};
    int unsound = 0;
    for (const auto& item : bank) {
        if (item.control_of.empty()) ++cat[item.category];
        const ItemCheck check = verify_item(lib, item);
        if (!check.sound) {
            ++unsound;
            c.expect(false, item.item_id + ": " + (check.problems.empty() ? "unsound" : check.problems.front()));
        }
    }
    c.expect(cat[1] == 12 && cat[2] == 6 && cat[3] == 4,
             "bank counts " + std::to_string(cat[1]) + "/" + std::to_string(cat[2]) + "/" + std::to_string(cat[3]));
    c.expect(unsound == 0, std::to_string(unsound) + " unsound items");
    c.expect(bank_manifest(bank, config).dump() == bank_manifest(generate_bank(lib, config), config).dump(),
             "seeded determinism in-process");

    const fs::path dir = fs::temp_directory_path() / "slicetrain_acceptance_items";
    fs::remove_all(dir);
    const Shell a = shell(cli, {"gen-items", "--out", (dir / "a").string(), "--seed", "1"});
    const Shell b = shell(cli, {"gen-items", "--out", (dir / "b").string(), "--seed", "1"});
    c.expect(a.exit_code == 0 && b.exit_code == 0, "gen-items exit codes");
    const std::string ma = read_file(dir / "a" / "manifest.json");
    c.expect(!ma.empty() && ma == read_file(dir / "b" / "manifest.json"), "gen-items manifests byte-identical");
    fs::remove_all(dir);
}

struct Criterion {
    const char* name;
    double budget_seconds;
    std::function<void(Checks&, const std::string&)> run;
};

}  // namespace

int main(int argc, char** argv) {
    if (argc < 2 || argc > 3) {
        std::cerr << "usage: slicetrain_acceptance <slicetrain-cli> [criterion]\n";
        return 2;
    }
    const std::string cli = argv[1];
    const std::string only = argc == 3 ? argv[2] : "";
    const std::vector<Criterion> criteria{
        {"task_structure", 1.0, task_structure},
        {"analytic_slices", 5.0, analytic_slices},
        {"topology", 10.0, topology},
        {"clip_conservation", 30.0, clip_conservation},
        {"goal_oracle_agreement", 30.0, oracle_agreement},
        {"solution_self_satisfaction", 10.0, solutions},
        {"replay_determinism", 5.0, replay_determinism},
        {"assessment_soundness", 60.0, assessment_soundness},
    };
    int failed = 0, ran = 0;
    for (const auto& criterion : criteria) {
        if (!only.empty() && only != criterion.name) continue;
        ++ran;
        Checks checks;
        const auto start = std::chrono::steady_clock::now();
        try {
            criterion.run(checks, cli);
        } catch (const std::exception& e) {
            checks.expect(false, std::string("exception: ") + e.what());
        }
        const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        const bool in_time = seconds < criterion.budget_seconds;
        const bool pass = checks.failures().empty() && in_time;
        failed += pass ? 0 : 1;
        std::cout << (pass ? "PASS " : "FAIL ") << criterion.name << " (" << checks.count() << " checks, " << fmt(seconds)
                  << " s of " << fmt(criterion.budget_seconds) << " s)\n";
        for (const auto& f : checks.failures()) std::cout << "      failed: " << f << "\n";
        if (!in_time) std::cout << "      failed: over time budget\n";
        std::cout.flush();
    }
    if (ran == 0) {
        std::cerr << "unknown criterion " << only << "\n";
        return 2;
    }
    std::cout << (failed == 0 ? "ALL PASS" : std::to_string(failed) + " criteria FAILED") << "\n";
    return failed == 0 ? 0 : 1;
}
