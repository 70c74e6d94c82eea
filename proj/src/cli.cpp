#include <algorithm>
#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>

#include <CLI11.hpp>

#include "format.hpp"
#include "slicetrain/assessment.hpp"
#include "slicetrain/cli.hpp"
#include "slicetrain/errors.hpp"
#include "slicetrain/session_log.hpp"
#include "slicetrain/shapes.hpp"
#include "slicetrain/task_engine.hpp"

namespace slicetrain {

namespace {

using detail::fmt_double;
namespace fs = std::filesystem;

struct Options {
    std::string shape;
    double m1 = 0.0, m2 = 0.0, r1 = 0.0, r2 = 0.0;
    std::string axis = "y";
    int samples = 512;
    std::uint64_t seed = 0;
    bool seed_given = false;
    std::string svg, obj, csv, out, log;
};

void write_file(CommandResult& result, const std::string& path, const std::string& text) {
    const fs::path p(path);
    if (p.has_parent_path()) {
        std::error_code ec;
        fs::create_directories(p.parent_path(), ec);
    }
    std::ofstream f(p, std::ios::binary);
    f << text;
    f.close();
    if (!f) throw IoError("cannot write " + path);
    result.artifacts.push_back(path);
}

std::string read_file(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw IoError("cannot open " + path);
    std::ostringstream s;
    s << f.rdbuf();
    return s.str();
}

LabeledMesh load_shape(const Options& o) {
    if (const auto id = parse_shape_id(o.shape)) {
        ShapeSpec spec = default_spec(*id);
        if (o.seed_given) spec.seed = o.seed;
        return make_shape(spec);
    }
    return make_named_shape(o.shape);
}

std::string vec_text(const Vec3& v) { return fmt_double(v.x) + " " + fmt_double(v.y) + " " + fmt_double(v.z); }

std::string join(const std::set<std::string>& parts) {
    std::string s;
    for (const auto& p : parts) s += (s.empty() ? "" : ",") + p;
    return s;
}

void cmd_shape(const Options& o, CommandResult& r, std::ostream& out) {
    const LabeledMesh mesh = load_shape(o);
    validate_mesh(mesh);
    out << "shape " << o.shape << "\n";
    out << "vertices " << mesh.vertices.size() << "\n";
    out << "triangles " << mesh.triangles.size() << "\n";
    out << "euler_characteristic " << euler_characteristic(mesh) << "\n";
    out << "surface_area " << fmt_double(surface_area(mesh)) << "\n";
    out << "bbox_min " << vec_text(bbox_min(mesh)) << "\n";
    out << "bbox_max " << vec_text(bbox_max(mesh)) << "\n";
    if (!o.obj.empty()) {
        std::ostringstream s;
        write_obj(s, mesh);
        write_file(r, o.obj, s.str());
    }
    r.summary = o.shape + ": " + std::to_string(mesh.triangles.size()) + " triangles, watertight";
}

void cmd_slice(const Options& o, CommandResult& r, std::ostream& out) {
    const LabeledMesh mesh = load_shape(o);
    const Plane plane = plane_pose(PlaneState{o.m1, o.m2, o.r1, o.r2}.clamped(), bbox_center(mesh));
    const CrossSection cs = slice_mesh(mesh, plane);
    out << "plane origin " << vec_text(plane.origin) << " normal " << vec_text(plane.normal) << "\n";
    out << "loops " << cs.size() << "\n";
    for (std::size_t i = 0; i < cs.size(); ++i) {
        const LoopMetrics& m = cs.metrics[i];
        out << "loop " << i << " area=" << fmt_double(m.area) << " perimeter=" << fmt_double(m.perimeter)
            << " axis_ratio=" << fmt_double(m.axis_ratio) << " shape=" << to_string(classify_loop(m))
            << " depth=" << cs.depth(i) << " parent=" << cs.parent[i] << " parts=" << join(cs.parts[i]) << "\n";
    }
    if (!o.svg.empty()) write_file(r, o.svg, cross_section_svg(cs, plane));
    r.summary = std::to_string(cs.size()) + " loop(s)";
}

void cmd_sweep(const Options& o, CommandResult& r, std::ostream& out) {
    const LabeledMesh mesh = load_shape(o);
    const Vec3 axis = o.axis == "x" ? Vec3{1.0, 0.0, 0.0} : o.axis == "y" ? Vec3{0.0, 1.0, 0.0} : Vec3{0.0, 0.0, 1.0};
    const SweepProfile p = sweep_areas(mesh, axis, o.samples);
    std::string csv = "offset,area,loop_count\n";
    for (std::size_t i = 0; i < p.offsets.size(); ++i) {
        csv += fmt_double(p.offsets[i]) + "," + fmt_double(p.areas[i]) + "," + std::to_string(p.loop_counts[i]) + "\n";
    }
    const auto best = std::max_element(p.areas.begin(), p.areas.end()) - p.areas.begin();
    if (!o.csv.empty()) {
        write_file(r, o.csv, csv);
    } else {
        out << csv;
    }
    r.summary = std::to_string(p.offsets.size()) + " samples; max area " + fmt_double(p.areas[best]) + " at offset " +
                fmt_double(p.offsets[best]);
}

void cmd_validate(const Options& o, CommandResult& r, std::ostream& out) {
    const auto catalog = TaskCatalog::build();
    const TrainingSession session = record_solution_session(catalog);
    int total = 0;
    bool all = true;
    for (std::size_t i = 0; i < session.scores().size(); ++i) {
        const ScoreRecord& rec = session.scores()[i];
        const bool ok = rec.points == kPointsPerTask && evaluate_goal(*catalog, session.final_states()[i]).satisfied;
        all = all && ok;
        total += rec.points;
        out << rec.task_id << (ok ? " satisfied" : " NOT satisfied") << "\n";
    }

    // The hole task's answer must look through the hole before turning the plane.
    const Script& s = solution_script(*catalog, "L3T1");
    const auto is_view = [](const ScriptStep& st) {
        return st.event.kind == ControlKind::view_left || st.event.kind == ControlKind::view_right;
    };
    const auto is_rotate = [](const ScriptStep& st) {
        return st.event.kind == ControlKind::set_r1 || st.event.kind == ControlKind::set_r2;
    };
    const auto first_view = std::find_if(s.begin(), s.end(), is_view);
    const auto first_rotate = std::find_if(s.begin(), s.end(), is_rotate);
    const bool view_first = first_view != s.end() && first_view < first_rotate;
    out << "L3T1 script " << (view_first ? "changes the view before rotating the plane"
                                         : "does NOT change the view before rotating the plane")
        << "\n";
    if (!o.log.empty()) write_file(r, o.log, session.log().to_ndjson());
    r.summary = "total " + std::to_string(total);
    if (!all || !view_first) {
        r.exit_code = 1;
        r.summary = "SolutionCheckFailed: " + r.summary;
    }
}

void cmd_replay(const Options& o, CommandResult& r, std::ostream& out) {
    std::istringstream in(read_file(o.log));
    const SessionLog log = SessionLog::read_ndjson(in);
    const ReplayResult result = replay(TaskCatalog::build(), log);
    const std::string csv = summary_csv(result.summary);
    out << csv;
    if (!o.csv.empty()) write_file(r, o.csv, csv);
    if (!o.out.empty()) write_file(r, o.out, result.snapshot());
    r.summary = "replayed " + std::to_string(log.size()) + " events; total " + std::to_string(result.summary.total_score);
}

void cmd_gen_items(const Options& o, CommandResult& r, std::ostream& out) {
    BankConfig config;
    config.seed = o.seed_given ? o.seed : 1;
    const ShapeLibrary lib(config.shapes);
    const auto bank = generate_bank(lib, config);
    for (const auto& item : bank) {
        const ItemCheck check = verify_item(lib, item);
        if (!check.sound) throw DistinctnessUnreachable(check.problems.front());
    }
    for (const auto& p : export_bank(lib, bank, config, o.out)) r.artifacts.push_back(p.string());
    out << "items " << bank.size() << " (category1 " << config.category1 << ", category2 " << config.category2
        << ", category3 " << config.category3 << ", controls " << config.controls << ")\n";
    r.summary = "wrote " + std::to_string(bank.size()) + " items to " + o.out;
}

void cmd_bundle(const Options& o, CommandResult& r, std::ostream& out) {
    const auto catalog = TaskCatalog::build();
    const fs::path dir(o.out);
    for (const auto& spec : shape_catalog()) {
        std::ostringstream s;
        write_obj(s, catalog->mesh(spec.shape_id));
        write_file(r, (dir / "meshes" / (std::string(to_string(spec.shape_id)) + ".obj")).string(), s.str());
    }
    write_file(r, (dir / "bundle.json").string(), catalog->bundle_json().dump(2) + "\n");
    out << "bundle_hash " << catalog->bundle_hash() << "\n";
    r.summary = "bundle with " + std::to_string(catalog->tasks().size()) + " tasks written to " + o.out;
}

}  // namespace

CommandResult run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CommandResult result;
    Options o;
    CLI::App app{"Cross-section training core", "slicetrain"};
    app.require_subcommand(1);

    std::vector<std::string> shape_names = named_shapes();
    auto add_shape = [&](CLI::App* sub) {
        sub->add_option("--shape", o.shape, "Shape name")->required()->check(CLI::IsMember(shape_names));
    };
    auto add_seed = [&](CLI::App* sub) {
        sub->add_option_function<std::uint64_t>(
            "--seed", [&](const std::uint64_t& s) { o.seed = s, o.seed_given = true; }, "Random seed");
    };
    auto add_pose = [&](CLI::App* sub) {
        sub->add_option("--m1", o.m1, "Plane move along Y");
        sub->add_option("--m2", o.m2, "Plane move along X");
        sub->add_option("--r1", o.r1, "Plane rotation about X (degrees)");
        sub->add_option("--r2", o.r2, "Plane rotation about Z (degrees)");
    };

    auto* shape = app.add_subcommand("shape", "Export a shape as OBJ and print mesh statistics");
    add_shape(shape);
    add_seed(shape);
    shape->add_option("--obj", o.obj, "OBJ output path");

    auto* slice = app.add_subcommand("slice", "Slice a shape and report loop metrics");
    add_shape(slice);
    add_seed(slice);
    add_pose(slice);
    slice->add_option("--svg", o.svg, "SVG output path");

    auto* sweep = app.add_subcommand("sweep", "Cross-section area profile along an axis");
    add_shape(sweep);
    add_seed(sweep);
    sweep->add_option("--axis", o.axis, "Sweep axis")->check(CLI::IsMember({"x", "y", "z"}));
    sweep->add_option("--samples", o.samples, "Number of samples")->check(CLI::PositiveNumber);
    sweep->add_option("--csv", o.csv, "CSV output path (stdout when omitted)");

    auto* validate = app.add_subcommand("validate-solutions", "Play every solution script and check its goal");
    validate->add_option("--log", o.log, "Write the session log here");

    auto* replay_cmd = app.add_subcommand("replay", "Replay a session log and print the usage summary");
    replay_cmd->add_option("--log", o.log, "Session log (NDJSON)")->required();
    replay_cmd->add_option("--csv", o.csv, "Also write the summary CSV here");
    replay_cmd->add_option("--out", o.out, "Write final task states here");

    auto* items = app.add_subcommand("gen-items", "Generate the assessment item bank");
    items->add_option("--out", o.out, "Output directory")->required();
    add_seed(items);

    auto* bundle = app.add_subcommand("bundle", "Write the task bundle and meshes for the UI");
    bundle->add_option("--out", o.out, "Output directory")->required();

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::CallForHelp& e) {
        result.exit_code = app.exit(e, out, err);
        return result;
    } catch (const CLI::CallForAllHelp& e) {
        result.exit_code = app.exit(e, out, err);
        return result;
    } catch (const CLI::ParseError& e) {
        app.exit(e, out, err);
        result.exit_code = 2;
        return result;
    }

    const std::map<CLI::App*, std::function<void(const Options&, CommandResult&, std::ostream&)>> handlers{
        {shape, cmd_shape},       {slice, cmd_slice},   {sweep, cmd_sweep},    {validate, cmd_validate},
        {replay_cmd, cmd_replay}, {items, cmd_gen_items}, {bundle, cmd_bundle},
    };
    try {
        for (const auto& [sub, handler] : handlers) {
            if (sub->parsed()) handler(o, result, out);
        }
    } catch (const Error& e) {
        err << e.what() << "\n";
        result.exit_code = 1;
        result.summary = e.name();
        return result;
    } catch (const fs::filesystem_error& e) {
        err << "IoError: " << e.what() << "\n";
        result.exit_code = 1;
        result.summary = "IoError";
        return result;
    }
    for (const auto& a : result.artifacts) out << "wrote " << a << "\n";
    (result.exit_code == 0 ? out : err) << result.summary << "\n";
    return result;
}

}  // namespace slicetrain
