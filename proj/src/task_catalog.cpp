#include <algorithm>
#include <array>
#include <cstdint>
#include <cstdio>

#include "slicetrain/errors.hpp"
#include "slicetrain/task_engine.hpp"

namespace slicetrain {

namespace {

constexpr int kBundleSchemaVersion = 1;
constexpr int kSweepSamples = 512;

// Solution poses found by a slider-space search; the task tests re-verify
// each against its goal.
constexpr double kL1T3Tilt = 38.0;
constexpr double kL2T1Height = 0.45;
constexpr double kL2T2Rotate = -35.0;
constexpr double kL2T2Shift = -0.15;
constexpr double kL2T2Height = 0.0;
constexpr double kL3T1Rotate = -73.0;
constexpr double kL3T1Tilt = 0.0;
constexpr double kL3T1Shift = 0.025;

constexpr std::array<const char*, 13> kControlNames{
    "set_m1",    "set_m2",    "set_r1",      "set_r2",        "view_left",   "view_right", "view_up",
    "view_down", "toggle_cross_section", "help_request", "complete_task", "show_answer", "next_task"};

const char* to_string(HintCondKind kind) {
    switch (kind) {
        case HintCondKind::slider_above: return "slider_above";
        case HintCondKind::slider_below: return "slider_below";
        case HintCondKind::abs_slider_above: return "abs_slider_above";
        case HintCondKind::tilt_below: return "tilt_below";
        case HintCondKind::azimuth_near: return "azimuth_near";
        case HintCondKind::loop_count_equals: return "loop_count_equals";
        case HintCondKind::loop_count_not: return "loop_count_not";
        case HintCondKind::section_hidden: return "section_hidden";
    }
    return "?";
}

HintCondition slider_cond(HintCondKind kind, const char* slider, double a) { return {kind, slider, a, 0.0}; }
HintCondition count_cond(HintCondKind kind, std::size_t n) { return {kind, "", static_cast<double>(n), 0.0}; }
HintCondition tilt_below(double deg) { return {HintCondKind::tilt_below, "", deg, 0.0}; }
HintCondition azimuth_near(double center, double half_width) {
    return {HintCondKind::azimuth_near, "", center, half_width};
}

ScriptStep step(ControlKind kind, double value = 0.0) { return {{kind, value}, 800}; }

ControlMask move_only() {
    ControlMask m;
    m.move_sliders = true;
    return m;
}

ControlMask rotate_only() {
    ControlMask m;
    m.rotate_sliders = true;
    return m;
}

ControlMask all_sliders() {
    ControlMask m;
    m.move_sliders = true;
    m.rotate_sliders = true;
    return m;
}

const HintRule kShowSectionRule{{{HintCondKind::section_hidden, "", 0.0, 0.0}},
                                "Turn on the cross-section view to see the shape the plane makes."};

std::uint64_t fnv1a64(const std::string& text) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : text) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

}  // namespace

const char* to_string(ControlKind kind) { return kControlNames[static_cast<std::size_t>(kind)]; }

std::optional<ControlKind> parse_control_kind(std::string_view name) {
    for (std::size_t i = 0; i < kControlNames.size(); ++i) {
        if (name == kControlNames[i]) return static_cast<ControlKind>(i);
    }
    return std::nullopt;
}

bool is_slider(ControlKind kind) {
    return kind == ControlKind::set_m1 || kind == ControlKind::set_m2 || kind == ControlKind::set_r1 ||
           kind == ControlKind::set_r2;
}

const char* to_string(GoalKind kind) {
    switch (kind) {
        case GoalKind::skinniest: return "skinniest";
        case GoalKind::fattest: return "fattest";
        case GoalKind::circle_to_oval: return "circle_to_oval";
        case GoalKind::branches_only: return "branches_only";
        case GoalKind::branch_and_trunk_oval: return "branch_and_trunk_oval";
        case GoalKind::hole_circular: return "hole_circular";
        case GoalKind::any_section: return "any_section";
    }
    return "?";
}

std::shared_ptr<const TaskCatalog> TaskCatalog::build() {
    std::shared_ptr<TaskCatalog> cat(new TaskCatalog());
    for (const auto& spec : shape_catalog()) {
        LabeledMesh mesh = make_shape(spec);
        cat->topologies_.emplace(spec.shape_id, build_topology(mesh));
        cat->meshes_.emplace(spec.shape_id, std::move(mesh));
    }
    const Vec3 y_axis{0.0, 1.0, 0.0};
    const Vec3 x_axis{1.0, 0.0, 0.0};

    // Hourglass waist: smallest single-loop area along Y.
    TaskSpec l1t1;
    {
        const SweepProfile sweep = sweep_areas(cat->mesh(ShapeId::hourglass), y_axis, kSweepSamples);
        std::size_t best = 0;
        double best_area = 0.0;
        for (std::size_t i = 0; i < sweep.offsets.size(); ++i) {
            if (sweep.loop_counts[i] != 1) continue;
            if (best_area == 0.0 || sweep.areas[i] < best_area) {
                best = i;
                best_area = sweep.areas[i];
            }
        }
        const double c = cat->shape_center(ShapeId::hourglass).y;
        l1t1.task_id = "L1T1";
        l1t1.level = 1;
        l1t1.difficulty = 1;
        l1t1.shape = ShapeId::hourglass;
        l1t1.title = "Skinniest part";
        l1t1.prompt =
            "Move the plane so that it creates a cross-section for the skinniest/ thinnest part of the given 3D "
            "shape";
        l1t1.initial_plane = {0.6, 0.0, 0.0, 0.0};
        l1t1.initial_camera = {0.0, 0.0, 4.0};
        l1t1.controls = move_only();
        l1t1.goal = {GoalKind::skinniest, best_area, 1.05, 1.20, {}};
        l1t1.help_rules = {
            {{slider_cond(HintCondKind::abs_slider_above, "m1", 0.1)}, "move the plane to the middle of the hourglass"},
            {{count_cond(HintCondKind::loop_count_not, 1)}, "Keep the plane inside the hourglass."},
            kShowSectionRule,
        };
        l1t1.fallback_hint = "Nudge the plane up and down in small steps and watch the cross-section shrink.";
        l1t1.solution = {step(ControlKind::toggle_cross_section), step(ControlKind::set_m1, sweep.offsets[best] - c)};
    }

    // Tapered column: largest single-loop area along Y.
    TaskSpec l1t2;
    {
        const SweepProfile sweep = sweep_areas(cat->mesh(ShapeId::taper), y_axis, kSweepSamples);
        double best_area = 0.0;
        for (std::size_t i = 0; i < sweep.offsets.size(); ++i) {
            if (sweep.loop_counts[i] == 1) best_area = std::max(best_area, sweep.areas[i]);
        }
        const double band = 0.95;
        std::vector<std::size_t> ok;
        for (std::size_t i = 0; i < sweep.offsets.size(); ++i) {
            if (sweep.loop_counts[i] == 1 && sweep.areas[i] >= band * best_area) ok.push_back(i);
        }
        const double c = cat->shape_center(ShapeId::taper).y;
        l1t2.task_id = "L1T2";
        l1t2.level = 1;
        l1t2.difficulty = 2;
        l1t2.shape = ShapeId::taper;
        l1t2.title = "Fattest part";
        l1t2.prompt =
            "Move the plane so that it creates a cross-section for the fattest/thickest part of the given 3D shape";
        l1t2.initial_plane = {0.5, 0.0, 0.0, 0.0};
        l1t2.initial_camera = {30.0, 20.0, 4.0};
        l1t2.controls = move_only();
        l1t2.goal = {GoalKind::fattest, best_area, band, 1.20, {}};
        l1t2.help_rules = {
            {{count_cond(HintCondKind::loop_count_equals, 0)}, "The plane has left the shape; move it back inside."},
            {{slider_cond(HintCondKind::slider_above, "m1", -0.6)},
             "The shape gets wider toward the bottom; move the plane down."},
            kShowSectionRule,
        };
        l1t2.fallback_hint = "Move the plane a little lower, close to the base.";
        l1t2.solution = {step(ControlKind::toggle_cross_section),
                         step(ControlKind::set_m1, sweep.offsets[ok[ok.size() / 2]] - c)};
    }

    TaskSpec l1t3;
    l1t3.task_id = "L1T3";
    l1t3.level = 1;
    l1t3.difficulty = 3;
    l1t3.shape = ShapeId::hourglass;
    l1t3.title = "Circle to oval";
    l1t3.prompt = "Adjust the plane to change the cross-section shape from a circle to an oval";
    l1t3.initial_plane = {0.0, 0.0, 0.0, 0.0};
    l1t3.initial_camera = {0.0, 0.0, 4.0};
    l1t3.controls = rotate_only();
    l1t3.goal = {GoalKind::circle_to_oval, 0.0, 1.0, 1.20, {}};
    l1t3.help_rules = {
        {{tilt_below(10.0)}, "Tilt the plane: a slanted cut through a round body stretches the circle into an oval."},
        {{count_cond(HintCondKind::loop_count_not, 1)}, "Tilt less, so the plane still cuts one closed section."},
        kShowSectionRule,
    };
    l1t3.fallback_hint = "Keep tilting the plane a little further.";
    l1t3.solution = {step(ControlKind::toggle_cross_section), step(ControlKind::set_r1, kL1T3Tilt)};

    TaskSpec l2t1;
    l2t1.task_id = "L2T1";
    l2t1.level = 2;
    l2t1.difficulty = 4;
    l2t1.shape = ShapeId::y_branch;
    l2t1.title = "Both branches";
    l2t1.prompt =
        "Adjust the plane so that it creates a cross-section that cuts across both branches but not the stem.";
    l2t1.initial_plane = {-0.5, 0.0, 0.0, 0.0};
    l2t1.initial_camera = {30.0, 20.0, 4.0};
    l2t1.controls = move_only();
    l2t1.goal = {GoalKind::branches_only, 0.0, 1.0, 1.20, {}};
    l2t1.help_rules = {
        {{count_cond(HintCondKind::loop_count_equals, 1)},
         "The plane only cuts the stem; move it up past the point where the branches split."},
        {{count_cond(HintCondKind::loop_count_equals, 0)}, "The plane has left the shape; move it back down."},
        kShowSectionRule,
    };
    l2t1.fallback_hint = "Look for a height where the plane passes through each branch once.";
    l2t1.solution = {step(ControlKind::toggle_cross_section), step(ControlKind::set_m1, kL2T1Height)};

    TaskSpec l2t2;
    l2t2.task_id = "L2T2";
    l2t2.level = 2;
    l2t2.difficulty = 5;
    l2t2.shape = ShapeId::y_branch;
    l2t2.title = "Branch and trunk";
    l2t2.prompt =
        "Adjust the plane to create a single, oval-ish cross-section that crosses both one branch and the trunk.";
    l2t2.initial_plane = {-0.5, 0.0, 0.0, 0.0};
    l2t2.initial_camera = {0.0, 0.0, 4.0};
    l2t2.controls = all_sliders();
    l2t2.goal = {GoalKind::branch_and_trunk_oval, 0.0, 1.0, 1.20, {}};
    l2t2.help_rules = {
        {{tilt_below(10.0)}, "A level cut only crosses one part; tilt the plane so it follows a branch into the trunk."},
        {{count_cond(HintCondKind::loop_count_equals, 2)},
         "The plane cuts two separate pieces; rotate it so one branch and the trunk join into one section."},
        kShowSectionRule,
    };
    l2t2.fallback_hint = "Line the plane up with one branch and slide it down until it reaches the trunk.";
    l2t2.solution = {step(ControlKind::toggle_cross_section), step(ControlKind::set_r2, kL2T2Rotate),
                     step(ControlKind::set_m2, kL2T2Shift), step(ControlKind::set_m1, kL2T2Height)};

    TaskSpec l3t1;
    {
        const SweepProfile sweep = sweep_areas(cat->mesh(ShapeId::potato_hole), x_axis, kSweepSamples);
        const double best = *std::max_element(sweep.largest_loop_areas.begin(), sweep.largest_loop_areas.end());
        l3t1.task_id = "L3T1";
        l3t1.level = 3;
        l3t1.difficulty = 6;
        l3t1.shape = ShapeId::potato_hole;
        l3t1.title = "Through the hole";
        l3t1.prompt =
            "Adjust the plane so that the hole in the object creates a circular cross section (surrounded by an "
            "oval-ish cross section for the outside of the shape). Place the plane through the fattest part of "
            "the shape.";
        l3t1.initial_plane = {0.0, 0.0, 0.0, 0.0};
        l3t1.initial_camera = {0.0, 10.0, 4.0};
        l3t1.controls = all_sliders();
        l3t1.goal = {GoalKind::hole_circular, best, 0.90, 1.20, {}};
        l3t1.help_rules = {
            {{azimuth_near(0.0, 30.0)}, "Rotate the view left or right until you can look through the hole."},
            {{count_cond(HintCondKind::loop_count_not, 2)},
             "Turn the plane so it faces straight down the hole; the cut should show a ring."},
            kShowSectionRule,
        };
        l3t1.fallback_hint = "Keep the plane square to the hole and slide it to where the object is thickest.";
        l3t1.solution = {step(ControlKind::toggle_cross_section)};
        for (int i = 0; i < 6; ++i) l3t1.solution.push_back(step(ControlKind::view_left));
        l3t1.solution.push_back(step(ControlKind::set_r2, kL3T1Rotate));
        l3t1.solution.push_back(step(ControlKind::set_r1, kL3T1Tilt));
        l3t1.solution.push_back(step(ControlKind::set_m2, kL3T1Shift));
    }

    cat->tasks_ = {l1t1, l1t2, l1t3, l2t1, l2t2, l3t1};

    TaskSpec& tut = cat->tutorial_;
    tut.task_id = "TUT";
    tut.level = 0;
    tut.difficulty = 0;
    tut.shape = ShapeId::tutorial_capsule;
    tut.title = "Tutorial";
    tut.prompt = "Move the plane through the capsule and turn on the cross-section to see where it cuts.";
    tut.initial_plane = {0.8, 0.0, 0.0, 0.0};
    tut.initial_camera = {30.0, 20.0, 4.0};
    tut.controls = all_sliders();
    tut.goal = {GoalKind::any_section, 0.0, 1.0, 1.20, {}};
    tut.help_rules = {kShowSectionRule};
    tut.fallback_hint = "Drag a slider to move the plane.";
    tut.solution = {step(ControlKind::toggle_cross_section), step(ControlKind::set_m1, 0.0)};
    return cat;
}

const TaskSpec& TaskCatalog::spec(std::string_view task_id) const {
    for (const auto& t : tasks_) {
        if (t.task_id == task_id) return t;
    }
    if (tutorial_.task_id == task_id) return tutorial_;
    throw UnknownTask("unknown task id '" + std::string(task_id) + "'");
}

const LabeledMesh& TaskCatalog::mesh(ShapeId shape) const { return meshes_.at(shape); }

const MeshTopology& TaskCatalog::topology(ShapeId shape) const { return topologies_.at(shape); }

Vec3 TaskCatalog::shape_center(ShapeId shape) const { return bbox_center(mesh(shape)); }

std::optional<std::string> TaskCatalog::successor(std::string_view task_id) const {
    if (task_id == tutorial_.task_id) return tasks_.front().task_id;
    for (std::size_t i = 0; i < tasks_.size(); ++i) {
        if (tasks_[i].task_id != task_id) continue;
        if (i + 1 < tasks_.size()) return tasks_[i + 1].task_id;
        return std::nullopt;
    }
    throw UnknownTask("unknown task id '" + std::string(task_id) + "'");
}

nlohmann::json TaskCatalog::bundle_json() const {
    nlohmann::json j;
    j["schema_version"] = kBundleSchemaVersion;
    j["shapes"] = catalog_json();
    j["tutorial"] = to_json(tutorial_);
    j["tasks"] = nlohmann::json::array();
    for (const auto& t : tasks_) j["tasks"].push_back(to_json(t));
    j["points_per_task"] = kPointsPerTask;
    j["confirmation_hint"] = kConfirmationHint;
    return j;
}

std::string TaskCatalog::bundle_hash() const {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(fnv1a64(bundle_json().dump())));
    return buf;
}

// --- serialization ------------------------------------------------------------

nlohmann::json to_json(const PlaneState& p) { return {{"m1", p.m1}, {"m2", p.m2}, {"r1", p.r1}, {"r2", p.r2}}; }

nlohmann::json to_json(const CameraState& c) {
    return {{"azimuth", c.azimuth}, {"elevation", c.elevation}, {"distance", c.distance}};
}

nlohmann::json to_json(const ControlMask& m) {
    return {{"move_sliders", m.move_sliders},
            {"rotate_sliders", m.rotate_sliders},
            {"view_left_right", m.view_left_right},
            {"view_up_down", m.view_up_down},
            {"cross_section_toggle", m.cross_section_toggle}};
}

nlohmann::json to_json(const ControlEvent& e) {
    nlohmann::json j{{"kind", to_string(e.kind)}};
    if (is_slider(e.kind)) j["value"] = e.value;
    return j;
}

nlohmann::json to_json(const TaskState& s) {
    return {{"task_id", s.task_id},
            {"plane", to_json(s.plane)},
            {"camera", to_json(s.camera)},
            {"cross_section_visible", s.cross_section_visible},
            {"mode", s.mode == Mode::play ? "play" : "solution"},
            {"completed", s.completed},
            {"elapsed", s.elapsed}};
}

nlohmann::json to_json(const TaskSpec& s) {
    nlohmann::json rules = nlohmann::json::array();
    for (const auto& r : s.help_rules) {
        nlohmann::json when = nlohmann::json::array();
        for (const auto& c : r.when) {
            nlohmann::json cj{{"kind", to_string(c.kind)}, {"a", c.a}, {"b", c.b}};
            if (!c.slider.empty()) cj["slider"] = c.slider;
            when.push_back(cj);
        }
        rules.push_back({{"when", when}, {"text", r.text}});
    }
    nlohmann::json script = nlohmann::json::array();
    for (const auto& st : s.solution) script.push_back({{"event", to_json(st.event)}, {"dwell_ms", st.dwell_ms}});
    return {{"task_id", s.task_id},
            {"level", s.level},
            {"difficulty", s.difficulty},
            {"shape", to_string(s.shape)},
            {"mesh", std::string("meshes/") + to_string(s.shape) + ".obj"},
            {"title", s.title},
            {"prompt", s.prompt},
            {"initial_plane", to_json(s.initial_plane)},
            {"initial_camera", to_json(s.initial_camera)},
            {"controls", to_json(s.controls)},
            {"goal",
             {{"kind", to_string(s.goal.kind)},
              {"reference_area", s.goal.reference_area},
              {"band", s.goal.band},
              {"inner_max_axis_ratio", s.goal.inner_max_axis_ratio},
              {"circle_max", s.goal.thresholds.circle_max},
              {"oval_min", s.goal.thresholds.oval_min}}},
            {"help_rules", rules},
            {"fallback_hint", s.fallback_hint},
            {"solution", script}};
}

nlohmann::json to_json(const GoalResult& g) {
    nlohmann::json loops = nlohmann::json::array();
    for (std::size_t i = 0; i < g.loop_count; ++i) {
        loops.push_back({{"area", g.areas[i]},
                         {"axis_ratio", g.axis_ratios[i]},
                         {"parts", g.parts[i]},
                         {"depth", g.depths[i]}});
    }
    return {{"satisfied", g.satisfied}, {"loop_count", g.loop_count}, {"loops", loops}};
}

TaskState task_state_from_json(const nlohmann::json& j) {
    try {
        TaskState s;
        s.task_id = j.at("task_id").get<std::string>();
        const auto& p = j.at("plane");
        s.plane = {p.at("m1").get<double>(), p.at("m2").get<double>(), p.at("r1").get<double>(),
                   p.at("r2").get<double>()};
        const auto& c = j.at("camera");
        s.camera = {c.at("azimuth").get<double>(), c.at("elevation").get<double>(), c.at("distance").get<double>()};
        s.cross_section_visible = j.at("cross_section_visible").get<bool>();
        const std::string mode = j.at("mode").get<std::string>();
        if (mode != "play" && mode != "solution") throw MalformedLog("unknown mode '" + mode + "'");
        s.mode = mode == "play" ? Mode::play : Mode::solution;
        s.completed = j.at("completed").get<bool>();
        s.elapsed = j.at("elapsed").get<double>();
        return s;
    } catch (const nlohmann::json::exception& e) {
        throw MalformedLog(std::string("bad task state: ") + e.what());
    }
}

ControlEvent control_event_from_json(const nlohmann::json& j) {
    try {
        const std::string name = j.at("kind").get<std::string>();
        const auto kind = parse_control_kind(name);
        if (!kind) throw MalformedLog("unknown control kind '" + name + "'");
        ControlEvent e{*kind, 0.0};
        if (is_slider(*kind)) e.value = j.at("value").get<double>();
        return e;
    } catch (const nlohmann::json::exception& e) {
        throw MalformedLog(std::string("bad control event: ") + e.what());
    }
}

}  // namespace slicetrain
