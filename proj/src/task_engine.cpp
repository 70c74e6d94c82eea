#include <algorithm>
#include <cmath>

#include "slicetrain/errors.hpp"
#include "slicetrain/task_engine.hpp"

namespace slicetrain {

PlaneState PlaneState::clamped() const {
    return {std::clamp(m1, -kMoveLimit, kMoveLimit), std::clamp(m2, -kMoveLimit, kMoveLimit),
            std::clamp(r1, -kRotateLimit, kRotateLimit), std::clamp(r2, -kRotateLimit, kRotateLimit)};
}

Plane plane_pose(const PlaneState& state, const Vec3& shape_center) {
    const double a = deg_to_rad(state.r1);
    const double b = deg_to_rad(state.r2);
    // Rx(a) * (0, 1, 0) = (0, cos a, sin a), then Rz(b).
    const double ny = std::cos(a);
    const Vec3 normal{-ny * std::sin(b), ny * std::cos(b), std::sin(a)};
    const Vec3 origin = shape_center + Vec3{state.m2, state.m1, 0.0};
    return {origin, normal};
}

Vec3 camera_eye(const CameraState& camera, const Vec3& target) {
    const double az = deg_to_rad(camera.azimuth);
    const double el = deg_to_rad(camera.elevation);
    return target + Vec3{std::sin(az) * std::cos(el), std::sin(el), std::cos(az) * std::cos(el)} * camera.distance;
}

Vec3 camera_view_direction(const CameraState& camera) {
    return (-camera_eye(camera)).normalized();
}

namespace {

double wrap_degrees(double deg) {
    double w = std::fmod(deg, 360.0);
    if (w < 0.0) w += 360.0;
    if (w >= 360.0) w -= 360.0;
    return w;
}

bool permitted(const ControlMask& mask, Mode mode, ControlKind kind) {
    if (mode == Mode::solution) return kind == ControlKind::show_answer || kind == ControlKind::next_task;
    switch (kind) {
        case ControlKind::set_m1:
        case ControlKind::set_m2: return mask.move_sliders;
        case ControlKind::set_r1:
        case ControlKind::set_r2: return mask.rotate_sliders;
        case ControlKind::view_left:
        case ControlKind::view_right: return mask.view_left_right;
        case ControlKind::view_up:
        case ControlKind::view_down: return mask.view_up_down;
        case ControlKind::toggle_cross_section: return mask.cross_section_toggle;
        case ControlKind::help_request:
        case ControlKind::complete_task: return true;
        case ControlKind::show_answer:
        case ControlKind::next_task: return false;
    }
    return false;
}

double slider_value(const PlaneState& p, const std::string& name) {
    if (name == "m1") return p.m1;
    if (name == "m2") return p.m2;
    if (name == "r1") return p.r1;
    if (name == "r2") return p.r2;
    return 0.0;
}

double angular_distance(double a, double b) {
    const double d = wrap_degrees(a - b);
    return std::min(d, 360.0 - d);
}

}  // namespace

TaskState load_task(const TaskCatalog& catalog, std::string_view task_id) {
    const TaskSpec& spec = catalog.spec(task_id);
    TaskState s;
    s.task_id = spec.task_id;
    s.plane = spec.initial_plane.clamped();
    s.camera = spec.initial_camera;
    s.camera.azimuth = wrap_degrees(s.camera.azimuth);
    s.cross_section_visible = false;
    s.mode = Mode::play;
    s.completed = false;
    s.elapsed = 0.0;
    return s;
}

TaskState apply_control(const TaskSpec& spec, TaskState state, const ControlEvent& event) {
    if (!permitted(spec.controls, state.mode, event.kind)) {
        throw ControlNotAvailable(std::string(to_string(event.kind)) + " is not available in task " + spec.task_id +
                                  (state.mode == Mode::solution ? " (solution mode)" : ""));
    }
    const double step = CameraState::kStepDeg;
    switch (event.kind) {
        case ControlKind::set_m1: state.plane.m1 = event.value; break;
        case ControlKind::set_m2: state.plane.m2 = event.value; break;
        case ControlKind::set_r1: state.plane.r1 = event.value; break;
        case ControlKind::set_r2: state.plane.r2 = event.value; break;
        case ControlKind::view_left: state.camera.azimuth = wrap_degrees(state.camera.azimuth + step); break;
        case ControlKind::view_right: state.camera.azimuth = wrap_degrees(state.camera.azimuth - step); break;
        case ControlKind::view_up:
            state.camera.elevation = std::min(state.camera.elevation + step, CameraState::kElevationLimit);
            break;
        case ControlKind::view_down:
            state.camera.elevation = std::max(state.camera.elevation - step, -CameraState::kElevationLimit);
            break;
        case ControlKind::toggle_cross_section: state.cross_section_visible = !state.cross_section_visible; break;
        case ControlKind::help_request:
        case ControlKind::complete_task:
        case ControlKind::show_answer:
        case ControlKind::next_task: break;
    }
    state.plane = state.plane.clamped();
    return state;
}

CrossSection current_section(const TaskCatalog& catalog, const TaskState& state) {
    const TaskSpec& spec = catalog.spec(state.task_id);
    return slice_mesh(catalog.mesh(spec.shape), catalog.topology(spec.shape),
                      plane_pose(state.plane, catalog.shape_center(spec.shape)));
}

namespace {

GoalResult judge(const GoalSpec& goal, const CrossSection& cs) {
    GoalResult r;
    r.loop_count = cs.size();
    for (std::size_t i = 0; i < cs.size(); ++i) {
        r.areas.push_back(cs.metrics[i].area);
        r.axis_ratios.push_back(cs.metrics[i].axis_ratio);
        r.parts.push_back(cs.parts[i]);
        r.depths.push_back(cs.depth(i));
    }

    const std::size_t n = cs.size();
    auto is_oval = [&](std::size_t i) { return classify_loop(cs.metrics[i], goal.thresholds) == LoopShape::oval; };
    switch (goal.kind) {
        case GoalKind::skinniest:
            r.satisfied = n == 1 && cs.metrics[0].area <= goal.band * goal.reference_area;
            break;
        case GoalKind::fattest:
            r.satisfied = n == 1 && cs.metrics[0].area >= goal.band * goal.reference_area;
            break;
        case GoalKind::circle_to_oval:
            r.satisfied = n == 1 && is_oval(0);
            break;
        case GoalKind::branches_only: {
            if (n != 2 || cs.parent[0] != kRoot || cs.parent[1] != kRoot) break;
            const std::set<std::string> left{"branch_left"}, right{"branch_right"};
            r.satisfied = (cs.parts[0] == left && cs.parts[1] == right) ||
                          (cs.parts[0] == right && cs.parts[1] == left);
            break;
        }
        case GoalKind::branch_and_trunk_oval: {
            if (n != 1) break;
            const auto& p = cs.parts[0];
            const bool stem = p.count("stem") == 1;
            const int branches = static_cast<int>(p.count("branch_left") + p.count("branch_right"));
            r.satisfied = stem && branches == 1 && is_oval(0);
            break;
        }
        case GoalKind::hole_circular: {
            if (n != 2) break;
            const std::size_t inner = cs.parent[0] == 1 ? 0 : 1;
            const std::size_t outer = 1 - inner;
            if (cs.parent[inner] != static_cast<int>(outer) || cs.parent[outer] != kRoot) break;
            const bool hole_only =
                std::all_of(cs.parts[inner].begin(), cs.parts[inner].end(),
                            [](const std::string& s) { return s == "hole_surface"; });
            r.satisfied = hole_only && cs.metrics[inner].axis_ratio <= goal.inner_max_axis_ratio &&
                          cs.metrics[outer].area >= goal.band * goal.reference_area;
            break;
        }
        case GoalKind::any_section:
            r.satisfied = n >= 1;
            break;
    }
    return r;
}

bool condition_holds(const HintCondition& c, const TaskState& s, std::size_t loops) {
    switch (c.kind) {
        case HintCondKind::slider_above: return slider_value(s.plane, c.slider) > c.a;
        case HintCondKind::slider_below: return slider_value(s.plane, c.slider) < c.a;
        case HintCondKind::abs_slider_above: return std::abs(slider_value(s.plane, c.slider)) > c.a;
        case HintCondKind::tilt_below: return std::max(std::abs(s.plane.r1), std::abs(s.plane.r2)) < c.a;
        case HintCondKind::azimuth_near: return angular_distance(s.camera.azimuth, c.a) <= c.b;
        case HintCondKind::loop_count_equals: return loops == static_cast<std::size_t>(c.a);
        case HintCondKind::loop_count_not: return loops != static_cast<std::size_t>(c.a);
        case HintCondKind::section_hidden: return !s.cross_section_visible;
    }
    return false;
}

}  // namespace

GoalResult evaluate_goal(const TaskSpec& spec, const TaskState& state, const LabeledMesh& mesh) {
    const CrossSection cs = slice_mesh(mesh, plane_pose(state.plane, bbox_center(mesh)));
    return judge(spec.goal, cs);
}

GoalResult evaluate_goal(const TaskCatalog& catalog, const TaskState& state) {
    return judge(catalog.spec(state.task_id).goal, current_section(catalog, state));
}

namespace {

std::string hint_for(const TaskSpec& spec, const TaskState& state, const CrossSection& cs) {
    if (judge(spec.goal, cs).satisfied) return kConfirmationHint;
    for (const auto& rule : spec.help_rules) {
        const bool all = std::all_of(rule.when.begin(), rule.when.end(),
                                     [&](const HintCondition& c) { return condition_holds(c, state, cs.size()); });
        if (all) return rule.text;
    }
    return spec.fallback_hint;
}

}  // namespace

std::string hint(const TaskSpec& spec, const TaskState& state, const LabeledMesh& mesh) {
    return hint_for(spec, state, slice_mesh(mesh, plane_pose(state.plane, bbox_center(mesh))));
}

std::string hint(const TaskCatalog& catalog, const TaskState& state) {
    return hint_for(catalog.spec(state.task_id), state, current_section(catalog, state));
}

ScoreRecord complete_task(const TaskCatalog& catalog, TaskState& state) {
    if (state.mode != Mode::play) throw InvalidMode("task " + state.task_id + " is already complete");
    const TaskSpec& spec = catalog.spec(state.task_id);
    const Plane plane = plane_pose(state.plane, catalog.shape_center(spec.shape));
    const CrossSection cs = slice_mesh(catalog.mesh(spec.shape), catalog.topology(spec.shape), plane);
    const GoalResult result = judge(spec.goal, cs);

    state.mode = Mode::solution;
    state.completed = true;

    ScoreRecord rec;
    rec.task_id = state.task_id;
    rec.points = result.satisfied ? kPointsPerTask : 0;
    rec.elapsed = state.elapsed;
    rec.snapshot_json = to_json(state).dump();
    rec.snapshot_svg = cross_section_svg(cs, plane);
    return rec;
}

const Script& solution_script(const TaskCatalog& catalog, std::string_view task_id) {
    return catalog.spec(task_id).solution;
}

TaskState run_script(const TaskCatalog& catalog, std::string_view task_id) {
    const TaskSpec& spec = catalog.spec(task_id);
    TaskState state = load_task(catalog, task_id);
    for (const auto& step : spec.solution) state = apply_control(spec, state, step.event);
    return state;
}

TaskState next_task(const TaskCatalog& catalog, const TaskState& state) {
    if (state.mode != Mode::solution) throw InvalidMode("next_task is only available on the solution page");
    const auto next = catalog.successor(state.task_id);
    if (!next) throw SessionComplete("no task after " + state.task_id);
    return load_task(catalog, *next);
}

}  // namespace slicetrain
