#pragma once

// Training tasks: slider-space plane pose, constrained camera, goal
// predicates, state-dependent help, solution scripts and scoring.

#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "slicetrain/geometry.hpp"
#include "slicetrain/shapes.hpp"

namespace slicetrain {

// --- plane & camera -----------------------------------------------------------

struct PlaneState {
    double m1 = 0.0;  // translation along world +Y
    double m2 = 0.0;  // translation along world +X
    double r1 = 0.0;  // rotation about world X, degrees
    double r2 = 0.0;  // rotation about world Z, degrees

    static constexpr double kMoveLimit = 1.2;
    static constexpr double kRotateLimit = 90.0;

    PlaneState clamped() const;
    bool operator==(const PlaneState&) const = default;
};

// normal = Rz(r2) * Rx(r1) * (+Y); origin = centre + m1 * Y + m2 * X.
Plane plane_pose(const PlaneState& state, const Vec3& shape_center);

struct CameraState {
    double azimuth = 0.0;  // [0, 360)
    double elevation = 0.0;  // [-85, 85]
    double distance = 4.0;

    static constexpr double kStepDeg = 15.0;
    static constexpr double kElevationLimit = 85.0;

    bool operator==(const CameraState&) const = default;
};

// Azimuth 0 looks from +Z toward the origin; positive azimuth swings the eye
// toward +X.
Vec3 camera_eye(const CameraState& camera, const Vec3& target = {});
Vec3 camera_view_direction(const CameraState& camera);
inline Vec3 camera_up(const CameraState&) { return {0.0, 1.0, 0.0}; }

struct ControlMask {
    bool move_sliders = false;
    bool rotate_sliders = false;
    bool view_left_right = true;
    bool view_up_down = true;
    bool cross_section_toggle = true;

    bool operator==(const ControlMask&) const = default;
};

// --- events -------------------------------------------------------------------

enum class ControlKind {
    set_m1,
    set_m2,
    set_r1,
    set_r2,
    view_left,
    view_right,
    view_up,
    view_down,
    toggle_cross_section,
    help_request,
    complete_task,
    show_answer,
    next_task,
};

const char* to_string(ControlKind kind);
std::optional<ControlKind> parse_control_kind(std::string_view name);
bool is_slider(ControlKind kind);

struct ControlEvent {
    ControlKind kind = ControlKind::help_request;
    double value = 0.0;  // slider kinds only

    bool operator==(const ControlEvent&) const = default;
};

// --- goals & help -------------------------------------------------------------

enum class GoalKind {
    skinniest,
    fattest,
    circle_to_oval,
    branches_only,
    branch_and_trunk_oval,
    hole_circular,
    any_section,
};

const char* to_string(GoalKind kind);

struct GoalSpec {
    GoalKind kind = GoalKind::any_section;
    // Sweep-oracle extremum the band is measured against (area units).
    double reference_area = 0.0;
    // skinniest: area <= band * ref; fattest / hole_circular: area >= band * ref.
    double band = 1.0;
    double inner_max_axis_ratio = 1.20;
    ClassifierThresholds thresholds;
};

enum class HintCondKind {
    slider_above,
    slider_below,
    abs_slider_above,
    tilt_below,
    azimuth_near,
    loop_count_equals,
    loop_count_not,
    section_hidden,
};

struct HintCondition {
    HintCondKind kind = HintCondKind::section_hidden;
    std::string slider;  // "m1", "m2", "r1", "r2" for slider conditions
    double a = 0.0;
    double b = 0.0;
};

struct HintRule {
    std::vector<HintCondition> when;  // all must hold
    std::string text;
};

struct ScriptStep {
    ControlEvent event;
    int dwell_ms = 800;
};

using Script = std::vector<ScriptStep>;

// --- tasks --------------------------------------------------------------------

struct TaskSpec {
    std::string task_id;
    int level = 0;
    int difficulty = 0;
    ShapeId shape = ShapeId::hourglass;
    std::string title;
    std::string prompt;
    PlaneState initial_plane;
    CameraState initial_camera;
    ControlMask controls;
    GoalSpec goal;
    std::vector<HintRule> help_rules;
    std::string fallback_hint;
    Script solution;
};

enum class Mode { play, solution };

struct TaskState {
    std::string task_id;
    PlaneState plane;
    CameraState camera;
    bool cross_section_visible = false;
    Mode mode = Mode::play;
    bool completed = false;
    double elapsed = 0.0;  // seconds

    bool operator==(const TaskState&) const = default;
};

struct GoalResult {
    bool satisfied = false;
    std::size_t loop_count = 0;
    std::vector<double> areas;
    std::vector<double> axis_ratios;
    std::vector<std::set<std::string>> parts;
    std::vector<int> depths;
};

struct ScoreRecord {
    std::string task_id;
    int points = 0;
    double elapsed = 0.0;
    std::string snapshot_json;  // serialized TaskState
    std::string snapshot_svg;   // cross-section at completion

    bool operator==(const ScoreRecord&) const = default;
};

inline constexpr int kPointsPerTask = 100;
inline constexpr const char* kConfirmationHint =
    "Your answer is correct! Hit \"Complete Task\" when you are ready.";

// Ordered task list with meshes and sweep-calibrated goals. Building it
// generates every catalog shape once; afterwards it is immutable.
class TaskCatalog {
public:
    static std::shared_ptr<const TaskCatalog> build();

    const std::vector<TaskSpec>& tasks() const { return tasks_; }
    const TaskSpec& tutorial() const { return tutorial_; }
    const TaskSpec& spec(std::string_view task_id) const;  // UnknownTask
    const LabeledMesh& mesh(ShapeId shape) const;
    const MeshTopology& topology(ShapeId shape) const;
    Vec3 shape_center(ShapeId shape) const;

    // Successor id, or nullopt after the last task.
    std::optional<std::string> successor(std::string_view task_id) const;

    nlohmann::json bundle_json() const;
    // Hex FNV-1a 64 of the serialized bundle.
    std::string bundle_hash() const;

private:
    TaskCatalog() = default;

    std::vector<TaskSpec> tasks_;
    TaskSpec tutorial_;
    std::map<ShapeId, LabeledMesh> meshes_;
    std::map<ShapeId, MeshTopology> topologies_;
};

inline const std::vector<std::string>& task_order() {
    static const std::vector<std::string> order{"L1T1", "L1T2", "L1T3", "L2T1", "L2T2", "L3T1"};
    return order;
}

TaskState load_task(const TaskCatalog& catalog, std::string_view task_id);

// Throws ControlNotAvailable for hidden controls and for anything other than
// show_answer / next_task in solution mode. complete_task and next_task are
// validated here but their transitions live in complete_task()/next_task().
TaskState apply_control(const TaskSpec& spec, TaskState state, const ControlEvent& event);

CrossSection current_section(const TaskCatalog& catalog, const TaskState& state);
GoalResult evaluate_goal(const TaskSpec& spec, const TaskState& state, const LabeledMesh& mesh);
GoalResult evaluate_goal(const TaskCatalog& catalog, const TaskState& state);

std::string hint(const TaskSpec& spec, const TaskState& state, const LabeledMesh& mesh);
std::string hint(const TaskCatalog& catalog, const TaskState& state);

// Scores the state and moves it to solution mode (InvalidMode if already
// there). Points are 100 iff the goal holds; no penalty otherwise.
ScoreRecord complete_task(const TaskCatalog& catalog, TaskState& state);

const Script& solution_script(const TaskCatalog& catalog, std::string_view task_id);
TaskState run_script(const TaskCatalog& catalog, std::string_view task_id);

// InvalidMode in play mode; SessionComplete after the last task.
TaskState next_task(const TaskCatalog& catalog, const TaskState& state);

// --- serialization ------------------------------------------------------------

nlohmann::json to_json(const PlaneState& p);
nlohmann::json to_json(const CameraState& c);
nlohmann::json to_json(const ControlMask& m);
nlohmann::json to_json(const ControlEvent& e);
nlohmann::json to_json(const TaskState& s);
nlohmann::json to_json(const TaskSpec& s);
nlohmann::json to_json(const GoalResult& g);
TaskState task_state_from_json(const nlohmann::json& j);
ControlEvent control_event_from_json(const nlohmann::json& j);

}  // namespace slicetrain
