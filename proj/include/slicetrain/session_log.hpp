#pragma once

// Append-only NDJSON session log, a session driver that records every applied
// event, usage summaries and deterministic replay.

#include <cstdint>
#include <istream>
#include <memory>
#include <ostream>
#include <string>
#include <vector>

#include <json.hpp>

#include "slicetrain/task_engine.hpp"

namespace slicetrain {

inline constexpr int kLogSchemaVersion = 1;

// Lifecycle markers; every other kind is a ControlEvent kind name.
inline constexpr const char* kTaskLoaded = "task_loaded";
inline constexpr const char* kTaskCompleted = "task_completed";
inline constexpr const char* kSessionEnd = "session_end";

struct LogEvent {
    std::int64_t t = 0;  // milliseconds since session start
    std::string task_id;
    std::string kind;
    nlohmann::json payload = nlohmann::json::object();

    bool operator==(const LogEvent&) const = default;
};

nlohmann::json to_json(const LogEvent& e);
LogEvent log_event_from_json(const nlohmann::json& j);  // MalformedLog

class SessionLog {
public:
    explicit SessionLog(std::string bundle_hash, int schema_version = kLogSchemaVersion);

    // NonMonotonicTimestamp if e.t is earlier than the last event.
    void record(LogEvent e);

    const std::vector<LogEvent>& events() const { return events_; }
    std::size_t size() const { return events_.size(); }
    const std::string& bundle_hash() const { return bundle_hash_; }
    int schema_version() const { return schema_version_; }
    std::int64_t last_time() const { return events_.empty() ? 0 : events_.back().t; }

    void write_ndjson(std::ostream& out) const;
    std::string to_ndjson() const;
    // MalformedLog on syntax or structure errors (including out-of-order
    // timestamps); the header's version and hash are returned unchecked.
    static SessionLog read_ndjson(std::istream& in);

private:
    std::string bundle_hash_;
    int schema_version_;
    std::vector<LogEvent> events_;
};

// True for the ControlEvent kinds counted in the usage summary.
bool is_usage_kind(std::string_view kind);

struct TaskOutcome {
    std::string task_id;
    int points = 0;
    double elapsed = 0.0;

    bool operator==(const TaskOutcome&) const = default;
};

struct UsageSummary {
    long help = 0;
    long move_plane = 0;
    long rotate_plane = 0;
    long view_up_down = 0;
    long view_left_right = 0;
    long show_answer = 0;
    long check_cross_section = 0;
    std::vector<TaskOutcome> tasks;  // training tasks only, in completion order
    int total_score = 0;

    long total_interactions() const;
    bool operator==(const UsageSummary&) const = default;
};

UsageSummary summarize(const SessionLog& log);  // MalformedLog

std::string summary_csv_header();
std::string summary_csv_row(const UsageSummary& summary);
// Header line plus one row, each newline-terminated.
std::string summary_csv(const UsageSummary& summary);
nlohmann::json to_json(const UsageSummary& summary);

// Drives the task engine and records each applied event with a
// caller-supplied timestamp. Rejected events leave state and log untouched.
class TrainingSession {
public:
    explicit TrainingSession(std::shared_ptr<const TaskCatalog> catalog);

    void start(std::int64_t t, std::string_view task_id = "L1T1");
    // Returns the hint text for help_request, otherwise an empty string.
    std::string apply(std::int64_t t, const ControlEvent& event);
    void end(std::int64_t t);

    bool started() const { return started_; }
    bool ended() const { return ended_; }
    const TaskState& state() const { return state_; }
    const std::vector<ScoreRecord>& scores() const { return scores_; }
    // Every visited task's state when it was left (or at session end).
    const std::vector<TaskState>& final_states() const { return final_states_; }
    const SessionLog& log() const { return log_; }
    const TaskCatalog& catalog() const { return *catalog_; }

private:
    void check_time(std::int64_t t) const;

    std::shared_ptr<const TaskCatalog> catalog_;
    SessionLog log_;
    TaskState state_;
    std::int64_t loaded_at_ = 0;
    bool started_ = false;
    bool ended_ = false;
    std::vector<ScoreRecord> scores_;
    std::vector<TaskState> final_states_;
};

// Plays every solution script in task order (optionally after the tutorial)
// with the scripts' dwell times, completing each task.
TrainingSession record_solution_session(std::shared_ptr<const TaskCatalog> catalog, bool include_tutorial = false);

struct ReplayResult {
    std::vector<TaskState> final_states;
    std::vector<ScoreRecord> scores;
    UsageSummary summary;

    // Serialized final states, one JSON document per line.
    std::string snapshot() const;
};

// VersionMismatch for a foreign schema version or bundle hash; MalformedLog
// for events that do not reproduce; ControlNotAvailable carries the index of
// the offending event.
ReplayResult replay(std::shared_ptr<const TaskCatalog> catalog, const SessionLog& log);

}  // namespace slicetrain
