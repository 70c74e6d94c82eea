#include <algorithm>
#include <optional>
#include <set>
#include <sstream>

#include "slicetrain/errors.hpp"
#include "slicetrain/session_log.hpp"

namespace slicetrain {

nlohmann::json to_json(const LogEvent& e) {
    return {{"t", e.t}, {"task", e.task_id}, {"kind", e.kind}, {"payload", e.payload}};
}

LogEvent log_event_from_json(const nlohmann::json& j) {
    try {
        LogEvent e;
        e.t = j.at("t").get<std::int64_t>();
        e.task_id = j.at("task").get<std::string>();
        e.kind = j.at("kind").get<std::string>();
        e.payload = j.value("payload", nlohmann::json::object());
        if (!e.payload.is_object()) throw MalformedLog("payload must be an object");
        return e;
    } catch (const nlohmann::json::exception& x) {
        throw MalformedLog(std::string("bad log event: ") + x.what());
    }
}

SessionLog::SessionLog(std::string bundle_hash, int schema_version)
    : bundle_hash_(std::move(bundle_hash)), schema_version_(schema_version) {}

void SessionLog::record(LogEvent e) {
    if (!events_.empty() && e.t < events_.back().t) {
        throw NonMonotonicTimestamp("t=" + std::to_string(e.t) + " is earlier than the last event at t=" +
                                    std::to_string(events_.back().t));
    }
    events_.push_back(std::move(e));
}

void SessionLog::write_ndjson(std::ostream& out) const {
    out << nlohmann::json{{"type", "header"}, {"schema_version", schema_version_}, {"bundle_hash", bundle_hash_}}.dump()
        << '\n';
    for (const auto& e : events_) out << to_json(e).dump() << '\n';
}

std::string SessionLog::to_ndjson() const {
    std::ostringstream out;
    write_ndjson(out);
    return out.str();
}

SessionLog SessionLog::read_ndjson(std::istream& in) {
    std::string line;
    std::size_t line_no = 0;
    std::optional<SessionLog> log;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        nlohmann::json j;
        try {
            j = nlohmann::json::parse(line);
        } catch (const nlohmann::json::exception& x) {
            throw MalformedLog("line " + std::to_string(line_no) + ": " + x.what());
        }
        if (!log) {
            if (!j.is_object() || j.value("type", "") != "header") {
                throw MalformedLog("line " + std::to_string(line_no) + ": missing header");
            }
            try {
                log.emplace(j.at("bundle_hash").get<std::string>(), j.at("schema_version").get<int>());
            } catch (const nlohmann::json::exception& x) {
                throw MalformedLog("line " + std::to_string(line_no) + ": bad header: " + x.what());
            }
            continue;
        }
        try {
            log->record(log_event_from_json(j));
        } catch (const Error& x) {
            throw MalformedLog("line " + std::to_string(line_no) + ": " + x.what());
        }
    }
    if (!log) throw MalformedLog("empty log");
    return std::move(*log);
}

// --- summary ------------------------------------------------------------------

bool is_usage_kind(std::string_view kind) {
    const auto k = parse_control_kind(kind);
    return k && *k != ControlKind::complete_task && *k != ControlKind::next_task;
}

long UsageSummary::total_interactions() const {
    return help + move_plane + rotate_plane + view_up_down + view_left_right + show_answer + check_cross_section;
}

UsageSummary summarize(const SessionLog& log) {
    UsageSummary s;
    std::set<std::string> scored;
    const auto& order = task_order();
    for (std::size_t i = 0; i < log.events().size(); ++i) {
        const LogEvent& e = log.events()[i];
        if (e.kind == kTaskLoaded || e.kind == kSessionEnd) continue;
        if (e.kind == kTaskCompleted) {
            TaskOutcome o;
            o.task_id = e.task_id;
            try {
                o.points = e.payload.at("points").get<int>();
                o.elapsed = e.payload.at("elapsed").get<double>();
            } catch (const nlohmann::json::exception& x) {
                throw MalformedLog("event " + std::to_string(i) + ": " + x.what());
            }
            if (o.points != 0 && o.points != kPointsPerTask) {
                throw MalformedLog("event " + std::to_string(i) + ": invalid points");
            }
            const bool training = std::find(order.begin(), order.end(), e.task_id) != order.end();
            if (training && scored.insert(e.task_id).second) {
                s.total_score += o.points;
                s.tasks.push_back(o);
            }
            continue;
        }
        if (!is_usage_kind(e.kind)) throw MalformedLog("event " + std::to_string(i) + ": unknown kind '" + e.kind + "'");
        switch (*parse_control_kind(e.kind)) {
            case ControlKind::set_m1:
            case ControlKind::set_m2: ++s.move_plane; break;
            case ControlKind::set_r1:
            case ControlKind::set_r2: ++s.rotate_plane; break;
            case ControlKind::view_up:
            case ControlKind::view_down: ++s.view_up_down; break;
            case ControlKind::view_left:
            case ControlKind::view_right: ++s.view_left_right; break;
            case ControlKind::help_request: ++s.help; break;
            case ControlKind::show_answer: ++s.show_answer; break;
            case ControlKind::toggle_cross_section: ++s.check_cross_section; break;
            case ControlKind::complete_task:
            case ControlKind::next_task: break;
        }
    }
    return s;
}

std::string summary_csv_header() {
    return "Score,Help,Move Plane,Rotate Plane,Change View Up/down,Change View Left/right,Show Answer,"
           "Check Cross-section";
}

std::string summary_csv_row(const UsageSummary& s) {
    std::ostringstream out;
    out << s.total_score << ',' << s.help << ',' << s.move_plane << ',' << s.rotate_plane << ',' << s.view_up_down
        << ',' << s.view_left_right << ',' << s.show_answer << ',' << s.check_cross_section;
    return out.str();
}

std::string summary_csv(const UsageSummary& s) { return summary_csv_header() + "\n" + summary_csv_row(s) + "\n"; }

nlohmann::json to_json(const UsageSummary& s) {
    nlohmann::json tasks = nlohmann::json::array();
    for (const auto& t : s.tasks) tasks.push_back({{"task_id", t.task_id}, {"points", t.points}, {"elapsed", t.elapsed}});
    return {{"help", s.help},
            {"move_plane", s.move_plane},
            {"rotate_plane", s.rotate_plane},
            {"view_up_down", s.view_up_down},
            {"view_left_right", s.view_left_right},
            {"show_answer", s.show_answer},
            {"check_cross_section", s.check_cross_section},
            {"tasks", tasks},
            {"total_score", s.total_score}};
}

// --- session ------------------------------------------------------------------

TrainingSession::TrainingSession(std::shared_ptr<const TaskCatalog> catalog)
    : catalog_(std::move(catalog)), log_(catalog_->bundle_hash()) {}

void TrainingSession::check_time(std::int64_t t) const {
    if (t < log_.last_time()) {
        throw NonMonotonicTimestamp("t=" + std::to_string(t) + " is earlier than the last event at t=" +
                                    std::to_string(log_.last_time()));
    }
}

void TrainingSession::start(std::int64_t t, std::string_view task_id) {
    if (started_) throw InvalidMode("session already started");
    check_time(t);
    state_ = load_task(*catalog_, task_id);
    loaded_at_ = t;
    started_ = true;
    log_.record({t, state_.task_id, kTaskLoaded, nlohmann::json::object()});
}

std::string TrainingSession::apply(std::int64_t t, const ControlEvent& event) {
    if (!started_) throw InvalidMode("session not started");
    if (ended_) throw SessionComplete("session has ended");
    check_time(t);
    const TaskSpec& spec = catalog_->spec(state_.task_id);
    TaskState next = apply_control(spec, state_, event);

    if (event.kind == ControlKind::complete_task) {
        next.elapsed = static_cast<double>(t - loaded_at_) / 1000.0;
        ScoreRecord rec = complete_task(*catalog_, next);
        state_ = next;
        log_.record({t, state_.task_id, kTaskCompleted, {{"points", rec.points}, {"elapsed", rec.elapsed}}});
        scores_.push_back(std::move(rec));
        return {};
    }
    if (event.kind == ControlKind::next_task) {
        TaskState loaded = next_task(*catalog_, state_);
        final_states_.push_back(state_);
        state_ = loaded;
        loaded_at_ = t;
        log_.record({t, state_.task_id, kTaskLoaded, nlohmann::json::object()});
        return {};
    }

    nlohmann::json payload = nlohmann::json::object();
    std::string text;
    if (is_slider(event.kind)) payload["value"] = event.value;
    if (event.kind == ControlKind::help_request) {
        text = hint(*catalog_, next);
        payload["hint"] = text;
    }
    state_ = next;
    log_.record({t, state_.task_id, to_string(event.kind), std::move(payload)});
    return text;
}

void TrainingSession::end(std::int64_t t) {
    if (!started_) throw InvalidMode("session not started");
    if (ended_) throw SessionComplete("session has ended");
    check_time(t);
    final_states_.push_back(state_);
    ended_ = true;
    log_.record({t, state_.task_id, kSessionEnd, nlohmann::json::object()});
}

TrainingSession record_solution_session(std::shared_ptr<const TaskCatalog> catalog, bool include_tutorial) {
    constexpr std::int64_t kPause = 800;
    TrainingSession session(catalog);
    std::int64_t t = 0;
    session.start(t, include_tutorial ? catalog->tutorial().task_id : task_order().front());
    while (true) {
        for (const auto& step : solution_script(*catalog, session.state().task_id)) {
            t += step.dwell_ms;
            session.apply(t, step.event);
        }
        t += kPause;
        session.apply(t, {ControlKind::complete_task, 0.0});
        if (!catalog->successor(session.state().task_id)) break;
        t += kPause;
        session.apply(t, {ControlKind::next_task, 0.0});
    }
    session.end(t + kPause);
    return session;
}

// --- replay -------------------------------------------------------------------

std::string ReplayResult::snapshot() const {
    std::string out;
    for (const auto& s : final_states) out += to_json(s).dump() + "\n";
    return out;
}

namespace {

std::string detail_of(const Error& e) {
    const std::string what = e.what();
    const std::string prefix = e.name() + ": ";
    return what.rfind(prefix, 0) == 0 ? what.substr(prefix.size()) : what;
}

void replay_event(TrainingSession& s, const LogEvent& e) {
    if (e.kind == kTaskLoaded) {
        if (!s.started()) {
            s.start(e.t, e.task_id);
        } else {
            s.apply(e.t, {ControlKind::next_task, 0.0});
        }
    } else if (e.kind == kTaskCompleted) {
        s.apply(e.t, {ControlKind::complete_task, 0.0});
    } else if (e.kind == kSessionEnd) {
        s.end(e.t);
    } else {
        if (!is_usage_kind(e.kind)) throw MalformedLog("unknown kind '" + e.kind + "'");
        if (!s.started()) throw MalformedLog("control event before any task was loaded");
        if (e.task_id != s.state().task_id) throw MalformedLog("event for task " + e.task_id + " while in " + s.state().task_id);
        ControlEvent ev{*parse_control_kind(e.kind), 0.0};
        if (is_slider(ev.kind)) {
            const auto it = e.payload.find("value");
            if (it == e.payload.end() || !it->is_number()) throw MalformedLog("slider event without a numeric value");
            ev.value = it->get<double>();
        }
        s.apply(e.t, ev);
    }
    if (s.log().events().empty() || !(s.log().events().back() == e)) {
        throw MalformedLog("event does not reproduce: " + to_json(e).dump());
    }
}

}  // namespace

ReplayResult replay(std::shared_ptr<const TaskCatalog> catalog, const SessionLog& log) {
    if (log.schema_version() != kLogSchemaVersion) {
        throw VersionMismatch("log schema " + std::to_string(log.schema_version()) + ", engine schema " +
                              std::to_string(kLogSchemaVersion));
    }
    if (log.bundle_hash() != catalog->bundle_hash()) {
        throw VersionMismatch("log bundle " + log.bundle_hash() + ", engine bundle " + catalog->bundle_hash());
    }
    TrainingSession session(catalog);
    for (std::size_t i = 0; i < log.events().size(); ++i) {
        const long index = static_cast<long>(i);
        try {
            replay_event(session, log.events()[i]);
        } catch (const ControlNotAvailable& x) {
            throw ControlNotAvailable("event " + std::to_string(i) + ": " + detail_of(x), index);
        } catch (const MalformedLog& x) {
            throw MalformedLog("event " + std::to_string(i) + ": " + detail_of(x));
        } catch (const Error& x) {
            throw MalformedLog("event " + std::to_string(i) + ": " + x.what());
        }
    }
    ReplayResult r;
    r.final_states = session.final_states();
    if (session.started() && !session.ended()) r.final_states.push_back(session.state());
    r.scores = session.scores();
    r.summary = summarize(log);
    return r;
}

}  // namespace slicetrain
