#include <gtest/gtest.h>

#include <random>
#include <sstream>

#include "slicetrain/errors.hpp"
#include "slicetrain/session_log.hpp"

using namespace slicetrain;

namespace {

class SessionLogTest : public ::testing::Test {
protected:
    static void SetUpTestSuite() { catalog_ = TaskCatalog::build(); }
    static void TearDownTestSuite() { catalog_.reset(); }

    static std::shared_ptr<const TaskCatalog> catalog_;
};

std::shared_ptr<const TaskCatalog> SessionLogTest::catalog_;

LogEvent control(std::int64_t t, const char* kind, const std::string& task = "L1T1") {
    return {t, task, kind, nlohmann::json::object()};
}

SessionLog round_trip(const SessionLog& log) {
    std::istringstream in(log.to_ndjson());
    return SessionLog::read_ndjson(in);
}

// A random but legal session: arbitrary permitted controls, each task
// completed, moving on until the last one.
TrainingSession random_session(std::shared_ptr<const TaskCatalog> catalog, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> value(-100.0, 100.0);
    const std::vector<ControlKind> kinds{ControlKind::set_m1,    ControlKind::set_m2,    ControlKind::set_r1,
                                         ControlKind::set_r2,    ControlKind::view_left, ControlKind::view_right,
                                         ControlKind::view_up,   ControlKind::view_down, ControlKind::toggle_cross_section,
                                         ControlKind::help_request};
    TrainingSession s(catalog);
    std::int64_t t = 0;
    s.start(t);
    while (true) {
        const int n = static_cast<int>(rng() % 12);
        for (int i = 0; i < n; ++i) {
            t += static_cast<std::int64_t>(rng() % 3000);
            try {
                s.apply(t, {kinds[rng() % kinds.size()], value(rng) / 80.0});
            } catch (const ControlNotAvailable&) {
            }
        }
        t += 500;
        s.apply(t, {ControlKind::complete_task, 0.0});
        if (rng() % 2) {
            t += 100;
            s.apply(t, {ControlKind::show_answer, 0.0});
        }
        if (!catalog->successor(s.state().task_id)) break;
        t += 100;
        s.apply(t, {ControlKind::next_task, 0.0});
    }
    s.end(t + 1);
    return s;
}

}  // namespace

TEST(SessionLogBasics, RecordAppends) {
    SessionLog log("abc");
    log.record({0, "L1T1", kTaskLoaded, nlohmann::json::object()});
    EXPECT_EQ(log.size(), 1u);
}

TEST(SessionLogBasics, EarlierTimestampRejected) {
    SessionLog log("abc");
    log.record(control(100, "help_request"));
    EXPECT_THROW(log.record(control(99, "help_request")), NonMonotonicTimestamp);
    EXPECT_NO_THROW(log.record(control(100, "help_request")));
    EXPECT_EQ(log.size(), 2u);
}

TEST(SessionLogBasics, HundredEventsInOrder) {
    SessionLog log("abc");
    for (int i = 0; i < 100; ++i) log.record(control(i * 10, i % 2 ? "set_m1" : "view_up"));
    ASSERT_EQ(log.size(), 100u);
    for (int i = 0; i < 100; ++i) EXPECT_EQ(log.events()[i].t, i * 10);
    EXPECT_EQ(round_trip(log).events(), log.events());
}

TEST(Summary, CountsHelpRequests) {
    SessionLog log("abc");
    for (int i = 0; i < 3; ++i) log.record(control(i, "help_request"));
    EXPECT_EQ(summarize(log).help, 3);
}

TEST(Summary, BucketsMoveSliders) {
    SessionLog log("abc");
    log.record(control(0, "set_m1"));
    log.record(control(1, "set_m1"));
    log.record(control(2, "set_m2"));
    log.record(control(3, "set_r2"));
    log.record(control(4, "view_left"));
    const UsageSummary s = summarize(log);
    EXPECT_EQ(s.move_plane, 3);
    EXPECT_EQ(s.rotate_plane, 1);
    EXPECT_EQ(s.view_left_right, 1);
    EXPECT_EQ(s.total_interactions(), 5);
}

TEST(Summary, UnknownKindIsMalformed) {
    SessionLog log("abc");
    log.record(control(0, "teleport"));
    EXPECT_THROW(summarize(log), MalformedLog);
}

TEST(Summary, CsvColumns) {
    UsageSummary s;
    s.total_score = 500;
    s.help = 2;
    EXPECT_EQ(summary_csv(s),
              "Score,Help,Move Plane,Rotate Plane,Change View Up/down,Change View Left/right,Show Answer,"
              "Check Cross-section\n500,2,0,0,0,0,0,0\n");
}

TEST(Ndjson, HeaderAndMalformedInput) {
    SessionLog log("deadbeef");
    log.record(control(5, "help_request"));
    const std::string text = log.to_ndjson();
    EXPECT_EQ(text.substr(0, text.find('\n')), R"({"bundle_hash":"deadbeef","schema_version":1,"type":"header"})");

    std::istringstream no_header(R"({"t":0,"task":"L1T1","kind":"help_request","payload":{}})" "\n");
    EXPECT_THROW(SessionLog::read_ndjson(no_header), MalformedLog);
    std::istringstream bad_json("{\"type\":\"header\",\"schema_version\":1,\"bundle_hash\":\"x\"}\n{oops\n");
    EXPECT_THROW(SessionLog::read_ndjson(bad_json), MalformedLog);
    std::istringstream backwards(
        "{\"type\":\"header\",\"schema_version\":1,\"bundle_hash\":\"x\"}\n"
        "{\"t\":5,\"task\":\"L1T1\",\"kind\":\"help_request\",\"payload\":{}}\n"
        "{\"t\":4,\"task\":\"L1T1\",\"kind\":\"help_request\",\"payload\":{}}\n");
    EXPECT_THROW(SessionLog::read_ndjson(backwards), MalformedLog);
    std::istringstream empty("");
    EXPECT_THROW(SessionLog::read_ndjson(empty), MalformedLog);
}

TEST_F(SessionLogTest, SolutionSessionScoresSixHundred) {
    const TrainingSession s = record_solution_session(catalog_);
    const UsageSummary summary = summarize(s.log());
    EXPECT_EQ(summary.total_score, 600);
    ASSERT_EQ(summary.tasks.size(), 6u);
    for (const auto& t : summary.tasks) EXPECT_GT(t.elapsed, 0.0);
    EXPECT_EQ(s.log().events().front().kind, kTaskLoaded);
    EXPECT_EQ(s.log().events().back().kind, kSessionEnd);
}

TEST_F(SessionLogTest, TutorialIsNotScored) {
    const TrainingSession s = record_solution_session(catalog_, true);
    EXPECT_EQ(s.log().events().front().task_id, "TUT");
    EXPECT_EQ(summarize(s.log()).total_score, 600);
    EXPECT_EQ(s.scores().size(), 7u);
}

TEST_F(SessionLogTest, HelpEventCarriesHint) {
    TrainingSession s(catalog_);
    s.start(0);
    EXPECT_EQ(s.apply(10, {ControlKind::help_request, 0.0}), "move the plane to the middle of the hourglass");
    EXPECT_EQ(s.log().events().back().payload.at("hint"), "move the plane to the middle of the hourglass");
}

TEST_F(SessionLogTest, RejectedEventsLeaveNoTrace) {
    TrainingSession s(catalog_);
    s.start(0);
    EXPECT_THROW(s.apply(5, {ControlKind::set_r1, 20.0}), ControlNotAvailable);
    EXPECT_THROW(s.apply(5, {ControlKind::next_task, 0.0}), ControlNotAvailable);
    s.apply(10, {ControlKind::set_m1, 0.2});
    EXPECT_THROW(s.apply(9, {ControlKind::set_m1, 0.1}), NonMonotonicTimestamp);
    EXPECT_EQ(s.log().size(), 2u);
    EXPECT_DOUBLE_EQ(s.state().plane.m1, 0.2);
}

TEST_F(SessionLogTest, ElapsedComesFromTimestamps) {
    TrainingSession s(catalog_);
    s.start(1000);
    s.apply(4500, {ControlKind::complete_task, 0.0});
    EXPECT_DOUBLE_EQ(s.scores().back().elapsed, 3.5);
    EXPECT_DOUBLE_EQ(s.state().elapsed, 3.5);
}

TEST_F(SessionLogTest, ReplayIsByteIdentical) {
    const TrainingSession s = record_solution_session(catalog_);
    const SessionLog log = round_trip(s.log());
    std::string first;
    for (int run = 0; run < 3; ++run) {
        const ReplayResult r = replay(catalog_, log);
        EXPECT_EQ(r.scores, s.scores());
        EXPECT_EQ(r.final_states, s.final_states());
        if (run == 0) first = r.snapshot() + summary_csv(r.summary);
        EXPECT_EQ(r.snapshot() + summary_csv(r.summary), first);
    }
    for (const auto& st : replay(catalog_, log).final_states) {
        EXPECT_TRUE(evaluate_goal(*catalog_, st).satisfied) << st.task_id;
    }
}

TEST_F(SessionLogTest, ReplaySurfacesHiddenControlWithIndex) {
    SessionLog log(catalog_->bundle_hash());
    log.record({0, "L1T1", kTaskLoaded, nlohmann::json::object()});
    log.record({10, "L1T1", "set_m1", {{"value", 0.1}}});
    log.record({20, "L1T1", "set_r1", {{"value", 30.0}}});
    try {
        replay(catalog_, log);
        FAIL() << "expected ControlNotAvailable";
    } catch (const ControlNotAvailable& e) {
        EXPECT_EQ(e.event_index(), 2);
    }
}

TEST_F(SessionLogTest, ReplayRejectsForeignBundleOrSchema) {
    SessionLog foreign("0000000000000000");
    EXPECT_THROW(replay(catalog_, foreign), VersionMismatch);
    SessionLog future(catalog_->bundle_hash(), kLogSchemaVersion + 1);
    EXPECT_THROW(replay(catalog_, future), VersionMismatch);
}

TEST_F(SessionLogTest, ReplayRejectsTamperedOutcome) {
    const TrainingSession s = record_solution_session(catalog_);
    SessionLog tampered(s.log().bundle_hash());
    for (auto e : s.log().events()) {
        if (e.kind == kTaskCompleted && e.task_id == "L1T3") e.payload["points"] = 0;
        tampered.record(e);
    }
    EXPECT_THROW(replay(catalog_, tampered), MalformedLog);
}

// Sum of bucketed counts equals the number of control events, and replay
// reproduces summary, scores and states for arbitrary engine-produced logs.
TEST_F(SessionLogTest, PropertyConservationAndReplayDeterminism) {
    for (std::uint64_t seed = 1; seed <= 8; ++seed) {
        const TrainingSession s = random_session(catalog_, seed);
        const SessionLog log = round_trip(s.log());
        const UsageSummary summary = summarize(log);
        long controls = 0;
        for (const auto& e : log.events()) controls += is_usage_kind(e.kind) ? 1 : 0;
        EXPECT_EQ(summary.total_interactions(), controls);
        EXPECT_GE(summary.total_score, 0);
        EXPECT_LE(summary.total_score, 600);
        const ReplayResult a = replay(catalog_, log);
        const ReplayResult b = replay(catalog_, log);
        EXPECT_EQ(a.summary, summary);
        EXPECT_EQ(a.summary, b.summary);
        EXPECT_EQ(a.scores, s.scores());
        EXPECT_EQ(a.snapshot(), b.snapshot());
        EXPECT_EQ(a.final_states, s.final_states());
    }
}
