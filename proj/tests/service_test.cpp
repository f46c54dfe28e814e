#include <gtest/gtest.h>

#include <sstream>
#include <thread>

#include "robotiq/error.hpp"
#include "robotiq/geom/map_io.hpp"
#include "robotiq/service/bench.hpp"
#include "robotiq/service/metrics.hpp"
#include "robotiq/service/session.hpp"

using namespace robotiq;
using namespace robotiq::service;
using nlohmann::json;

namespace {

const std::string kDemo = std::string(ROBOTIQ_DATA_DIR) + "/maps/demo_home.json";

geom::WorldMap demo() { return geom::load_world_file(kDemo); }

SessionConfig quiet() {
  SessionConfig c;
  c.stream = false;
  return c;
}

}  // namespace

TEST(Metrics, RecordAccounting) {
  const auto ok = make_record("go_to(kitchen)", 0.5, 12.25, true);
  EXPECT_EQ(ok.t_total, 0.5 + 12.25);
  const auto bad = make_record("go_to(kitchen)", 0.5, 30.0, false, "timeout");
  EXPECT_EQ(bad.t_robot, 0.0);
  EXPECT_EQ(bad.t_total, 0.5);
  EXPECT_FALSE(bad.success);
}

TEST(Metrics, SingleRecord) {
  const auto r = metrics_report({make_record("a", 1, 2, true)}, 1);
  ASSERT_EQ(r.tasks.size(), 1u);
  EXPECT_DOUBLE_EQ(r.tasks[0].mean_t_llm, 1);
  EXPECT_DOUBLE_EQ(r.tasks[0].mean_t_robot, 2);
  EXPECT_DOUBLE_EQ(r.tasks[0].mean_t_total, 3);
  EXPECT_DOUBLE_EQ(r.tasks[0].success_rate, 1);
}

TEST(Metrics, TenRecordSpreadsheetOracle) {
  // task, t_llm, t_robot (as measured), success
  struct Row { const char* task; double llm, robot; bool ok; };
  const Row rows[] = {{"go", 1.0, 10.0, true}, {"pick", 0.5, 4.5, true}, {"go", 1.2, 30.0, false},
                      {"pick", 0.7, 4.5, true}, {"go", 0.8, 11.0, true}, {"pick", 0.6, 4.5, false},
                      {"go", 1.0, 9.0, true},  {"leave", 0.2, 2.0, true}, {"leave", 0.4, 2.5, true},
                      {"go", 1.0, 12.0, true}};
  std::vector<TaskRecord> recs;
  int trial = 1;
  for (const auto& r : rows) recs.push_back(make_record(r.task, r.llm, r.robot, r.ok, "", trial++));
  const auto rep = metrics_report(recs, 10);
  EXPECT_EQ(rep.records, 10);
  EXPECT_EQ(rep.trials, 10);
  ASSERT_EQ(rep.tasks.size(), 3u);
  // go: llm (1 + 1.2 + .8 + 1 + 1) / 5 = 1.0; robot (10 + 0 + 11 + 9 + 12) / 5 = 8.4
  EXPECT_EQ(rep.tasks[0].task, "go");
  EXPECT_EQ(rep.tasks[0].count, 5);
  EXPECT_NEAR(rep.tasks[0].mean_t_llm, 1.0, 1e-12);
  EXPECT_NEAR(rep.tasks[0].mean_t_robot, 8.4, 1e-12);
  EXPECT_NEAR(rep.tasks[0].mean_t_total, 9.4, 1e-12);
  EXPECT_NEAR(rep.tasks[0].success_rate, 0.8, 1e-12);
  // pick: llm 0.6, robot (4.5 + 4.5 + 0) / 3 = 3.0, success 2/3
  EXPECT_EQ(rep.tasks[1].task, "pick");
  EXPECT_NEAR(rep.tasks[1].mean_t_llm, 0.6, 1e-12);
  EXPECT_NEAR(rep.tasks[1].mean_t_robot, 3.0, 1e-12);
  EXPECT_NEAR(rep.tasks[1].success_rate, 2.0 / 3.0, 1e-12);
  // leave: llm 0.3, robot 2.25
  EXPECT_NEAR(rep.tasks[2].mean_t_llm, 0.3, 1e-12);
  EXPECT_NEAR(rep.tasks[2].mean_t_robot, 2.25, 1e-12);
  EXPECT_NEAR(rep.tasks[2].success_rate, 1.0, 1e-12);

  double prev_t = -1, prev_f = 0;
  for (const auto& p : rep.cdf) {
    EXPECT_GT(p.t_total, prev_t);
    EXPECT_GE(p.cum_fraction, prev_f);
    prev_t = p.t_total;
    prev_f = p.cum_fraction;
  }
  EXPECT_DOUBLE_EQ(rep.cdf.back().cum_fraction, 1.0);
  // Failed records count at t_llm alone: 0.6 (pick) then 1.2 (go) are the smallest totals.
  EXPECT_NEAR(rep.cdf[0].t_total, 0.6, 1e-12);
  EXPECT_NEAR(rep.cdf[0].cum_fraction, 0.1, 1e-12);
  EXPECT_NEAR(rep.cdf[1].t_total, 1.2, 1e-12);
  EXPECT_NEAR(rep.cdf[1].cum_fraction, 0.2, 1e-12);
}

TEST(Metrics, IdenticalRecordsGiveOneStep) {
  const auto r = metrics_report({make_record("a", 1, 2, true), make_record("a", 1, 2, true)});
  ASSERT_EQ(r.cdf.size(), 1u);
  EXPECT_DOUBLE_EQ(r.cdf[0].t_total, 3);
  EXPECT_DOUBLE_EQ(r.cdf[0].cum_fraction, 1.0);
}

TEST(Metrics, EmptyInputEmptyReport) {
  const auto r = metrics_report({});
  EXPECT_EQ(r.records, 0);
  EXPECT_TRUE(r.tasks.empty());
  EXPECT_TRUE(r.cdf.empty());
}

TEST(Metrics, CsvFormats) {
  std::ostringstream m, c;
  const std::vector<TaskRecord> recs{make_record("go_to(kitchen)", 0.1, 14.7, true, "", 1),
                                     make_record("pick(bottle_of_water)", 0.1, 4.5, false, "x", 1)};
  write_records_csv(m, recs);
  write_cdf_csv(c, metrics_report(recs, 1));
  std::istringstream in(m.str());
  std::string header, row1, row2;
  std::getline(in, header);
  std::getline(in, row1);
  std::getline(in, row2);
  EXPECT_EQ(header, "trial,task,t_llm,t_robot,t_total,success");
  EXPECT_EQ(row1.substr(0, 17), "1,go_to(kitchen),");
  EXPECT_EQ(row1.back(), '1');
  EXPECT_EQ(row2.back(), '0');
  EXPECT_EQ(c.str().substr(0, c.str().find('\n')), "t_total,cum_fraction");
}

TEST(EventHub, OrderingFanOutAndCapacity) {
  EventHub hub(5);
  for (int i = 0; i < 8; ++i) hub.publish("state", i * 0.1, {{"i", i}});
  EXPECT_EQ(hub.next_seq(), 9u);
  const auto snap = hub.snapshot();
  ASSERT_EQ(snap.size(), 5u);
  EXPECT_EQ(snap.front().seq, 4u);
  std::uint64_t a = 1, b = 6;
  const auto ea = hub.next(a, std::chrono::milliseconds(10));
  ASSERT_TRUE(ea);
  EXPECT_EQ(ea->seq, 4u);  // dropped events are skipped
  const auto eb = hub.next(b, std::chrono::milliseconds(10));
  EXPECT_EQ(eb->seq, 6u);
  std::uint64_t end = 9;
  EXPECT_FALSE(hub.next(end, std::chrono::milliseconds(20)));
  hub.close();
  EXPECT_TRUE(hub.closed());
  EXPECT_FALSE(hub.next(end, std::chrono::milliseconds(1000)));
}

TEST(EventHub, BlockingSubscribersSeeIdenticalSequences) {
  EventHub hub;
  std::vector<std::uint64_t> seen[2];
  std::vector<std::thread> subs;
  for (int s = 0; s < 2; ++s) {
    subs.emplace_back([&, s] {
      std::uint64_t cursor = 1;
      while (auto e = hub.next(cursor, std::chrono::milliseconds(2000))) seen[s].push_back(e->seq);
    });
  }
  for (int i = 0; i < 200; ++i) hub.publish(i % 2 ? "plan" : "state", 0, json::object());
  hub.close();
  for (auto& t : subs) t.join();
  EXPECT_EQ(seen[0].size(), 200u);
  EXPECT_EQ(seen[0], seen[1]);
}

TEST(Session, ReadyAtStartPose) {
  Session s("s1", demo(), quiet());
  const auto st = s.state_json();
  EXPECT_EQ(st.at("session"), "s1");
  EXPECT_EQ(st.at("arm"), "home");
  EXPECT_DOUBLE_EQ(st.at("robot").at("pose")[0].get<double>(), 0.6);
  EXPECT_EQ(st.at("lidar").at("ranges").size(), 25u);
  EXPECT_FALSE(st.at("busy").get<bool>());
}

TEST(Session, MissingMapIsNotFound) {
  try {
    Session::from_file("s", "/nonexistent/map.json", quiet());
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kNotFound);
  }
}

TEST(Session, CollidingStartIsSetupError) {
  auto cfg = quiet();
  cfg.start = geom::Pose2D{2.0, 0.4, 0};  // on the sofa
  EXPECT_THROW(Session("s", demo(), cfg), Error);
}

TEST(Session, GoToKitchenRecordsIdentity) {
  Session s("s1", demo(), quiet());
  const auto out = s.submit_command("Go to the kitchen");
  ASSERT_TRUE(out.compiled);
  ASSERT_EQ(out.records.size(), 1u);
  const auto& r = out.records[0];
  EXPECT_TRUE(r.success) << r.detail;
  EXPECT_EQ(r.task, "go_to(kitchen)");
  EXPECT_EQ(r.t_total, r.t_llm + r.t_robot);
  EXPECT_GT(r.t_robot, 0);
  EXPECT_EQ(s.records().size(), 1u);
}

TEST(Session, WalledOffTargetFailsWithZeroRobotTime) {
  auto m = demo();
  m.locations["vault"] = {2.0, 2.7};
  m.obstacles.push_back(geom::Rect{{1.5, 2.3}, {2.5, 2.4}});
  m.obstacles.push_back(geom::Rect{{1.5, 2.3}, {1.6, 3.0}});
  m.obstacles.push_back(geom::Rect{{2.4, 2.3}, {2.5, 3.0}});
  Session s("s1", m, quiet());
  const auto out = s.submit_command("go to the vault then go to the kitchen");
  ASSERT_TRUE(out.compiled);
  ASSERT_EQ(out.records.size(), 2u);
  for (const auto& r : out.records) {
    EXPECT_FALSE(r.success);
    EXPECT_EQ(r.t_robot, 0.0);
    EXPECT_EQ(r.t_total, r.t_llm + r.t_robot);
  }
  EXPECT_NE(out.records[1].detail.find("aborted"), std::string::npos);
}

TEST(Session, HomeServiceFiveRecords) {
  Session s("s1", demo(), quiet());
  const auto out = s.submit_command("bring the bottle of water to the human");
  ASSERT_TRUE(out.compiled);
  const std::vector<std::string> want{"go_to(kitchen)", "pick(bottle_of_water)", "leave(0.3)",
                                      "go_to(human)", "place(bottle_of_water)"};
  ASSERT_EQ(out.records.size(), want.size());
  for (size_t i = 0; i < want.size(); ++i) {
    EXPECT_EQ(out.records[i].task, want[i]);
    EXPECT_TRUE(out.records[i].success) << out.records[i].detail;
    EXPECT_EQ(out.records[i].t_total, out.records[i].t_llm + out.records[i].t_robot);
  }
}

TEST(Session, CompileErrorIsStructuredAndExecutesNothing) {
  Session s("s1", demo(), quiet());
  const auto before = s.state_json().at("robot");
  const auto out = s.submit_command("place the bottle of water near the human");
  EXPECT_FALSE(out.compiled);
  EXPECT_EQ(*out.error_stage, "validate");
  ASSERT_FALSE(out.violations.empty());
  EXPECT_EQ(out.violations[0].rule, "state-precondition");
  EXPECT_TRUE(out.records.empty());
  EXPECT_EQ(s.state_json().at("robot"), before);
  const auto bad = s.submit_command("dance wildly");
  EXPECT_EQ(*bad.error_stage, "parse");
}

TEST(Session, HeldItemCarriesAcrossCommands) {
  Session s("s1", demo(), quiet());
  ASSERT_TRUE(s.submit_command("go to the kitchen and pick the bottle of water").compiled);
  const auto out = s.submit_command("place the bottle of water near the human");
  ASSERT_TRUE(out.compiled);
  EXPECT_TRUE(out.records.back().success);
}

TEST(Session, VoiceLatencyAndEvenSplit) {
  auto cfg = quiet();
  cfg.voice_latency = 1.0;
  cfg.backend = plan::RuleBasedBackend{0.5};
  Session s("s1", demo(), cfg);
  const auto out = s.submit_command("bring the bottle of water to the human");
  EXPECT_DOUBLE_EQ(out.t_llm, 1.5);
  double sum = 0;
  for (const auto& r : out.records) sum += r.t_llm;
  EXPECT_NEAR(sum, 1.5, 1e-12);
}

TEST(Session, IndependentSessionsOnOneMap) {
  auto a = Session::from_file("a", kDemo, quiet());
  auto b = Session::from_file("b", kDemo, quiet());
  ASSERT_TRUE(a->submit_command("go to the kitchen and pick the bottle of water").compiled);
  EXPECT_TRUE(a->robot().held_item.has_value());
  EXPECT_FALSE(b->robot().held_item.has_value());
  EXPECT_FALSE(b->world().find_item("bottle_of_water")->held);
  EXPECT_EQ(b->robot().pose, *b->world().start);
}

TEST(Session, EventStreamOrdering) {
  Session s("s1", demo(), SessionConfig{});
  s.submit_command("go to the kitchen and pick the bottle of water");
  const auto events = s.events().snapshot();
  ASSERT_FALSE(events.empty());
  std::uint64_t prev = 0;
  int plan_at = -1, first_start = -1, open_step = -1;
  double last_state_t = -1, max_gap = 0;
  for (size_t i = 0; i < events.size(); ++i) {
    const auto& e = events[i];
    EXPECT_GT(e.seq, prev);
    prev = e.seq;
    if (e.type == "plan" && plan_at < 0) plan_at = static_cast<int>(i);
    if (e.type == "step_started") {
      if (first_start < 0) first_start = static_cast<int>(i);
      EXPECT_EQ(open_step, -1);
      open_step = e.payload.at("index").get<int>();
    }
    if (e.type == "step_finished") {
      EXPECT_EQ(open_step, e.payload.at("index").get<int>());
      open_step = -1;
    }
    if (e.type == "state") {
      if (last_state_t >= 0 && first_start >= 0) max_gap = std::max(max_gap, e.t_sim - last_state_t);
      last_state_t = e.t_sim;
    }
    const auto j = e.to_json();
    for (const char* k : {"seq", "type", "t_sim", "payload"}) EXPECT_TRUE(j.contains(k));
  }
  ASSERT_GE(plan_at, 0);
  EXPECT_LT(plan_at, first_start);
  EXPECT_EQ(open_step, -1);
  EXPECT_LE(max_gap, 0.1 + 1e-9);  // at least 10 Hz of simulated time
}

TEST(Bench, TrivialTaskAllSucceed) {
  BenchConfig cfg;
  cfg.map = demo();
  cfg.script = {"go to the human"};
  cfg.trials = 1;
  const auto r = run_bench(cfg);
  ASSERT_EQ(r.records.size(), 1u);
  EXPECT_EQ(r.records[0].trial, 1);
  EXPECT_DOUBLE_EQ(r.report.tasks[0].success_rate, 1.0);
}

TEST(Bench, DeterministicAndCdfWellFormed) {
  BenchConfig cfg;
  cfg.map = demo();
  cfg.script = {"bring the bottle of water to the human"};
  cfg.trials = 10;
  cfg.seed = 3;
  const auto a = run_bench(cfg), b = run_bench(cfg);
  std::ostringstream ca, cb;
  write_records_csv(ca, a.records);
  write_records_csv(cb, b.records);
  EXPECT_EQ(ca.str(), cb.str());
  EXPECT_EQ(report_to_json(a.report), report_to_json(b.report));
  EXPECT_EQ(a.records.size(), 50u);
  for (const auto& t : a.report.tasks) EXPECT_GE(t.success_rate, 0.7) << t.task;
  double prev = 0;
  for (const auto& p : a.report.cdf) {
    EXPECT_GE(p.cum_fraction, prev);
    prev = p.cum_fraction;
  }
  EXPECT_DOUBLE_EQ(a.report.cdf.back().cum_fraction, 1.0);
  cfg.seed = 4;
  std::ostringstream cc;
  write_records_csv(cc, run_bench(cfg).records);
  EXPECT_NE(ca.str(), cc.str());  // the seed drives the start jitter
}

TEST(Bench, CompileFailuresAreRecords) {
  BenchConfig cfg;
  cfg.map = demo();
  cfg.script = {"dance wildly", "go to the human"};
  cfg.trials = 2;
  const auto r = run_bench(cfg);
  ASSERT_EQ(r.records.size(), 4u);
  EXPECT_EQ(r.records[0].task, "compile");
  EXPECT_FALSE(r.records[0].success);
  EXPECT_TRUE(r.records[1].success);
}

TEST(Bench, InvalidArguments) {
  BenchConfig cfg;
  cfg.map = demo();
  cfg.script = {"go to the human"};
  cfg.trials = 0;
  EXPECT_THROW(run_bench(cfg), Error);
  cfg.trials = 1;
  cfg.script.clear();
  EXPECT_THROW(run_bench(cfg), Error);
}

TEST(Bench, ScriptLoaderSkipsCommentsAndBlanks) {
  const auto s = load_script(std::string(ROBOTIQ_DATA_DIR) + "/scripts/home_service.txt");
  ASSERT_EQ(s.size(), 1u);
  EXPECT_EQ(s[0], "bring the bottle of water to the human");
}
