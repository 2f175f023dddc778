#include <gtest/gtest.h>
#include <sqlite3.h>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <random>
#include <unistd.h>

#include "dclab/service/seed.hpp"
#include "dclab/service/service.hpp"
#include "dclab/trace.hpp"
#include "support.hpp"

using namespace dclab;
using namespace dclab::service;
namespace fs = std::filesystem;

namespace {

std::string netlist_payload(const std::string& circuit) {
  return R"({"repr":"NETLIST","netlist":)" + test::fixture("circuits/" + circuit + ".json") + "}";
}

std::string vhdl_payload(const std::string& file, const std::string& top) {
  Design d = test::load_vhdl(file, top);
  return design_payload(d);
}

fs::path scratch_dir(const std::string& tag) {
  static int counter = 0;
  fs::path p = fs::temp_directory_path() /
               ("dclab_service_" + tag + "_" + std::to_string(::getpid()) + "_" + std::to_string(++counter));
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

int expect_status(const std::function<void()>& f, const std::string& code) {
  try {
    f();
  } catch (const ServiceError& e) {
    EXPECT_EQ(e.code(), code) << e.what();
    return e.status();
  }
  ADD_FAILURE() << "expected " << code;
  return 0;
}

class ServiceTest : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = scratch_dir("svc");
    cfg_.store_path = (dir_ / "store.db").string();
    cfg_.timezone = "UTC";
    clock_.set(parse_time("2024-03-01T09:00:00Z"));
    svc_ = std::make_unique<Service>(cfg_, ComponentRegistry::builtin(), clock_);
    teacher_ = svc_->create_user(nullptr, "teacher", Role::Instructor, "secret-t");
    for (int i = 1; i <= 3; ++i) {
      students_.push_back(svc_->create_user(&teacher_, "s" + std::to_string(i), Role::Student, "secret-s"));
    }
    example_ = svc_->create_project(teacher_, Column::Example, "counter", Repr::Netlist,
                                    netlist_payload("counter_mod60"), test::fixture("stimuli/counter.json"));
  }

  void TearDown() override {
    svc_.reset();
    fs::remove_all(dir_);
  }

  Id post(const std::vector<Id>& roster, Millis deadline, RequiredRepr req = RequiredRepr::Either) {
    return svc_->post_assignment(teacher_, "counter", example_.id, test::load_test_points("counter"), req, deadline,
                                 roster);
  }

  Id homework_of(const User& u, Id assignment) {
    for (const auto& p : svc_->home(u).homework) {
      if (p.assignment_id == assignment) return p.id;
    }
    return 0;
  }

  std::size_t count_rows(const std::string& table) {
    sqlite3* db = nullptr;
    sqlite3_open_v2(cfg_.store_path.c_str(), &db, SQLITE_OPEN_READONLY, nullptr);
    sqlite3_stmt* st = nullptr;
    sqlite3_prepare_v2(db, ("SELECT COUNT(*) FROM " + table).c_str(), -1, &st, nullptr);
    sqlite3_step(st);
    auto n = static_cast<std::size_t>(sqlite3_column_int64(st, 0));
    sqlite3_finalize(st);
    sqlite3_close(db);
    return n;
  }

  std::vector<Id> roster_ids() {
    std::vector<Id> r;
    for (const auto& s : students_) r.push_back(s.id);
    return r;
  }

  fs::path dir_;
  ServiceConfig cfg_;
  ManualClock clock_;
  std::unique_ptr<Service> svc_;
  User teacher_;
  std::vector<User> students_;
  Project example_;
};

}  // namespace

TEST_F(ServiceTest, LoginAndAuthenticate) {
  std::string token = svc_->login("s1", "secret-s");
  EXPECT_GE(token.size(), 32U);
  EXPECT_EQ(svc_->authenticate(token).id, students_[0].id);
  EXPECT_NE(svc_->login("s1", "secret-s"), token);
  EXPECT_EQ(expect_status([&] { svc_->login("s1", "wrong"); }, "UNAUTHORIZED"), 401);
  EXPECT_EQ(expect_status([&] { svc_->login("ghost", "secret-s"); }, "UNAUTHORIZED"), 401);
  EXPECT_EQ(expect_status([&] { svc_->authenticate("deadbeef"); }, "UNAUTHORIZED"), 401);
}

TEST_F(ServiceTest, AccountRules) {
  EXPECT_EQ(expect_status([&] { svc_->create_user(&students_[0], "x1", Role::Student, "secret-x"); }, "FORBIDDEN"),
            403);
  expect_status([&] { svc_->create_user(nullptr, "x2", Role::Student, "secret-x"); }, "FORBIDDEN");
  expect_status([&] { svc_->create_user(&teacher_, "s1", Role::Student, "secret-x"); }, "NAME_TAKEN");
  expect_status([&] { svc_->create_user(&teacher_, "bad name", Role::Student, "secret-x"); }, "BAD_NAME");
  expect_status([&] { svc_->create_user(&teacher_, "x3", Role::Student, "123"); }, "WEAK_PASSWORD");
}

TEST_F(ServiceTest, StudentCannotModifyAnExample) {
  svc_->set_example_visibility(teacher_, example_.id, true);
  try {
    svc_->update_project(students_[0], example_.id, std::string("mine"), std::nullopt, std::nullopt);
    FAIL();
  } catch (const ServiceError& e) {
    EXPECT_EQ(e.status(), 403);
    EXPECT_NE(std::string(e.what()).find("do not have permissions to modify an example project"), std::string::npos);
  }
  Project p = svc_->update_project(teacher_, example_.id, std::string("renamed"), std::nullopt, std::nullopt);
  EXPECT_EQ(p.title, "renamed");
}

TEST_F(ServiceTest, ExampleVisibility) {
  expect_status([&] { svc_->get_project(students_[0], example_.id); }, "FORBIDDEN");
  EXPECT_TRUE(svc_->home(students_[0]).example.empty());
  EXPECT_EQ(svc_->home(teacher_).example.size(), 1U);
  svc_->set_example_visibility(teacher_, example_.id, true);
  EXPECT_EQ(svc_->get_project(students_[0], example_.id).id, example_.id);
  EXPECT_EQ(svc_->home(students_[0]).example.size(), 1U);
  expect_status([&] { svc_->set_example_visibility(students_[0], example_.id, false); }, "FORBIDDEN");
  // Students may simulate a visible example without owning it.
  auto view = svc_->simulate(students_[0], svc_->get_project(students_[0], example_.id).design,
                             R"({"format_version":1,"horizon_ns":50000000,"assignments":{"clk":{"kind":"CLOCK","freq_hz":50}}})",
                             WatchMode::Ports);
  EXPECT_FALSE(view.result.fault);
  EXPECT_EQ(view.vcd, export_vcd(view.result.trace));
}

TEST_F(ServiceTest, ProjectPermissionMatrix) {
  const User& s1 = students_[0];
  const User& s2 = students_[1];
  expect_status([&] { svc_->create_project(s1, Column::Example, "e", Repr::Netlist, "", ""); }, "FORBIDDEN");
  expect_status([&] { svc_->create_project(s1, Column::Homework, "h", Repr::Netlist, "", ""); }, "FORBIDDEN");
  expect_status([&] { svc_->create_project(teacher_, Column::Homework, "h", Repr::Netlist, "", ""); }, "FORBIDDEN");
  expect_status([&] { svc_->create_project(s1, Column::Attention, "a", Repr::Netlist, "", ""); }, "BAD_COLUMN");
  expect_status([&] { svc_->create_project(s1, Column::Playground, "p", Repr::Vhdl, netlist_payload("fig3_nand"), ""); },
                "REPR_MISMATCH");
  expect_status([&] { svc_->create_project(s1, Column::Playground, "p", Repr::Netlist, "", "{]"); }, "BAD_STIMULUS");

  Project mine = svc_->create_project(s1, Column::Playground, "p", Repr::Netlist, netlist_payload("fig3_nand"),
                                      test::fixture("stimuli/fig3_nand.json"));
  expect_status([&] { svc_->get_project(s2, mine.id); }, "FORBIDDEN");
  expect_status([&] { svc_->update_project(s2, mine.id, std::string("x"), std::nullopt, std::nullopt); }, "FORBIDDEN");
  expect_status([&] { svc_->submit(s2, mine.id, "", ""); }, "FORBIDDEN");
  expect_status([&] { svc_->submission_history(s2, mine.id); }, "FORBIDDEN");
  EXPECT_EQ(svc_->get_project(teacher_, mine.id).id, mine.id);
  expect_status([&] { svc_->get_project(s1, 9999); }, "NOT_FOUND");
  expect_status([&] { svc_->submit(teacher_, example_.id, "", ""); }, "NOT_SUBMITTABLE");
  expect_status([&] { svc_->assignment_stats(s1, 1); }, "FORBIDDEN");
}

TEST_F(ServiceTest, NoticesReachEveryStudentWithAuthorAndDate) {
  clock_.set(parse_time("2024-03-02T10:30:00Z"));
  expect_status([&] { svc_->post_notice(students_[0], "x", "y"); }, "FORBIDDEN");
  svc_->post_notice(teacher_, "Lab closed", "No lab on Friday.");
  clock_.set(parse_time("2024-03-03T10:30:00Z"));
  svc_->post_notice(teacher_, "Lab open", "");
  for (const auto& s : students_) {
    auto notes = svc_->home(s).attention;
    ASSERT_EQ(notes.size(), 2U);
    EXPECT_EQ(notes[0].title, "Lab open");
    EXPECT_EQ(notes[1].author_name, "teacher");
    EXPECT_EQ(notes[1].posted_at, parse_time("2024-03-02T10:30:00Z"));
  }
}

TEST_F(ServiceTest, FanOutCreatesOneHomeworkProjectPerStudent) {
  Id a = post(roster_ids(), parse_time("2024-03-10T00:00:00Z"));
  for (const auto& s : students_) {
    auto hw = svc_->home(s).homework;
    ASSERT_EQ(hw.size(), 1U);
    EXPECT_EQ(hw[0].assignment_id, a);
    EXPECT_EQ(hw[0].owner, s.id);
    EXPECT_TRUE(hw[0].design.empty());
  }
  Assignment got = svc_->get_assignment(students_[0], a);
  EXPECT_EQ(got.roster.size(), 3U);
  EXPECT_EQ(got.test_points.size(), 4U);
}

TEST_F(ServiceTest, EmptyRosterCreatesNoProjects) {
  std::size_t before = count_rows("projects");
  Id a = post({}, parse_time("2024-03-10T00:00:00Z"));
  EXPECT_GT(a, 0);
  EXPECT_EQ(count_rows("projects"), before);
  CohortStats st = svc_->assignment_stats(teacher_, a);
  EXPECT_EQ(st.roster_size, 0U);
  EXPECT_EQ(st.submitted_count, 0U);
  EXPECT_TRUE(st.tries_before_success.empty());
  EXPECT_EQ(st.total_submissions, 0U);
}

TEST_F(ServiceTest, FanOutIsAllOrNothing) {
  std::size_t projects = count_rows("projects");
  std::size_t assignments = count_rows("assignments");
  svc_->set_fanout_hook([](std::size_t written) {
    if (written == 2) throw std::runtime_error("injected crash");
  });
  EXPECT_THROW(post(roster_ids(), parse_time("2024-03-10T00:00:00Z")), std::runtime_error);
  EXPECT_EQ(count_rows("projects"), projects);
  EXPECT_EQ(count_rows("assignments"), assignments);
  EXPECT_EQ(count_rows("roster"), 0U);
  svc_->set_fanout_hook({});
  post(roster_ids(), parse_time("2024-03-10T00:00:00Z"));
  EXPECT_EQ(count_rows("projects"), projects + 3);
}

TEST_F(ServiceTest, BrokenReferenceIsRejectedWithoutChanges) {
  auto tps = test::load_test_points("counter");
  tps[2].stimulus.assignments["rst"] = SignalSpec::constant(LogicValue::Zero);
  std::size_t projects = count_rows("projects");
  try {
    svc_->post_assignment(teacher_, "bad", example_.id, tps, RequiredRepr::Either, 0, roster_ids());
    FAIL();
  } catch (const ServiceError& e) {
    EXPECT_EQ(e.code(), "REFERENCE_FAILS");
    EXPECT_NE(std::string(e.what()).find(tps[2].id), std::string::npos);
  }
  EXPECT_EQ(count_rows("projects"), projects);
  EXPECT_EQ(count_rows("assignments"), 0U);
}

TEST_F(ServiceTest, AssignmentInputChecks) {
  expect_status([&] { post({students_[0].id, students_[0].id}, 0); }, "BAD_ROSTER");
  expect_status([&] { post({teacher_.id}, 0); }, "BAD_ROSTER");
  expect_status([&] { svc_->post_assignment(teacher_, "x", example_.id, {}, RequiredRepr::Either, 0, {}); },
                "BAD_TEST_POINTS");
  Project play = svc_->create_project(students_[0], Column::Playground, "p", Repr::Netlist, "", "");
  expect_status([&] { svc_->post_assignment(teacher_, "x", play.id, test::load_test_points("counter"),
                                            RequiredRepr::Either, 0, {}); },
                "NOT_EXAMPLE");
  expect_status([&] { svc_->post_assignment(students_[0], "x", example_.id, test::load_test_points("counter"),
                                            RequiredRepr::Either, 0, {}); },
                "FORBIDDEN");
}

TEST_F(ServiceTest, GradedSubmissionsAndArtifacts) {
  Id a = post(roster_ids(), parse_time("2024-03-10T00:00:00Z"));
  Id p = homework_of(students_[0], a);
  EXPECT_TRUE(svc_->submission_history(students_[0], p).empty());

  Submission wrong = svc_->submit(students_[0], p, netlist_payload("counter_mod100"), "");
  EXPECT_EQ(wrong.status, "GRADED");
  ASSERT_TRUE(wrong.report);
  EXPECT_EQ(wrong.report->score, 75);

  Submission right = svc_->submit(students_[0], p, vhdl_payload("counter60.vhd", "counter60"), "");
  EXPECT_EQ(right.report->score, 100);
  EXPECT_EQ(svc_->get_project(students_[0], p).repr, Repr::Vhdl);

  // The stored trace is the VCD of test point 1 on the submitted design.
  auto vcd = svc_->submission_trace(students_[0], right.id);
  ASSERT_TRUE(vcd);
  TestPoint first = test::load_test_points("counter")[0];
  SimConfig cfg;
  cfg.horizon_ns = first.stimulus.horizon_ns;
  cfg.watch = WatchMode::Ports;
  EXPECT_EQ(*vcd, export_vcd(simulate_design(test::load_vhdl("counter60.vhd", "counter60"), first.stimulus, cfg,
                                             ComponentRegistry::builtin())
                                 .trace));
  std::string log = svc_->submission_log(students_[0], right.id);
  EXPECT_NE(log.find("COMPILED"), std::string::npos);
  EXPECT_NE(log.find("TEST_POINT wrap PASS"), std::string::npos);

  Submission broken = svc_->submit(students_[0], p, vhdl_payload("broken.vhd", ""), "");
  EXPECT_EQ(broken.report->score, 0);
  EXPECT_NE(svc_->submission_log(students_[0], broken.id).find("SYNTAX"), std::string::npos);

  Submission junk = svc_->submit(students_[0], p, "{not json", "");
  EXPECT_EQ(junk.status, "REJECTED");

  auto history = svc_->submission_history(students_[0], p);
  ASSERT_EQ(history.size(), 4U);
  EXPECT_EQ(history[0].id, wrong.id);
  EXPECT_EQ(history[3].id, junk.id);
  expect_status([&] { svc_->get_submission(students_[1], wrong.id); }, "FORBIDDEN");
  EXPECT_EQ(svc_->get_submission(teacher_, wrong.id).report, wrong.report);
}

TEST_F(ServiceTest, RequiredReprIsEnforced) {
  Id a = post(roster_ids(), parse_time("2024-03-10T00:00:00Z"), RequiredRepr::Netlist);
  Id p = homework_of(students_[0], a);
  Submission s = svc_->submit(students_[0], p, vhdl_payload("counter60.vhd", "counter60"), "");
  EXPECT_EQ(s.status, "REJECTED");
  EXPECT_EQ(s.report->score, 0);
}

TEST_F(ServiceTest, PlaygroundSubmissionSimulates) {
  Project play = svc_->create_project(students_[0], Column::Playground, "p", Repr::Netlist,
                                      netlist_payload("fig3_nand"), test::fixture("stimuli/fig3_nand.json"));
  Submission s = svc_->submit(students_[0], play.id, "", "");
  EXPECT_EQ(s.status, "SIMULATED");
  EXPECT_FALSE(s.report);
  auto vcd = svc_->submission_trace(students_[0], s.id);
  ASSERT_TRUE(vcd);
  EXPECT_EQ(*vcd, export_vcd(test::run(test::load_circuit("fig3_nand"), test::load_stimulus("fig3_nand"),
                                       WatchMode::AllNets)
                                 .trace));
}

TEST_F(ServiceTest, SubmissionsAreImmutable) {
  Id a = post(roster_ids(), parse_time("2024-03-10T00:00:00Z"));
  Id p = homework_of(students_[0], a);
  Submission s = svc_->submit(students_[0], p, netlist_payload("counter_mod100"), "");
  // Later API activity leaves the recorded row alone.
  svc_->update_project(students_[0], p, std::string("renamed"), netlist_payload("counter_mod60"), std::nullopt);
  svc_->submit(students_[0], p, "", "");
  Submission again = svc_->get_submission(students_[0], s.id);
  EXPECT_EQ(again.report, s.report);
  EXPECT_EQ(again.submitted_at, s.submitted_at);
  EXPECT_EQ(again.design, s.design);

  sqlite3* db = nullptr;
  ASSERT_EQ(sqlite3_open(cfg_.store_path.c_str(), &db), SQLITE_OK);
  char* err = nullptr;
  EXPECT_NE(sqlite3_exec(db, "UPDATE submissions SET score = 100", nullptr, nullptr, &err), SQLITE_OK);
  sqlite3_free(err);
  EXPECT_NE(sqlite3_exec(db, "DELETE FROM submissions", nullptr, nullptr, &err), SQLITE_OK);
  sqlite3_free(err);
  sqlite3_close(db);
  EXPECT_EQ(svc_->submission_history(students_[0], p).size(), 2U);
}

TEST_F(ServiceTest, DeadlineBoundary) {
  Millis deadline = parse_time("2024-03-10T00:00:00Z");
  Id a = post(roster_ids(), deadline);
  Id p = homework_of(students_[0], a);
  clock_.set(deadline);
  svc_->submit(students_[0], p, netlist_payload("counter_mod100"), "");
  clock_.set(deadline + 1);
  Submission late = svc_->submit(students_[0], p, netlist_payload("counter_mod60"), "");
  EXPECT_EQ(late.report->score, 100);
  CohortStats st = svc_->assignment_stats(teacher_, a);
  auto rec = std::find_if(st.students.begin(), st.students.end(),
                          [&](const StatisticsRecord& r) { return r.student == students_[0].id; });
  ASSERT_NE(rec, st.students.end());
  EXPECT_EQ(rec->final_score, 75);
  EXPECT_EQ(rec->submission_count, 2U);
}

TEST_F(ServiceTest, SevenTriesCountSeven) {
  Id a = post(roster_ids(), parse_time("2024-03-10T00:00:00Z"));
  Id p = homework_of(students_[1], a);
  for (int i = 0; i < 6; ++i) {
    clock_.set(parse_time("2024-03-05T10:00:00Z") + i * 60'000);
    svc_->submit(students_[1], p, netlist_payload("counter_mod100"), "");
  }
  svc_->submit(students_[1], p, netlist_payload("counter_mod60"), "");
  CohortStats st = svc_->assignment_stats(teacher_, a);
  EXPECT_EQ(st.tries_before_success, (std::map<std::size_t, std::size_t>{{7, 1}}));
  EXPECT_EQ(st.solved_count, 1U);
  EXPECT_EQ(st.submitted_count, 1U);
  EXPECT_EQ(st.hourly[10], 7U);
  for (const auto& r : st.students) {
    if (r.student == students_[1].id) {
      EXPECT_EQ(r.submission_count, 7U);
      EXPECT_EQ(r.submission_scores.back(), 100);
    }
  }
  EXPECT_EQ(svc_->rebuild_stats(a), st);
}

TEST(FinalScore, MatchesDefinitionOnRandomSequences) {
  std::mt19937_64 rng(17);
  for (int i = 0; i < 500; ++i) {
    Millis deadline = 1'000'000;
    std::vector<Millis> times;
    std::vector<int> scores;
    int n = static_cast<int>(rng() % 10);
    Millis t = 990'000 + static_cast<Millis>(rng() % 10'000);
    for (int k = 0; k < n; ++k) {
      times.push_back(t);
      scores.push_back(static_cast<int>(rng() % 5) * 25);
      t += static_cast<Millis>(rng() % 3000);
    }
    int expect = 0;
    for (int k = 0; k < n; ++k) {
      if (times[static_cast<std::size_t>(k)] <= deadline) expect = std::max(expect, scores[static_cast<std::size_t>(k)]);
    }
    EXPECT_EQ(final_score(times, scores, deadline), expect);
  }
}

TEST(Stats, SummarizeHistograms) {
  StatisticsRecord a{1, "a", 2, {parse_time("2024-03-05T23:30:00Z"), parse_time("2024-03-06T00:10:00Z")}, {50, 100}, 100};
  StatisticsRecord b{2, "b", 0, {}, {}, 0};
  CohortStats st = summarize(9, {a, b}, 8 * 60, "+08:00");
  EXPECT_EQ(st.roster_size, 2U);
  EXPECT_EQ(st.submitted_count, 1U);
  EXPECT_EQ(st.solved_count, 1U);
  EXPECT_EQ(st.tries_before_success, (std::map<std::size_t, std::size_t>{{2, 1}}));
  EXPECT_EQ(st.hourly[7], 1U);
  EXPECT_EQ(st.hourly[8], 1U);
  EXPECT_EQ(st.total_submissions, 2U);
}

TEST(Seed, CohortMatchesTheReportedAggregates) {
  fs::path dir = scratch_dir("seed");
  ServiceConfig cfg;
  cfg.store_path = (dir / "s.db").string();
  cfg.blob_dir = (dir / "blobs").string();
  ManualClock clock;
  {
    Service svc(cfg, ComponentRegistry::builtin(), clock);
    SeedReport rep = seed_demo(svc, clock);
    User teacher = svc.authenticate(svc.login(rep.instructor, "dclab-demo"));
    CohortStats st = svc.assignment_stats(teacher, rep.assignment);
    EXPECT_EQ(st.roster_size, 31U);
    EXPECT_EQ(st.submitted_count, 17U);
    EXPECT_EQ(st.solved_count, 10U);
    EXPECT_GE(st.tries_before_success[1], 3U);
    EXPECT_GE(st.tries_before_success[7], 1U);
    std::size_t hourly = 0;
    for (auto h : st.hourly) hourly += h;
    EXPECT_EQ(hourly, st.total_submissions);
    EXPECT_EQ(st.total_submissions, rep.submissions);
    // Students 1, 2 and 10 solve on their first try; student 3 needs seven.
    for (const auto& r : st.students) {
      if (r.name == "student01" || r.name == "student02" || r.name == "student10") {
        ASSERT_FALSE(r.submission_scores.empty());
        EXPECT_EQ(r.submission_scores.front(), 100) << r.name;
      }
      if (r.name == "student03") EXPECT_EQ(r.submission_count, 7U);
    }
    EXPECT_EQ(svc.rebuild_stats(rep.assignment), st);
    EXPECT_FALSE(fs::is_empty(dir / "blobs"));
    EXPECT_THROW(seed_demo(svc, clock), ServiceError);
  }
  fs::remove_all(dir);
}

TEST(Seed, DemoFilesMatchTheFixtures) {
  EXPECT_EQ(demo_file("counter_mod60.json"), test::fixture("circuits/counter_mod60.json"));
  EXPECT_EQ(demo_file("counter_mod100.json"), test::fixture("circuits/counter_mod100.json"));
  EXPECT_EQ(demo_file("counter_testpoints.json"), test::fixture("testpoints/counter.json"));
  EXPECT_EQ(demo_file("counter60.vhd"), test::fixture("vhdl/counter60.vhd"));
  EXPECT_EQ(demo_file("broken.vhd"), test::fixture("vhdl/broken.vhd"));
  EXPECT_EQ(demo_file("counter_stimulus.json"), test::fixture("stimuli/counter.json"));
  EXPECT_THROW(demo_file("nope"), Error);
}

TEST(Time, FormatAndParse) {
  EXPECT_EQ(parse_time("1970-01-01T00:00:00Z"), 0);
  EXPECT_EQ(format_time(0), "1970-01-01T00:00:00.000Z");
  EXPECT_EQ(parse_time("2024-03-11T23:59Z"), parse_time("2024-03-11T23:59:00.000Z"));
  EXPECT_EQ(parse_time("2024-03-12T07:59:00+08:00"), parse_time("2024-03-11T23:59:00Z"));
  EXPECT_EQ(parse_time("1969-12-31T23:59:59.999Z"), -1);
  for (Millis t : {Millis{0}, Millis{1'709'596'800'123}, Millis{951'782'400'000}, Millis{-86'400'001}}) {
    EXPECT_EQ(parse_time(format_time(t)), t);
  }
  EXPECT_THROW(parse_time("2024-13-01T00:00Z"), FormatError);
  EXPECT_THROW(parse_time("yesterday"), FormatError);
}

TEST(Config, OffsetsAndOverrides) {
  EXPECT_EQ(parse_utc_offset("UTC"), 0);
  EXPECT_EQ(parse_utc_offset("+08:00"), 480);
  EXPECT_EQ(parse_utc_offset("-0530"), -330);
  EXPECT_EQ(parse_utc_offset("UTC+02:00"), 120);
  EXPECT_THROW(parse_utc_offset("Europe/Paris"), FormatError);

  fs::path dir = scratch_dir("cfg");
  {
    std::ofstream f(dir / "c.json");
    f << R"({"listen": "0.0.0.0:9000", "store": "data/x.db", "timezone": "+08:00", "max_deltas_per_instant": 50})";
  }
  ServiceConfig cfg = load_config((dir / "c.json").string());
  EXPECT_EQ(cfg.listen_host, "0.0.0.0");
  EXPECT_EQ(cfg.listen_port, 9000);
  EXPECT_EQ(fs::path(cfg.store_path), dir / "data/x.db");
  EXPECT_EQ(cfg.max_deltas_per_instant, 50U);

  std::map<std::string, std::string> env{{"DCLAB_LISTEN", ":7000"}, {"DCLAB_TIMEZONE", "UTC"}};
  apply_env(cfg, [&](const char* k) -> std::optional<std::string> {
    auto it = env.find(k);
    if (it == env.end()) return std::nullopt;
    return it->second;
  });
  EXPECT_EQ(cfg.listen_port, 7000);
  EXPECT_EQ(cfg.timezone, "UTC");

  {
    std::ofstream f(dir / "bad.json");
    f << R"({"listen": "0.0.0.0:9000", "colour": "red"})";
  }
  EXPECT_THROW(load_config((dir / "bad.json").string()), FormatError);
  fs::remove_all(dir);
}

TEST(Payload, RoundTrip) {
  Design n = parse_design_payload(netlist_payload("fig3_nand"));
  EXPECT_EQ(std::get<Circuit>(n), test::load_circuit("fig3_nand"));
  Design v = parse_design_payload(vhdl_payload("counter60.vhd", "counter60"));
  EXPECT_EQ(std::get<VhdlSource>(v).top, "counter60");
  EXPECT_EQ(design_payload(parse_design_payload(design_payload(v))), design_payload(v));
  try {
    parse_design_payload(R"({"repr":"NETLIST","netlist":{"format_version":1,"name":3}})");
    FAIL();
  } catch (const FormatError& e) {
    EXPECT_EQ(e.path().rfind("/netlist", 0), 0U);
  }
  EXPECT_THROW(parse_design_payload(R"({"repr":"VHDL","files":[]})"), FormatError);
  EXPECT_THROW(parse_design_payload(R"({"repr":"PCB"})"), FormatError);
}
