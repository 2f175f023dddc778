#include <gtest/gtest.h>

#include <random>

#include "dclab/vhdl/vhdl.hpp"
#include "support.hpp"

using namespace dclab;
using L = LogicValue;

namespace {

const ComponentRegistry& reg() { return ComponentRegistry::builtin(); }

// round-half-up(100 * p / t) in exact integer arithmetic.
int oracle_score(std::size_t p, std::size_t t) { return static_cast<int>((200 * p + t) / (2 * t)); }

}  // namespace

TEST(Grade, CorrectCounterScoresFullMarks) {
  GradeReport r = grade(test::load_circuit("counter_mod60"), test::load_circuit("counter_mod60"),
                        test::load_test_points("counter"), reg());
  EXPECT_EQ(r.passed, 4U);
  EXPECT_EQ(r.total, 4U);
  EXPECT_EQ(r.score, 100);
}

TEST(Grade, WrongModulusFailsOnlyTheWrapPoint) {
  GradeReport r = grade(test::load_circuit("counter_mod100"), test::load_circuit("counter_mod60"),
                        test::load_test_points("counter"), reg());
  EXPECT_EQ(r.score, 75);
  ASSERT_EQ(r.per_test_point.size(), 4U);
  for (const auto& tp : r.per_test_point) {
    if (tp.id != "wrap") {
      EXPECT_EQ(tp.verdict, Verdict::Pass) << tp.id;
      continue;
    }
    EXPECT_EQ(tp.verdict, Verdict::Fail);
    ASSERT_TRUE(tp.first_mismatch);
    // The 60th edge sample: 59 becomes 0 in the reference and 60 in the submission.
    EXPECT_EQ(tp.first_mismatch->time_ns, 1'209'999'999U);
    EXPECT_EQ(tp.first_mismatch->signal, "tens[1]");
    EXPECT_EQ(tp.first_mismatch->expected, L::Zero);
    EXPECT_EQ(tp.first_mismatch->actual, L::One);
  }
}

TEST(Grade, AutoSampleTimesAgreeWithHandPickedOnes) {
  auto hand = test::load_test_points("counter");
  auto automatic = test::load_test_points("counter_auto");
  for (const char* sub : {"counter_mod60", "counter_mod100"}) {
    GradeReport a = grade(test::load_circuit(sub), test::load_circuit("counter_mod60"), hand, reg());
    GradeReport b = grade(test::load_circuit(sub), test::load_circuit("counter_mod60"), automatic, reg());
    ASSERT_EQ(a.per_test_point.size(), b.per_test_point.size());
    for (std::size_t i = 0; i < a.per_test_point.size(); ++i) {
      EXPECT_EQ(a.per_test_point[i].verdict, b.per_test_point[i].verdict) << sub;
    }
  }
}

TEST(Grade, BehaviouralVhdlCounterScoresFullMarks) {
  GradeReport r = grade(test::load_vhdl("counter60.vhd", "counter60"), test::load_circuit("counter_mod60"),
                        test::load_test_points("counter"), reg());
  EXPECT_EQ(r.score, 100);
}

TEST(Grade, CompileFailureFailsEveryPoint) {
  GradeReport r = grade(test::load_vhdl("broken.vhd"), test::load_circuit("counter_mod60"),
                        test::load_test_points("counter"), reg());
  EXPECT_EQ(r.score, 0);
  EXPECT_EQ(r.passed, 0U);
  EXPECT_FALSE(r.diagnostics.empty());
  for (const auto& tp : r.per_test_point) EXPECT_EQ(tp.verdict, Verdict::Fail);
}

TEST(Grade, MissingOutputFails) {
  GradeReport r = grade(test::load_circuit("fig3_nand"), test::load_circuit("counter_mod60"),
                        test::load_test_points("counter"), reg());
  EXPECT_EQ(r.score, 0);
}

TEST(Grade, BrokenReferenceIsAReferenceError) {
  EXPECT_THROW(grade(test::load_circuit("counter_mod60"), test::load_vhdl("broken.vhd"),
                     test::load_test_points("counter"), reg()),
               ReferenceError);
  EXPECT_THROW(check_reference(test::load_circuit("oscillation"), {[] {
                                 TestPoint tp;
                                 tp.id = "osc";
                                 tp.stimulus = test::load_stimulus("oscillation");
                                 tp.observed = {"y"};
                                 tp.sample_times_ns = {50};
                                 return tp;
                               }()},
                               reg()),
               ReferenceError);
}

TEST(Grade, ReflexiveOverCorpus) {
  for (const auto& e : test::corpus()) {
    Circuit c = test::load_circuit(e.circuit);
    if (c.top_outputs.empty()) continue;
    StimulusSet s = test::load_stimulus(e.stimulus);
    TestPoint tp{"auto", s, {}, default_sample_times(s, 0)};
    for (const auto& p : c.top_outputs) tp.observed.push_back(p.name);
    GradeReport r = grade(c, c, {tp}, reg());
    EXPECT_EQ(r.score, 100) << e.circuit;
  }
}

TEST(Grade, RepresentationInvariance) {
  for (const auto& e : test::corpus()) {
    Circuit c = test::load_circuit(e.circuit);
    if (c.top_outputs.empty() || c.top_inputs.empty()) continue;
    StimulusSet s = test::load_stimulus(e.stimulus);
    TestPoint tp{"auto", s, {}, default_sample_times(s, 0)};
    for (const auto& p : c.top_outputs) tp.observed.push_back(p.name);
    VhdlSource v;
    v.units = vhdl::emit_vhdl(c, reg());
    v.top = vhdl::top_entity_name(c);
    GradeReport a = grade(c, c, {tp}, reg());
    GradeReport b = grade(v, c, {tp}, reg());
    EXPECT_EQ(a.per_test_point, b.per_test_point) << e.circuit;
    EXPECT_EQ(a.score, b.score) << e.circuit;
  }
}

TEST(Grade, ReferenceXIsAWildcard) {
  // Reference output is X throughout (input unbound); any submission value matches.
  StimulusSet s = test::load_stimulus("fig3_nand");
  TestPoint tp{"x", s, {"y"}, default_sample_times(s, 0)};
  StimulusSet none{{}, s.horizon_ns};
  TestPoint blank{"x", none, {"y"}, {s.horizon_ns - 1}};
  EXPECT_EQ(grade(test::load_circuit("fig3_nand"), test::load_circuit("fig3_nand"), {blank}, reg()).score, 100);
  Circuit stuck = test::load_circuit("fig3_nand");
  EXPECT_EQ(grade(stuck, stuck, {tp}, reg()).score, 100);
}

TEST(Grade, SubmissionXAgainstKnownValueIsAMismatch) {
  StimulusSet s = test::load_stimulus("fig3_nand");
  TestPoint tp{"x", s, {"y"}, default_sample_times(s, 0)};
  // Same circuit with input b unconnected reads X.
  Circuit open = test::load_circuit("fig3_nand");
  for (auto& n : open.nets) {
    if (n.id == "b") n.endpoints.clear();
  }
  GradeReport r = grade(open, test::load_circuit("fig3_nand"), {tp}, reg());
  EXPECT_EQ(r.per_test_point[0].verdict, Verdict::Fail);
  ASSERT_TRUE(r.per_test_point[0].first_mismatch);
  EXPECT_EQ(r.per_test_point[0].first_mismatch->actual, L::X);
}

// Property: appending points keeps earlier verdicts.
TEST(Grade, AppendingPointsKeepsEarlierVerdicts) {
  auto tps = test::load_test_points("counter");
  Circuit sub = test::load_circuit("counter_mod100");
  Circuit ref = test::load_circuit("counter_mod60");
  std::vector<TestPoint> prefix;
  std::vector<TestPointResult> previous;
  for (const auto& tp : tps) {
    prefix.push_back(tp);
    GradeReport r = grade(sub, ref, prefix, reg());
    EXPECT_LE(r.score, 100);
    for (std::size_t i = 0; i < previous.size(); ++i) EXPECT_EQ(r.per_test_point[i], previous[i]);
    previous = r.per_test_point;
  }
}

TEST(Score, MatchesIntegerOracle) {
  for (std::size_t t = 1; t <= 60; ++t) {
    for (std::size_t p = 0; p <= t; ++p) EXPECT_EQ(score_percent(p, t), oracle_score(p, t)) << p << "/" << t;
  }
  EXPECT_EQ(score_percent(1, 8), 13);  // 12.5 rounds up
  EXPECT_EQ(score_percent(3, 4), 75);
}

TEST(SampleTimes, ConstantStimulus) {
  StimulusSet s{{{"a", SignalSpec::constant(L::One)}}, 100};
  EXPECT_EQ(default_sample_times(s, 50), (std::vector<TimeNs>{99}));
}

TEST(SampleTimes, ClockEdges) {
  StimulusSet s{{{"clk", SignalSpec::clock(50.0)}}, 40'000'000};
  EXPECT_EQ(default_sample_times(s, 0),
            (std::vector<TimeNs>{9'999'999, 19'999'999, 29'999'999, 39'999'999}));
}

TEST(SampleTimes, SortedUniqueWithinHorizon) {
  std::mt19937_64 rng(3);
  for (int i = 0; i < 100; ++i) {
    StimulusSet s;
    s.horizon_ns = 10 + rng() % 10'000;
    for (int k = 0; k < 3; ++k) {
      ChangeList e{{0, L::Zero}};
      for (int j = 0; j < 8; ++j) e.push_back({e.back().time_ns + 1 + rng() % 700, from_bool(j % 2 == 0)});
      s.assignments["i" + std::to_string(k)] = SignalSpec::pattern(e);
    }
    TimeNs settle = rng() % 500;
    auto t = default_sample_times(s, settle);
    ASSERT_FALSE(t.empty());
    EXPECT_EQ(t.back(), s.horizon_ns - 1);
    for (std::size_t k = 1; k < t.size(); ++k) EXPECT_LT(t[k - 1], t[k]);
    for (TimeNs x : t) EXPECT_TRUE(x + 1 > settle || x == s.horizon_ns - 1);
  }
}

TEST(Format, TestPointsRoundTrip) {
  auto tps = test::load_test_points("counter");
  EXPECT_EQ(serialize_test_points(deserialize_test_points(serialize_test_points(tps))), serialize_test_points(tps));
  EXPECT_EQ(deserialize_test_points(serialize_test_points(tps)).size(), 4U);
}

TEST(Format, TestPointInvariants) {
  TestPoint tp{"t", StimulusSet{{}, 100}, {}, {10}};
  EXPECT_THROW(tp.check(), ContractError);
  tp.observed = {"y"};
  tp.sample_times_ns = {20, 10};
  EXPECT_THROW(tp.check(), ContractError);
  tp.sample_times_ns = {200};
  EXPECT_THROW(tp.check(), ContractError);
}

TEST(Format, ReportRoundTrip) {
  GradeReport r = grade(test::load_circuit("counter_mod100"), test::load_circuit("counter_mod60"),
                        test::load_test_points("counter"), reg());
  EXPECT_EQ(parse_grade_report(grade_report_json(r)), r);
}
