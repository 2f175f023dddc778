#include <gtest/gtest.h>

#include <chrono>
#include <map>
#include <sstream>

#include "dclab/trace.hpp"
#include "support.hpp"

using namespace dclab;
using L = LogicValue;

namespace {

int digit(const Trace& t, const std::string& base, TimeNs at) {
  int v = 0;
  for (int b = 0; b < 4; ++b) {
    L bit = sample(t, base + "[" + std::to_string(b) + "]", at);
    if (!is_known(bit)) return -1;
    if (bit == L::One) v |= 1 << b;
  }
  return v;
}

}  // namespace

TEST(Counter, CountsZeroToFiftyNineAndWraps) {
  Circuit c = test::load_circuit("counter_mod60");
  StimulusSet s = test::load_stimulus("counter");
  s.horizon_ns = 1'230'000'000;
  auto started = std::chrono::steady_clock::now();
  SimResult r = test::run(c, s, WatchMode::Ports);
  double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
  ASSERT_FALSE(r.fault);
  EXPECT_LT(seconds, 5.0);
  // Sample just before rising edge n (edges at 10 ms + 20 ms * n).
  for (int n = 0; n <= 60; ++n) {
    TimeNs t = 10'000'000ULL + 20'000'000ULL * static_cast<TimeNs>(n) - 1;
    int expect = n % 60;
    EXPECT_EQ(digit(r.trace, "ones", t), expect % 10) << "edge " << n;
    EXPECT_EQ(digit(r.trace, "tens", t), expect / 10) << "edge " << n;
  }
}

TEST(Counter, SevenSegmentOutputsFollowTheCount) {
  Circuit c = test::load_circuit("counter_mod60");
  SimResult r = test::run(c, test::load_stimulus("counter"));
  ASSERT_FALSE(r.fault);
  // Digit 0 lights every segment except g.
  TimeNs t = 9'999'999;
  for (const char* seg : {"a", "b", "c", "d", "e", "f"}) EXPECT_EQ(sample(r.trace, std::string("ones_") + seg, t), L::One);
  EXPECT_EQ(sample(r.trace, "ones_g", t), L::Zero);
}

TEST(Faults, ZeroDelayLoopIsAnOscillation) {
  SimResult r = test::run(test::load_circuit("oscillation"), test::load_stimulus("oscillation"));
  ASSERT_TRUE(r.fault);
  EXPECT_EQ(r.fault->code, "OSCILLATION");
  EXPECT_EQ(r.fault->time_ns, 0U);
  EXPECT_FALSE(r.fault->nets.empty());
  EXPECT_TRUE(r.log.has("OSCILLATION"));
}

TEST(Faults, DeltaLimitIsConfigurable) {
  SimConfig cfg;
  cfg.horizon_ns = 100;
  cfg.max_deltas_per_instant = 3;
  SimResult r = simulate(test::load_circuit("oscillation"), test::load_stimulus("oscillation"), cfg,
                         ComponentRegistry::builtin());
  ASSERT_TRUE(r.fault);
  EXPECT_EQ(r.fault->code, "OSCILLATION");
}

TEST(Ring, ThreeInvertersOscillateWithSixGateDelays) {
  SimResult r = test::run(test::load_circuit("ring3"), test::load_stimulus("ring3"));
  ASSERT_FALSE(r.fault);
  const TraceSignal* r1 = r.trace.find("r1");
  ASSERT_NE(r1, nullptr);
  ASSERT_GT(r1->changes.size(), 10U);
  for (std::size_t k = 3; k < r1->changes.size(); ++k) {
    EXPECT_EQ(r1->changes[k].time_ns - r1->changes[k - 2].time_ns, 60U);
  }
}

TEST(Trace, WellFormed) {
  for (const auto& e : test::corpus()) {
    SimResult r = test::run(test::load_circuit(e.circuit), test::load_stimulus(e.stimulus), WatchMode::AllNets);
    for (const auto& sig : r.trace.signals) {
      ASSERT_FALSE(sig.changes.empty()) << e.circuit << " " << sig.label;
      EXPECT_EQ(sig.changes.front().time_ns, 0U);
      for (std::size_t k = 1; k < sig.changes.size(); ++k) {
        EXPECT_LT(sig.changes[k - 1].time_ns, sig.changes[k].time_ns);
        EXPECT_NE(sig.changes[k - 1].value, sig.changes[k].value);
        EXPECT_LE(sig.changes[k].time_ns, r.trace.horizon_ns);
      }
    }
  }
}

TEST(Trace, AllNetsLabelsInternalNets) {
  SimResult r = test::run(test::load_circuit("counter_mod60"), test::load_stimulus("counter"), WatchMode::AllNets);
  bool internal = false;
  for (const auto& s : r.trace.signals) internal = internal || s.label.rfind("n_", 0) == 0;
  EXPECT_TRUE(internal);
  EXPECT_NE(r.trace.find("clk"), nullptr);
}

TEST(Trace, SampleRejectsUnknownSignalAndLateTimes) {
  SimResult r = test::run(test::load_circuit("fig3_nand"), test::load_stimulus("fig3_nand"));
  EXPECT_THROW(sample(r.trace, "nope", 0), ContractError);
  EXPECT_THROW(sample(r.trace, "y", r.trace.horizon_ns + 1), ContractError);
}

TEST(Stimulus, UnboundInputIsXWithAWarning) {
  StimulusSet empty;
  empty.horizon_ns = 100;
  SimResult r = test::run(test::load_circuit("fig3_nand"), empty);
  EXPECT_TRUE(r.log.has("UNBOUND_INPUT"));
  EXPECT_EQ(sample(r.trace, "a", 50), L::X);
}

TEST(Stimulus, UnknownNameIsAContractError) {
  StimulusSet s = test::load_stimulus("fig3_nand");
  s.assignments["ghost"] = SignalSpec::constant(L::One);
  EXPECT_THROW(test::run(test::load_circuit("fig3_nand"), s), ContractError);
}

TEST(Determinism, RepeatedRunsGiveIdenticalVcd) {
  for (const auto& e : test::corpus()) {
    Circuit c = test::load_circuit(e.circuit);
    StimulusSet s = test::load_stimulus(e.stimulus);
    std::string first = export_vcd(test::run(c, s, WatchMode::AllNets).trace);
    for (int i = 0; i < 3; ++i) EXPECT_EQ(export_vcd(test::run(c, s, WatchMode::AllNets).trace), first) << e.circuit;
  }
}

TEST(Vcd, HeaderAndValues) {
  SimResult r = test::run(test::load_circuit("fig3_nand"), test::load_stimulus("fig3_nand"));
  std::string vcd = export_vcd(r.trace);
  EXPECT_NE(vcd.find("$timescale 1ns $end"), std::string::npos);
  EXPECT_NE(vcd.find("$enddefinitions $end"), std::string::npos);
  EXPECT_NE(vcd.find("#0"), std::string::npos);
}

class RandomCombinational : public ::testing::TestWithParam<int> {};

TEST_P(RandomCombinational, MatchesBruteForceEvaluation) {
  const int seed = GetParam();
  const int inputs = 2 + seed % 11;  // 2..12
  test::RandomCircuit rc = test::random_circuit(static_cast<std::uint64_t>(seed), inputs, 4 + seed % 17);
  ASSERT_TRUE(validate_circuit(rc.circuit, ComponentRegistry::builtin()).ok()) << rc.circuit.name;
  EXPECT_EQ(test::oracle_mismatches(rc), 0U) << rc.circuit.name;
}

INSTANTIATE_TEST_SUITE_P(Seeds, RandomCombinational, ::testing::Range(1, 25));

namespace {

// Minimal VCD reader, independent of the writer: $var lines give code -> label,
// then #t sections and scalar value changes.
std::map<std::string, ChangeList> read_vcd(const std::string& text) {
  std::map<std::string, std::string> label_of;
  std::map<std::string, ChangeList> out;
  std::istringstream in(text);
  std::string line;
  TimeNs now = 0;
  while (std::getline(in, line)) {
    std::istringstream words(line);
    std::string first;
    words >> first;
    if (first == "$var") {
      std::string type, width, code, label;
      words >> type >> width >> code >> label;
      label_of[code] = label;
    } else if (!first.empty() && first[0] == '#') {
      now = std::stoull(first.substr(1));
    } else if (!first.empty() && std::string("01xz").find(first[0]) != std::string::npos && first.size() > 1) {
      char c = first[0] == 'x' ? 'X' : first[0] == 'z' ? 'Z' : first[0];
      out[label_of.at(first.substr(1))].push_back({now, *logic_from_char(c)});
    }
  }
  return out;
}

}  // namespace

TEST(Nand, ConstantOnesGiveXThenZeroAfterOneDelay) {
  SimResult r = test::run(test::load_circuit("fig3_nand"), test::load_stimulus("fig3_nand_const"));
  EXPECT_EQ(r.trace.find("y")->changes, (ChangeList{{0, L::X}, {10, L::Zero}}));
  EXPECT_EQ(sample(r.trace, "y", 9), L::X);
  EXPECT_EQ(sample(r.trace, "y", 10), L::Zero);
}

TEST(Vcd, SingleConstantSignal) {
  Trace t;
  t.horizon_ns = 5;
  t.signals.push_back({"a", "a", {{0, L::Zero}}});
  std::string vcd = export_vcd(t);
  std::size_t zero = 0;
  for (std::size_t p = vcd.find("\n#0\n"); p != std::string::npos; p = vcd.find("\n#0\n", p + 1)) ++zero;
  EXPECT_EQ(zero, 1U);
  // Only the closing time marker follows the initial dump.
  EXPECT_EQ(vcd.substr(vcd.rfind("$end")), "$end\n#5\n");
  EXPECT_EQ(read_vcd(vcd)["a"], (ChangeList{{0, L::Zero}}));
}

TEST(Vcd, ReparseReproducesChangeLists) {
  for (const auto& e : test::corpus()) {
    SimResult r = test::run(test::load_circuit(e.circuit), test::load_stimulus(e.stimulus), WatchMode::AllNets);
    auto parsed = read_vcd(export_vcd(r.trace));
    for (const auto& s : r.trace.signals) EXPECT_EQ(parsed[s.label], s.changes) << e.circuit << " " << s.label;
  }
}

TEST(Vcd, CounterMatchesGolden) {
  SimResult r = test::run(test::load_circuit("counter_mod60"), test::load_stimulus("counter"), WatchMode::Ports);
  EXPECT_EQ(export_vcd(r.trace), test::fixture("golden/counter_mod60.vcd"));
}

TEST(Log, TextIsOneLinePerEntry) {
  SimLog log;
  log.add(LogLevel::Warning, 20, "CONFLICT", "n_a driven 0 and 1");
  EXPECT_EQ(log.to_text(), "WARNING 20 CONFLICT n_a driven 0 and 1\n");
}

// Property: a shorter horizon reproduces the longer run's prefix exactly.
TEST(Causality, TruncationKeepsThePrefix) {
  for (const auto& e : test::corpus()) {
    Circuit c = test::load_circuit(e.circuit);
    StimulusSet full = test::load_stimulus(e.stimulus);
    StimulusSet half = full;
    half.horizon_ns = full.horizon_ns / 2 + 3;
    Trace a = test::run(c, full, WatchMode::AllNets).trace;
    Trace b = test::run(c, half, WatchMode::AllNets).trace;
    ASSERT_EQ(a.signals.size(), b.signals.size());
    for (std::size_t i = 0; i < a.signals.size(); ++i) {
      ChangeList prefix;
      for (const auto& ch : a.signals[i].changes) {
        if (ch.time_ns < half.horizon_ns) prefix.push_back(ch);
      }
      EXPECT_EQ(b.signals[i].changes, prefix) << e.circuit << " " << a.signals[i].label;
    }
  }
}
