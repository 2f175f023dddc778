#include <gtest/gtest.h>

#include <random>

#include "dclab/trace.hpp"
#include "dclab/vhdl/vhdl.hpp"
#include "support.hpp"

using namespace dclab;
using namespace dclab::vhdl;
using L = LogicValue;

namespace {

const ComponentRegistry& reg() { return ComponentRegistry::builtin(); }

std::vector<VhdlUnit> one(const std::string& name, const std::string& text) {
  return {{name, text, UnitKind::EntityArch}};
}

// Slices the quoted source region a diagnostic points at.
std::string at(const std::string& text, const Diagnostic& d, std::size_t len) {
  std::size_t pos = 0;
  for (std::uint32_t l = 1; l < d.line; ++l) pos = text.find('\n', pos) + 1;
  return text.substr(pos + d.column - 1, len);
}

SimConfig probe_cfg(TimeNs horizon, const std::vector<std::string>& labels) {
  SimConfig cfg;
  cfg.horizon_ns = horizon;
  cfg.watch = WatchMode::Probes;
  for (const auto& l : labels) cfg.probes.push_back({l, l, l});
  return cfg;
}

}  // namespace

TEST(Parse, MinimalEntity) {
  auto r = parse_vhdl(one("e.vhd", "entity e is end;"));
  EXPECT_TRUE(r.diagnostics.empty());
  ASSERT_EQ(r.ast.entities.size(), 1U);
}

TEST(Parse, MisspelledKeywordPointsAtIt) {
  std::string text = test::fixture("vhdl/broken.vhd");
  auto r = parse_vhdl(one("broken.vhd", text));
  ASSERT_FALSE(r.diagnostics.empty());
  const Diagnostic& d = r.diagnostics.front();
  EXPECT_EQ(d.category, Category::Syntax);
  EXPECT_EQ(d.line, 8U);
  EXPECT_EQ(d.column, 1U);
  EXPECT_EQ(at(text, d, 11), "architcture");
  EXPECT_NE(d.to_string().find("broken.vhd:8:1: error[SYNTAX]"), std::string::npos);
}

TEST(Parse, RecoversAndReportsSeveralErrors) {
  std::string text =
      "entity e is port (a : in std_logic; y : out std_logic); end;\n"
      "architecture r of e is begin\n  y <= a and ;\n  y <= or a;\nend;\n";
  auto r = parse_vhdl(one("e.vhd", text));
  EXPECT_GE(r.diagnostics.size(), 2U);
}

TEST(Elaborate, UndeclaredSignalIsANameError) {
  std::string text = test::fixture("vhdl/undeclared.vhd");
  auto p = parse_vhdl(one("undeclared.vhd", text));
  ASSERT_FALSE(has_errors(p.diagnostics));
  auto e = elaborate(p.ast, "nand2", reg());
  EXPECT_FALSE(e.design);
  ASSERT_FALSE(e.diagnostics.empty());
  const Diagnostic& d = e.diagnostics.front();
  EXPECT_EQ(d.category, Category::Name);
  EXPECT_EQ(d.line, 10U);
  EXPECT_EQ(at(text, d, 1), "c");
  EXPECT_NE(d.message.find("declare"), std::string::npos);
}

TEST(Elaborate, UnsupportedConstructIsAnElaborationError) {
  std::string text =
      "entity e is generic (n : integer := 2); port (a : in std_logic); end;\n"
      "architecture r of e is begin end;\n";
  auto p = parse_vhdl(one("e.vhd", text));
  auto e = elaborate(p.ast, "e", reg());
  bool found = false;
  for (const auto& d : p.diagnostics) found = found || d.category == Category::Elaboration;
  for (const auto& d : e.diagnostics) found = found || d.category == Category::Elaboration;
  EXPECT_TRUE(found);
}

TEST(Elaborate, NandStatementSettlesToZero) {
  std::string text =
      "library ieee; use ieee.std_logic_1164.all;\n"
      "entity g is port (a, b : in std_logic; y : out std_logic); end;\n"
      "architecture r of g is begin\n  y <= a nand b;\nend;\n";
  ElaboratedDesign d = compile_vhdl(one("g.vhd", text), "g", reg());
  EXPECT_EQ(d.processes.size(), 1U);
  StimulusSet s{{{"a", SignalSpec::constant(L::One)}, {"b", SignalSpec::constant(L::One)}}, 50};
  SimResult r = simulate_elaborated(d, s, probe_cfg(50, {"y"}));
  EXPECT_EQ(sample(r.trace, "y", 49), L::Zero);
}

TEST(Elaborate, StdLogicValuesProjectOntoFourValues) {
  std::string text =
      "library ieee; use ieee.std_logic_1164.all;\n"
      "entity k is port (l, h, w, z : out std_logic); end;\n"
      "architecture r of k is begin\n  l <= 'L'; h <= 'H'; w <= 'W'; z <= 'Z';\nend;\n";
  SimResult r = simulate_vhdl(one("k.vhd", text), "k", StimulusSet{{}, 10}, probe_cfg(10, {"l", "h", "w", "z"}), reg());
  EXPECT_EQ(sample(r.trace, "l", 5), L::Zero);
  EXPECT_EQ(sample(r.trace, "h", 5), L::One);
  EXPECT_EQ(sample(r.trace, "w", 5), L::X);
  EXPECT_EQ(sample(r.trace, "z", 5), L::Z);
}

TEST(Elaborate, InferTopPicksTheUninstantiatedEntity) {
  Circuit c = test::load_circuit("fig3_nand");
  auto units = emit_vhdl(c, reg());
  auto p = parse_vhdl({units[0]});
  ASSERT_FALSE(has_errors(p.diagnostics));
  EXPECT_EQ(infer_top(p.ast), top_entity_name(c));
  // With the library every part entity is also a candidate.
  EXPECT_EQ(infer_top(parse_vhdl(units).ast), std::nullopt);
}

TEST(Emit, LibraryParsesCleanly) {
  auto p = parse_vhdl({emit_library(reg())});
  EXPECT_TRUE(p.diagnostics.empty());
  for (const auto& part : reg().parts()) {
    auto e = elaborate(p.ast, entity_name(part), reg());
    EXPECT_FALSE(has_errors(e.diagnostics)) << part;
  }
}

TEST(Emit, Fig3MatchesGolden) {
  Circuit c = test::load_circuit("fig3_nand");
  auto units = emit_vhdl(c, reg());
  ASSERT_EQ(units.size(), 2U);
  EXPECT_EQ(units[0].text, test::fixture("golden/fig3_nand.vhd"));
  EXPECT_EQ(emit_testbench(c, test::load_stimulus("fig3_nand")).text, test::fixture("golden/fig3_nand_tb.vhd"));
  EXPECT_NE(units[0].text.find(std::string(kGeneratorVersion)), std::string::npos);
}

TEST(Emit, FeedthroughIsOneAssignment) {
  auto units = emit_vhdl(test::load_circuit("feedthrough"), reg());
  const std::string& t = units[0].text;
  std::size_t arrows = 0;
  for (std::size_t p = t.find("<="); p != std::string::npos; p = t.find("<=", p + 1)) ++arrows;
  EXPECT_EQ(arrows, 1U);
  EXPECT_EQ(t.find("port map"), std::string::npos);
}

TEST(Emit, Deterministic) {
  for (const auto& e : test::corpus()) {
    Circuit c = test::load_circuit(e.circuit);
    auto a = emit_vhdl(c, reg());
    auto b = emit_vhdl(c, reg());
    ASSERT_EQ(a.size(), b.size());
    for (std::size_t i = 0; i < a.size(); ++i) EXPECT_EQ(a[i].text, b[i].text);
  }
}

TEST(Emit, RejectsInvalidCircuitAndUnboundInputs) {
  EXPECT_THROW(emit_vhdl(test::load_circuit("output_conflict"), reg()), ContractError);
  EXPECT_THROW(emit_testbench(test::load_circuit("fig3_nand"), StimulusSet{{}, 10}), ContractError);
}

TEST(Testbench, ClockUsesHalfPeriodWaits) {
  VhdlUnit tb = emit_testbench(test::load_circuit("counter_mod60"), test::load_stimulus("counter"));
  EXPECT_NE(tb.text.find("wait for 10 ms;"), std::string::npos);
  VhdlUnit c = emit_testbench(test::load_circuit("fig3_nand"), test::load_stimulus("fig3_nand_const"));
  EXPECT_EQ(c.text.find("wait for"), std::string::npos);
}

// Property: the generated testbench reproduces expand() on every input.
TEST(Testbench, ReproducesExpandedStimulus) {
  for (const auto& e : test::corpus()) {
    Circuit c = test::load_circuit(e.circuit);
    if (c.top_inputs.empty()) continue;
    StimulusSet s = test::load_stimulus(e.stimulus);
    if (s.horizon_ns > 100'000'000) s.horizon_ns = 100'000'000;
    auto units = emit_vhdl(c, reg());
    units.push_back(emit_testbench(c, s));
    std::vector<std::string> labels;
    for (const auto& p : c.top_inputs) labels.push_back(port_label(p.name));
    SimResult r = simulate_vhdl(units, top_entity_name(c) + "_tb", StimulusSet{{}, s.horizon_ns},
                                probe_cfg(s.horizon_ns, labels), reg());
    for (const auto& p : c.top_inputs) {
      const TraceSignal* sig = r.trace.find(port_label(p.name));
      ASSERT_NE(sig, nullptr) << p.name;
      EXPECT_EQ(sig->changes, expand(s.assignments.at(p.name), s.horizon_ns)) << e.circuit << " " << p.name;
    }
  }
}

TEST(RoundTrip, CorpusMatchesNetlistAtSampleTimes) {
  for (const auto& e : test::corpus()) {
    auto bad = test::vhdl_round_trip_mismatches(test::load_circuit(e.circuit), test::load_stimulus(e.stimulus));
    EXPECT_TRUE(bad.empty()) << e.circuit << ": " << (bad.empty() ? "" : bad.front());
  }
}

TEST(RoundTrip, BehaviouralCounterMatchesGraphicalCounter) {
  StimulusSet s = test::load_stimulus("counter");
  SimResult graphical = test::run(test::load_circuit("counter_mod60"), s);
  VhdlSource src = test::load_vhdl("counter60.vhd", "counter60");
  SimResult behavioural = simulate_design(src, s, [&] {
    SimConfig cfg;
    cfg.horizon_ns = s.horizon_ns;
    cfg.watch = WatchMode::Ports;
    return cfg;
  }(), reg());
  ASSERT_FALSE(behavioural.fault);
  for (TimeNs t : default_sample_times(s, 0)) {
    for (const char* base : {"ones", "tens"}) {
      for (int b = 0; b < 4; ++b) {
        std::string label = std::string(base) + "[" + std::to_string(b) + "]";
        ASSERT_EQ(sample(graphical.trace, label, t), sample(behavioural.trace, label, t)) << label << " @" << t;
      }
    }
  }
}

TEST(Identifiers, Helpers) {
  EXPECT_EQ(port_label("Ones[2]"), "ones[2]");
  EXPECT_EQ(entity_name("74LS00"), "ttl_74ls00");
  EXPECT_EQ(entity_name("CLOCK"), "dclab_clock");
  EXPECT_EQ(identifier("signal"), "signal_p");
  EXPECT_EQ(identifier("a b"), identifier("a b"));
}

// Property: parsing never crashes or hangs on arbitrary bytes.
TEST(Parse, TotalOnRandomInput) {
  std::mt19937 rng(5);
  std::string seed = test::fixture("vhdl/counter60.vhd");
  for (int i = 0; i < 300; ++i) {
    std::string text = seed;
    int edits = 1 + static_cast<int>(rng() % 20);
    for (int k = 0; k < edits; ++k) {
      std::size_t pos = rng() % text.size();
      switch (rng() % 3) {
        case 0: text[pos] = static_cast<char>(rng() % 256); break;
        case 1: text.erase(pos, rng() % 8); break;
        default: text.insert(pos, 1, "();<=:'\"-\n"[rng() % 10]); break;
      }
      if (text.empty()) text = "x";
    }
    auto p = parse_vhdl(one("fuzz.vhd", text));
    for (const auto& d : p.diagnostics) {
      EXPECT_GE(d.line, 1U);
      EXPECT_GE(d.column, 1U);
    }
    if (!has_errors(p.diagnostics)) (void)elaborate(p.ast, "counter60", reg());
  }
}
