#include <gtest/gtest.h>

#include <sys/wait.h>
#include <unistd.h>

#include <cstdio>
#include <fstream>
#include <filesystem>
#include <nlohmann/json.hpp>
#include <sstream>

#include "dclab/cli/cli.hpp"
#include "dclab/trace.hpp"
#include "dclab/vhdl/vhdl.hpp"
#include "support.hpp"

using namespace dclab;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  int code;
  std::string out;
  std::string err;
};

Outcome run(const std::vector<std::string>& args) {
  std::ostringstream out;
  std::ostringstream err;
  int code = cli::run(args, out, err);
  return {code, out.str(), err.str()};
}

std::string fx(const std::string& rel) { return test::fixture_path(rel); }

fs::path scratch(const std::string& tag) {
  fs::path p = fs::temp_directory_path() / ("dclab_cli_" + tag + "_" + std::to_string(::getpid()));
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

// Runs the installed binary through the shell, capturing stdout.
Outcome run_binary(const std::string& args) {
  std::string cmd = std::string(DCLAB_BINARY) + " " + args + " 2>/dev/null";
  FILE* pipe = ::popen(cmd.c_str(), "r");
  std::string out;
  char buf[4096];
  while (std::size_t n = std::fread(buf, 1, sizeof buf, pipe)) out.append(buf, n);
  int status = ::pclose(pipe);
  return {WEXITSTATUS(status), out, ""};
}

}  // namespace

TEST(Cli, UsageErrorsExitTwo) {
  EXPECT_EQ(run({}).code, 2);
  EXPECT_EQ(run({"frobnicate"}).code, 2);
  EXPECT_EQ(run({"simulate", fx("circuits/fig3_nand.json")}).code, 2);
  EXPECT_EQ(run({"validate", "/no/such/file.json"}).code, 2);
  EXPECT_EQ(run({"--help"}).code, 0);
  EXPECT_EQ(run({"grade", "--help"}).code, 0);
}

TEST(Cli, ValidateReportsConflicts) {
  Outcome o = run({"validate", fx("circuits/output_conflict.json")});
  EXPECT_EQ(o.code, 1);
  EXPECT_NE(o.err.find("OUTPUT_CONFLICT"), std::string::npos);
  EXPECT_FALSE(json::parse(o.out)["ok"]);
  Outcome s = run({"validate", fx("circuits/short_circuit.json")});
  EXPECT_EQ(s.code, 1);
  EXPECT_NE(s.err.find("SHORT_CIRCUIT"), std::string::npos);
  Outcome good = run({"validate", fx("circuits/counter_mod60.json")});
  EXPECT_EQ(good.code, 0);
  EXPECT_TRUE(json::parse(good.out)["ok"]);
}

TEST(Cli, SimulateWritesExactLibraryVcd) {
  Outcome o = run({"simulate", fx("circuits/counter_mod60.json"), "--stim", fx("stimuli/counter.json"), "--watch", "ports"});
  ASSERT_EQ(o.code, 0) << o.err;
  EXPECT_EQ(o.out, test::fixture("golden/counter_mod60.vcd"));
  EXPECT_EQ(o.out, export_vcd(test::run(test::load_circuit("counter_mod60"), test::load_stimulus("counter")).trace));

  fs::path dir = scratch("sim");
  Outcome f = run({"simulate", fx("circuits/fig3_nand.json"), "-s", fx("stimuli/fig3_nand.json"), "-o",
                   (dir / "out.vcd").string(), "--log", (dir / "out.log").string()});
  ASSERT_EQ(f.code, 0);
  EXPECT_TRUE(f.out.empty());
  EXPECT_EQ(test::read_text((dir / "out.vcd").string()),
            export_vcd(test::run(test::load_circuit("fig3_nand"), test::load_stimulus("fig3_nand"), WatchMode::AllNets)
                           .trace));
  EXPECT_FALSE(test::read_text((dir / "out.log").string()).empty());
  fs::remove_all(dir);
}

TEST(Cli, SimulateVhdlAndFaults) {
  Outcome v = run({"simulate", fx("vhdl/counter60.vhd"), "--top", "counter60", "--stim", fx("stimuli/counter.json"),
                   "--horizon", "100000000"});
  ASSERT_EQ(v.code, 0) << v.err;
  EXPECT_NE(v.out.find("$enddefinitions"), std::string::npos);
  Outcome osc = run({"simulate", fx("circuits/oscillation.json"), "--stim", fx("stimuli/oscillation.json")});
  EXPECT_EQ(osc.code, 1);
  EXPECT_NE(osc.err.find("OSCILLATION"), std::string::npos);
  Outcome bad = run({"simulate", fx("vhdl/broken.vhd"), "--stim", fx("stimuli/fig3_nand.json")});
  EXPECT_EQ(bad.code, 1);
}

TEST(Cli, EmitVhdlMatchesLibrary) {
  fs::path dir = scratch("emit");
  Outcome o = run({"emit-vhdl", fx("circuits/fig3_nand.json"), "-o", dir.string(), "--stim", fx("stimuli/fig3_nand.json")});
  ASSERT_EQ(o.code, 0) << o.err;
  json j = json::parse(o.out);
  EXPECT_EQ(j["top"], "fig3_nand");
  EXPECT_EQ(j["files"].size(), 3U);
  auto units = vhdl::emit_vhdl(test::load_circuit("fig3_nand"), ComponentRegistry::builtin());
  EXPECT_EQ(test::read_text((dir / "fig3_nand.vhd").string()), units[0].text);
  EXPECT_EQ(test::read_text((dir / "dclab_lib.vhd").string()), units[1].text);
  EXPECT_EQ(test::read_text((dir / "fig3_nand_tb.vhd").string()), test::fixture("golden/fig3_nand_tb.vhd"));
  fs::remove_all(dir);
}

TEST(Cli, GradeMatchesLibraryReport) {
  Outcome wrong = run({"grade", fx("circuits/counter_mod100.json"), "--reference", fx("circuits/counter_mod60.json"),
                       "--testpoints", fx("testpoints/counter.json")});
  EXPECT_EQ(wrong.code, 1);
  EXPECT_EQ(json::parse(wrong.out)["score"], 75);
  EXPECT_EQ(wrong.out, grade_report_json(grade(test::load_circuit("counter_mod100"), test::load_circuit("counter_mod60"),
                                               test::load_test_points("counter"), ComponentRegistry::builtin())));
  Outcome right = run({"grade", fx("vhdl/counter60.vhd"), "--top", "counter60", "-r", fx("circuits/counter_mod60.json"),
                       "-t", fx("testpoints/counter.json")});
  EXPECT_EQ(right.code, 0);
  EXPECT_EQ(json::parse(right.out)["score"], 100);
  Outcome broken = run({"grade", fx("vhdl/broken.vhd"), "-r", fx("circuits/counter_mod60.json"), "-t",
                        fx("testpoints/counter.json")});
  EXPECT_EQ(broken.code, 1);
  EXPECT_EQ(json::parse(broken.out)["score"], 0);
  Outcome badref = run({"grade", fx("circuits/counter_mod60.json"), "-r", fx("vhdl/broken.vhd"), "-t",
                        fx("testpoints/counter.json")});
  EXPECT_EQ(badref.code, 2);
}

TEST(Cli, SeedDemoPrintsCohortStats) {
  fs::path dir = scratch("seed");
  {
    std::ofstream f(dir / "c.json");
    f << R"({"store": "demo.db"})";
  }
  Outcome o = run({"seed-demo", "--config", (dir / "c.json").string()});
  ASSERT_EQ(o.code, 0) << o.err;
  json j = json::parse(o.out);
  EXPECT_EQ(j["students"], 31);
  EXPECT_EQ(j["stats"]["submitted_count"], 17);
  EXPECT_EQ(j["stats"]["solved_count"], 10);
  EXPECT_TRUE(fs::exists(dir / "demo.db"));
  fs::remove_all(dir);
}

TEST(Cli, BinaryIsAThinShell) {
  std::string args = "simulate " + fx("circuits/fig3_nand.json") + " --stim " + fx("stimuli/fig3_nand.json");
  Outcome b = run_binary(args);
  EXPECT_EQ(b.code, 0);
  EXPECT_EQ(b.out, run({"simulate", fx("circuits/fig3_nand.json"), "--stim", fx("stimuli/fig3_nand.json")}).out);
  EXPECT_EQ(run_binary("validate " + fx("circuits/output_conflict.json")).code, 1);
  EXPECT_EQ(run_binary("bogus").code, 2);
}
