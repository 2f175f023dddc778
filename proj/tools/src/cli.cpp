#include "dclab/cli/cli.hpp"

#include <csignal>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <thread>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "dclab/components.hpp"
#include "dclab/grader.hpp"
#include "dclab/service/http.hpp"
#include "dclab/service/seed.hpp"
#include "dclab/trace.hpp"
#include "dclab/vhdl/vhdl.hpp"

namespace dclab::cli {

namespace fs = std::filesystem;
using ordered_json = nlohmann::ordered_json;

namespace {

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot read " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  out << text;
  if (!out) throw Error("cannot write " + path.string());
}

bool is_vhdl(const std::string& f) {
  std::string ext = fs::path(f).extension().string();
  return ext == ".vhd" || ext == ".vhdl";
}

ordered_json issues(const std::vector<ValidationIssue>& list) {
  ordered_json a = ordered_json::array();
  for (const auto& i : list) {
    a.push_back({{"code", std::string(to_string(i.code))}, {"location", i.location}, {"message", i.message}});
  }
  return a;
}

WatchMode watch_mode(const std::string& s) {
  if (s == "ports") return WatchMode::Ports;
  return WatchMode::AllNets;
}

int cmd_validate(const std::string& file, std::ostream& out, std::ostream& err) {
  Circuit c = deserialize_circuit(read_file(file));
  ValidationReport r = validate_circuit(c, ComponentRegistry::builtin());
  ordered_json j;
  j["ok"] = r.ok();
  j["errors"] = issues(r.errors);
  j["warnings"] = issues(r.warnings);
  out << j.dump(2) << "\n";
  for (const auto& i : r.errors) err << "error: " << to_string(i.code) << " at " << i.location << ": " << i.message << "\n";
  for (const auto& i : r.warnings) {
    err << "warning: " << to_string(i.code) << " at " << i.location << ": " << i.message << "\n";
  }
  return r.ok() ? kOk : kNegative;
}

struct SimulateArgs {
  std::vector<std::string> design;
  std::string top;
  std::string stimulus;
  std::uint64_t horizon = 0;
  std::string output;
  std::string watch = "all_nets";
  std::string log;
};

int cmd_simulate(const SimulateArgs& a, std::ostream& out, std::ostream& err) {
  Design d = load_design(a.design, a.top);
  StimulusSet stim = deserialize_stimulus(read_file(a.stimulus));
  SimConfig cfg;
  cfg.horizon_ns = a.horizon != 0 ? a.horizon : stim.horizon_ns;
  cfg.watch = watch_mode(a.watch);
  SimResult r = CompiledDesign::compile(d, ComponentRegistry::builtin()).simulate(stim, cfg);
  std::string vcd = export_vcd(r.trace);
  if (a.output.empty()) {
    out << vcd;
  } else {
    write_file(a.output, vcd);
  }
  if (!a.log.empty()) write_file(a.log, r.log.to_text());
  for (const auto& e : r.log.entries) {
    if (e.level != LogLevel::Info) err << e.code << " at " << e.time_ns << " ns: " << e.message << "\n";
  }
  if (r.fault) {
    err << "simulation stopped: " << r.fault->code << " at " << r.fault->time_ns << " ns: " << r.fault->message
        << "\n";
    return kNegative;
  }
  return kOk;
}

int cmd_emit(const std::string& file, const std::string& dir, const std::string& stim_file, std::ostream& out) {
  Circuit c = deserialize_circuit(read_file(file));
  const auto& registry = ComponentRegistry::builtin();
  std::vector<vhdl::VhdlUnit> units = vhdl::emit_vhdl(c, registry);
  if (!stim_file.empty()) units.push_back(vhdl::emit_testbench(c, deserialize_stimulus(read_file(stim_file))));
  fs::create_directories(dir);
  ordered_json written = ordered_json::array();
  for (const auto& u : units) {
    fs::path p = fs::path(dir) / u.source_name;
    write_file(p, u.text);
    written.push_back(p.string());
  }
  ordered_json j;
  j["top"] = vhdl::top_entity_name(c);
  j["files"] = std::move(written);
  out << j.dump(2) << "\n";
  return kOk;
}

int cmd_grade(const std::vector<std::string>& submission, const std::string& top,
              const std::vector<std::string>& reference, const std::string& ref_top, const std::string& tp_file,
              std::ostream& out, std::ostream& err) {
  const auto& registry = ComponentRegistry::builtin();
  auto tps = deserialize_test_points(read_file(tp_file));
  Design ref = load_design(reference, ref_top);
  Design sub;
  try {
    sub = load_design(submission, top);
  } catch (const FormatError& e) {
    // An unreadable submission still gets a report, with every point failed.
    GradeReport r;
    for (const auto& tp : tps) r.per_test_point.push_back({tp.id, Verdict::Fail, std::nullopt, "submission rejected"});
    r.total = tps.size();
    r.diagnostics.push_back(e.what());
    out << grade_report_json(r);
    return kNegative;
  }
  try {
    GradeReport r = grade(sub, ref, tps, registry);
    out << grade_report_json(r);
    return r.score == 100 ? kOk : kNegative;
  } catch (const ReferenceError& e) {
    err << "reference problem: " << e.what() << "\n";
    return kUsage;
  }
}

service::ServiceConfig config_from(const std::string& path) {
  if (path.empty()) {
    service::ServiceConfig cfg;
    service::apply_env(cfg);
    return cfg;
  }
  return service::load_config(path);
}

int cmd_serve(const std::string& config, std::ostream& err) {
  service::ServiceConfig cfg = config_from(config);
  // Signals are taken synchronously by this thread; server threads inherit the mask.
  sigset_t set;
  sigemptyset(&set);
  sigaddset(&set, SIGINT);
  sigaddset(&set, SIGTERM);
  pthread_sigmask(SIG_BLOCK, &set, nullptr);
  service::Service svc(cfg, ComponentRegistry::builtin());
  service::HttpServer server(svc);
  int port = server.bind(cfg.listen_host, cfg.listen_port);
  err << "dclab listening on " << cfg.listen_host << ":" << port << "\n";
  std::thread listener([&] { server.listen(); });
  int sig = 0;
  sigwait(&set, &sig);
  err << "shutting down\n";
  server.stop();
  listener.join();
  return kOk;
}

int cmd_seed(const std::string& config, std::ostream& out) {
  service::ServiceConfig cfg = config_from(config);
  service::ManualClock clock;
  service::Service svc(cfg, ComponentRegistry::builtin(), clock);
  service::SeedReport rep = service::seed_demo(svc, clock);
  service::User teacher = svc.authenticate(svc.login(rep.instructor, "dclab-demo"));
  ordered_json j;
  j["assignment"] = rep.assignment;
  j["reference_project"] = rep.reference_project;
  j["instructor"] = rep.instructor;
  j["students"] = rep.students;
  j["submissions"] = rep.submissions;
  j["stats"] = ordered_json::parse(service::stats_json(svc.assignment_stats(teacher, rep.assignment)));
  out << j.dump(2) << "\n";
  return kOk;
}

}  // namespace

Design load_design(const std::vector<std::string>& files, const std::string& top) {
  if (files.empty()) throw Error("no design files given");
  if (is_vhdl(files.front())) {
    VhdlSource src;
    src.top = top;
    for (const auto& f : files) {
      if (!is_vhdl(f)) throw Error("cannot mix VHDL and netlist files: " + f);
      src.units.push_back({fs::path(f).filename().string(), read_file(f), vhdl::UnitKind::EntityArch});
    }
    return src;
  }
  if (files.size() != 1) throw Error("a netlist design is a single JSON file");
  std::string text = read_file(files.front());
  auto probe = nlohmann::json::parse(text, nullptr, false);
  if (probe.is_object() && probe.contains("repr")) return service::parse_design_payload(text);
  return deserialize_circuit(text);
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"DCLab digital logic lab: simulate, translate and grade circuits"};
  app.name("dclab");
  app.require_subcommand(1);

  std::string validate_file;
  auto* validate = app.add_subcommand("validate", "Check a netlist against the edit-time rules");
  validate->add_option("netlist", validate_file, "netlist JSON")->required();

  SimulateArgs sim;
  auto* simulate = app.add_subcommand("simulate", "Simulate a design and write a VCD");
  simulate->add_option("design", sim.design, "netlist JSON, design payload, or VHDL files")->required();
  simulate->add_option("--stim,-s", sim.stimulus, "stimulus JSON")->required();
  simulate->add_option("--horizon", sim.horizon, "override the stimulus horizon (ns)");
  simulate->add_option("--top", sim.top, "top entity for VHDL");
  simulate->add_option("--watch", sim.watch, "ports or all_nets")->check(CLI::IsMember({"ports", "all_nets"}));
  simulate->add_option("-o,--output", sim.output, "VCD file (default stdout)");
  simulate->add_option("--log", sim.log, "write the simulation log here");

  std::string emit_file;
  std::string emit_dir = ".";
  std::string emit_stim;
  auto* emit = app.add_subcommand("emit-vhdl", "Translate a netlist to VHDL");
  emit->add_option("netlist", emit_file, "netlist JSON")->required();
  emit->add_option("-o,--out-dir", emit_dir, "output directory");
  emit->add_option("--stim", emit_stim, "also write a testbench for this stimulus");

  std::vector<std::string> grade_sub;
  std::vector<std::string> grade_ref;
  std::string grade_top;
  std::string grade_ref_top;
  std::string grade_tp;
  auto* grade_cmd = app.add_subcommand("grade", "Grade a design against a reference");
  grade_cmd->add_option("submission", grade_sub, "submitted design files")->required();
  grade_cmd->add_option("--top", grade_top, "top entity of a VHDL submission");
  grade_cmd->add_option("--reference,-r", grade_ref, "reference design files")->required();
  grade_cmd->add_option("--reference-top", grade_ref_top, "top entity of a VHDL reference");
  grade_cmd->add_option("--testpoints,-t", grade_tp, "test points JSON")->required();

  std::string serve_config;
  auto* serve = app.add_subcommand("serve", "Run the management service");
  serve->add_option("--config,-c", serve_config, "config JSON (environment variables override it)");

  std::string seed_config;
  auto* seed = app.add_subcommand("seed-demo", "Load the demo cohort into a store");
  seed->add_option("--config,-c", seed_config, "config JSON");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    std::ostringstream help;
    std::ostringstream msg;
    int code = app.exit(e, help, msg);
    out << help.str();
    err << msg.str();
    return code == 0 ? kOk : kUsage;
  }

  try {
    if (*validate) return cmd_validate(validate_file, out, err);
    if (*simulate) return cmd_simulate(sim, out, err);
    if (*emit) return cmd_emit(emit_file, emit_dir, emit_stim, out);
    if (*grade_cmd) return cmd_grade(grade_sub, grade_top, grade_ref, grade_ref_top, grade_tp, out, err);
    if (*serve) return cmd_serve(serve_config, err);
    if (*seed) return cmd_seed(seed_config, out);
  } catch (const FormatError& e) {
    err << "error: " << e.what() << "\n";
    return kUsage;
  } catch (const ContractError& e) {
    err << "error: " << e.what() << "\n";
    return kNegative;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kUsage;
  }
  return kUsage;
}

}  // namespace dclab::cli
