#include "support.hpp"

#include <fstream>
#include <map>
#include <random>
#include <set>
#include <sstream>
#include <stdexcept>

#include <nlohmann/json.hpp>

#include "dclab/trace.hpp"
#include "dclab/vhdl/vhdl.hpp"

namespace dclab::test {

std::string fixture_path(const std::string& rel) { return std::string(DCLAB_FIXTURE_DIR) + "/" + rel; }

std::string read_text(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string fixture(const std::string& rel) { return read_text(fixture_path(rel)); }

Circuit load_circuit(const std::string& name) { return deserialize_circuit(fixture("circuits/" + name + ".json")); }

StimulusSet load_stimulus(const std::string& name) {
  return deserialize_stimulus(fixture("stimuli/" + name + ".json"));
}

std::vector<TestPoint> load_test_points(const std::string& name) {
  return deserialize_test_points(fixture("testpoints/" + name + ".json"));
}

VhdlSource load_vhdl(const std::string& file, const std::string& top) {
  VhdlSource src;
  src.units.push_back({file, fixture("vhdl/" + file), vhdl::UnitKind::EntityArch});
  src.top = top;
  return src;
}

std::size_t truth_table_mismatches(const std::string& part) {
  auto doc = nlohmann::json::parse(fixture("truth_tables/" + part + ".json"));
  const ComponentModel& m = ComponentRegistry::builtin().at(part);
  std::vector<std::string> inputs = doc["inputs"];
  std::vector<std::string> outputs = doc["outputs"];
  if (doc["rows"].size() != (std::size_t{1} << inputs.size())) throw std::runtime_error(part + ": table is not exhaustive");
  std::set<std::string> seen;
  std::size_t bad = 0;
  for (const auto& row : doc["rows"]) {
    std::string r = row;
    auto colon = r.find(':');
    seen.insert(r.substr(0, colon));
    PinValues in;
    for (std::size_t i = 0; i < inputs.size(); ++i) in[inputs[i]] = r[i] == '1' ? LogicValue::One : LogicValue::Zero;
    PinValues out = eval_combinational(m, in);
    for (std::size_t o = 0; o < outputs.size(); ++o) {
      if (out.at(outputs[o]) != (r[colon + 1 + o] == '1' ? LogicValue::One : LogicValue::Zero)) ++bad;
    }
  }
  if (seen.size() != doc["rows"].size()) throw std::runtime_error(part + ": duplicate rows");
  return bad;
}

std::vector<CorpusEntry> corpus() {
  return {
      {"fig3_nand", "fig3_nand"},   {"feedthrough", "feedthrough"}, {"adder283", "adder283"},
      {"decoder138", "decoder138"}, {"mux151", "mux151"},           {"dff74", "dff74"},
      {"counter_mod60", "counter"}, {"counter_mod100", "counter"},   {"ring3", "ring3"},
  };
}

SimResult run(const Circuit& c, const StimulusSet& s, WatchMode watch) {
  SimConfig cfg;
  cfg.horizon_ns = s.horizon_ns;
  cfg.watch = watch;
  return simulate(c, s, cfg, ComponentRegistry::builtin());
}

std::vector<std::string> vhdl_round_trip_mismatches(const Circuit& c, const StimulusSet& s) {
  const auto& registry = ComponentRegistry::builtin();
  SimResult direct = run(c, s, WatchMode::Ports);

  auto units = vhdl::emit_vhdl(c, registry);
  units.push_back(vhdl::emit_testbench(c, s));
  SimConfig cfg;
  cfg.horizon_ns = s.horizon_ns;
  cfg.watch = WatchMode::Probes;
  std::vector<std::string> ports;
  for (const auto& p : c.top_inputs) ports.push_back(p.name);
  for (const auto& p : c.top_outputs) ports.push_back(p.name);
  for (const auto& p : ports) {
    std::string l = vhdl::port_label(p);
    cfg.probes.push_back({l, l, l});
  }
  SimResult via_vhdl = vhdl::simulate_vhdl(units, vhdl::top_entity_name(c) + "_tb", StimulusSet{{}, s.horizon_ns},
                                           cfg, registry);

  std::vector<std::string> out;
  if (direct.fault || via_vhdl.fault) {
    out.push_back("fault in one of the runs");
    return out;
  }
  for (TimeNs t : default_sample_times(s, 0)) {
    for (const auto& p : ports) {
      LogicValue a = sample(direct.trace, p, t);
      LogicValue b = sample(via_vhdl.trace, vhdl::port_label(p), t);
      if (a != b) {
        out.push_back(p + " @" + std::to_string(t) + ": netlist " + to_char(a) + ", vhdl " + to_char(b));
      }
    }
  }
  return out;
}

// --- random circuits -------------------------------------------------------------

namespace {

struct GateKind {
  const char* part;
  int per_chip;
};

GateKind kind_of(GateOp op) {
  switch (op) {
    case GateOp::Nand: return {"74LS00", 4};
    case GateOp::Nor: return {"74LS02", 4};
    case GateOp::Not: return {"74LS04", 6};
    case GateOp::And: return {"74LS08", 4};
    case GateOp::Or: return {"74LS32", 4};
    case GateOp::Xor: return {"74LS86", 4};
  }
  return {"74LS00", 4};
}

}  // namespace

RandomCircuit random_circuit(std::uint64_t seed, int n_inputs, int n_gates) {
  std::mt19937_64 rng(seed);
  RandomCircuit rc;
  rc.n_inputs = n_inputs;
  auto pick = [&](int limit) { return static_cast<int>(std::uniform_int_distribution<int>(0, limit - 1)(rng)); };
  for (int g = 0; g < n_gates; ++g) {
    int available = n_inputs + g;
    // Favour recent signals so the circuits get some depth.
    auto source = [&]() { return pick(2) == 0 ? pick(available) : std::max(0, available - 1 - pick(std::min(available, 4))); };
    Gate gate{static_cast<GateOp>(pick(6)), source(), source()};
    rc.gates.push_back(gate);
  }
  int n_out = std::min(n_gates, 1 + pick(4));
  for (int i = 0; i < n_out; ++i) rc.outputs.push_back(n_inputs + n_gates - 1 - i);
  if (n_gates > n_out) rc.outputs.push_back(n_inputs + pick(n_gates - n_out));

  // Lower onto chips: consecutive gates of one kind share a package.
  Circuit& c = rc.circuit;
  c.name = "random_" + std::to_string(seed);
  std::vector<std::vector<PinRef>> endpoints(static_cast<std::size_t>(n_inputs + n_gates));
  std::map<std::string, std::pair<std::string, int>> open_chip;  // part -> (instance id, used gates)
  int chip_count = 0;
  for (int g = 0; g < n_gates; ++g) {
    GateKind k = kind_of(rc.gates[static_cast<std::size_t>(g)].op);
    auto& slot = open_chip[k.part];
    if (slot.first.empty() || slot.second == k.per_chip) {
      slot = {"U" + std::to_string(++chip_count), 0};
      c.instances.push_back(ComponentInstance{slot.first, k.part, {}, {}});
    }
    std::string unit = std::to_string(++slot.second);
    const Gate& gate = rc.gates[static_cast<std::size_t>(g)];
    endpoints[static_cast<std::size_t>(gate.a)].push_back({slot.first, unit + "A"});
    if (gate.op != GateOp::Not) endpoints[static_cast<std::size_t>(gate.b)].push_back({slot.first, unit + "B"});
    endpoints[static_cast<std::size_t>(n_inputs + g)].push_back({slot.first, unit + "Y"});
  }
  for (std::size_t s = 0; s < endpoints.size(); ++s) {
    c.nets.push_back(Net{"s" + std::to_string(s), std::nullopt, endpoints[s]});
  }
  for (int i = 0; i < n_inputs; ++i) c.top_inputs.push_back({"in" + std::to_string(i), "s" + std::to_string(i)});
  std::set<int> seen;
  for (int o : rc.outputs) {
    if (seen.insert(o).second) c.top_outputs.push_back({"out" + std::to_string(o), "s" + std::to_string(o)});
  }
  return rc;
}

std::vector<bool> evaluate(const RandomCircuit& rc, std::uint32_t bits) {
  std::vector<bool> v(static_cast<std::size_t>(rc.n_inputs) + rc.gates.size());
  for (int i = 0; i < rc.n_inputs; ++i) v[static_cast<std::size_t>(i)] = ((bits >> i) & 1U) != 0;
  for (std::size_t g = 0; g < rc.gates.size(); ++g) {
    bool a = v[static_cast<std::size_t>(rc.gates[g].a)];
    bool b = v[static_cast<std::size_t>(rc.gates[g].b)];
    bool r = false;
    switch (rc.gates[g].op) {
      case GateOp::Nand: r = !(a && b); break;
      case GateOp::Nor: r = !(a || b); break;
      case GateOp::Not: r = !a; break;
      case GateOp::And: r = a && b; break;
      case GateOp::Or: r = a || b; break;
      case GateOp::Xor: r = a != b; break;
    }
    v[static_cast<std::size_t>(rc.n_inputs) + g] = r;
  }
  std::vector<bool> out;
  for (const auto& p : rc.circuit.top_outputs) out.push_back(v[std::stoul(p.net.substr(1))]);
  return out;
}

std::size_t oracle_mismatches(const RandomCircuit& rc, TimeNs period_ns) {
  const std::uint32_t n = 1U << rc.n_inputs;
  StimulusSet stim;
  stim.horizon_ns = static_cast<TimeNs>(n) * period_ns;
  for (int i = 0; i < rc.n_inputs; ++i) {
    ChangeList edges;
    for (std::uint32_t k = 0; k < n; ++k) {
      LogicValue v = from_bool(((k >> i) & 1U) != 0);
      if (edges.empty() || edges.back().value != v) edges.push_back({k * period_ns, v});
    }
    stim.assignments["in" + std::to_string(i)] = SignalSpec::pattern(edges);
  }
  SimResult r = run(rc.circuit, stim, WatchMode::Ports);
  if (r.fault) return static_cast<std::size_t>(n) * rc.circuit.top_outputs.size();
  std::size_t bad = 0;
  for (std::uint32_t k = 0; k < n; ++k) {
    std::vector<bool> expect = evaluate(rc, k);
    TimeNs t = (k + 1) * period_ns - 1;
    for (std::size_t o = 0; o < rc.circuit.top_outputs.size(); ++o) {
      if (sample(r.trace, rc.circuit.top_outputs[o].name, t) != from_bool(expect[o])) ++bad;
    }
  }
  return bad;
}

}  // namespace dclab::test
