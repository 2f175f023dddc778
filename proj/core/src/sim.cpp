#include "dclab/sim.hpp"

#include <map>

#include "component_process.hpp"
#include "dclab/error.hpp"

namespace dclab {

using kernel::DriverId;
using kernel::kNoNet;
using kernel::NetId;
using kernel::SimDesign;

namespace {

std::string net_name(const Net& n) { return "n_" + n.id; }

}  // namespace

SimDesign compile_circuit(const Circuit& c, const ComponentRegistry& registry) {
  ValidationReport report = validate_circuit(c, registry);
  if (!report.ok()) {
    const auto& e = report.errors.front();
    throw ContractError("circuit \"" + c.name + "\" has " + std::to_string(report.errors.size()) +
                        " validation error(s), first: " + std::string(to_string(e.code)) + " at " + e.location +
                        ": " + e.message);
  }
  SimDesign d;
  std::map<std::string, NetId, std::less<>> net_ids;
  std::map<PinRef, NetId> pin_net;
  for (const auto& n : c.nets) {
    NetId id = d.add_net(net_name(n));
    net_ids.emplace(n.id, id);
    for (const auto& ep : n.endpoints) pin_net.emplace(ep, id);
  }
  for (const auto& p : c.top_inputs) d.inputs.push_back({p.name, net_ids.at(p.net)});
  for (const auto& p : c.top_outputs) d.outputs.push_back({p.name, net_ids.at(p.net)});
  for (const auto& n : c.nets) d.internals.push_back({net_name(n), net_ids.at(n.id)});

  for (const auto& inst : c.instances) {
    const ComponentModel& m = registry.at(inst.part);
    std::vector<NetId> nets(m.pins.size(), kNoNet);
    for (std::size_t i = 0; i < m.pins.size(); ++i) {
      if (auto it = pin_net.find(PinRef{inst.id, m.pins[i].name}); it != pin_net.end()) nets[i] = it->second;
    }
    detail::ComponentLowering low = detail::lower_component(m, inst.params, std::move(nets));
    std::vector<DriverId> ids;
    for (const auto& [net, initial] : low.drivers) ids.push_back(d.add_driver(net, initial));
    if (low.make) d.add_process(low.make(ids), low.sensitivity);
  }
  return d;
}

std::vector<kernel::WatchSignal> watch_list(const SimDesign& design, WatchMode mode) {
  std::vector<kernel::WatchSignal> out;
  if (mode == WatchMode::Probes) return out;
  for (const auto& p : design.inputs) out.push_back({p.name, p.net});
  for (const auto& p : design.outputs) out.push_back({p.name, p.net});
  if (mode == WatchMode::AllNets) {
    for (const auto& p : design.internals) out.push_back({p.name, p.net});
  }
  return out;
}

std::vector<kernel::Waveform> bind_stimulus(const SimDesign& design, const StimulusSet& stim, TimeNs horizon_ns,
                                            SimLog& log) {
  std::vector<kernel::Waveform> out;
  for (const auto& [name, spec] : stim.assignments) {
    bool found = false;
    for (const auto& p : design.inputs) {
      if (p.name != name) continue;
      out.push_back({p.net, expand(spec, horizon_ns)});
      found = true;
    }
    if (!found) throw ContractError("stimulus names \"" + name + "\", which is not a top input");
  }
  for (const auto& p : design.inputs) {
    if (stim.assignments.contains(p.name)) continue;
    log.add(LogLevel::Warning, 0, "UNBOUND_INPUT", "input " + p.name + " has no stimulus and reads as X");
    out.push_back({p.net, {{0, LogicValue::X}}});
  }
  return out;
}

SimResult simulate(const Circuit& c, const StimulusSet& stim, const SimConfig& cfg,
                   const ComponentRegistry& registry) {
  if (cfg.horizon_ns < 1) throw ContractError("horizon_ns must be at least 1");
  SimDesign design = compile_circuit(c, registry);
  SimLog pre;
  for (const auto& w : validate_circuit(c, registry).warnings) {
    pre.add(LogLevel::Warning, 0, std::string(to_string(w.code)), w.location + ": " + w.message);
  }
  std::vector<kernel::Waveform> waves = bind_stimulus(design, stim, cfg.horizon_ns, pre);

  std::vector<kernel::WatchSignal> watch = watch_list(design, cfg.watch);
  for (const auto& probe : cfg.probes) {
    NetId net = kNoNet;
    if (const auto* id = std::get_if<std::string>(&probe.target)) {
      const Net* n = c.find_net(*id);
      if (n == nullptr) throw ContractError("probe " + probe.id + " names no net \"" + *id + "\"");
      net = static_cast<NetId>(n - c.nets.data());
    } else {
      const auto& ref = std::get<PinRef>(probe.target);
      const ComponentInstance* inst = c.find_instance(ref.component);
      if (inst == nullptr || registry.at(inst->part).find_pin(ref.pin) == nullptr) {
        throw ContractError("probe " + probe.id + " names no pin " + ref.component + "." + ref.pin);
      }
      if (const Net* n = net_of(c, ref)) net = static_cast<NetId>(n - c.nets.data());
    }
    watch.push_back({probe.label.empty() ? probe.id : probe.label, net});
  }

  kernel::RunOptions opt{cfg.horizon_ns, cfg.max_deltas_per_instant};
  SimResult result = kernel::run(design, std::move(waves), watch, opt);
  pre.entries.insert(pre.entries.end(), result.log.entries.begin(), result.log.entries.end());
  result.log = std::move(pre);
  return result;
}

}  // namespace dclab
