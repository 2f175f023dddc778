#include "dclab/netlist.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>

#include "dclab/error.hpp"
#include "json_util.hpp"

namespace dclab {

using detail::Json;
using detail::ObjectReader;
using detail::OrderedJson;

const ComponentInstance* Circuit::find_instance(std::string_view id) const {
  for (const auto& i : instances) {
    if (i.id == id) return &i;
  }
  return nullptr;
}

const Net* Circuit::find_net(std::string_view id) const {
  for (const auto& n : nets) {
    if (n.id == id) return &n;
  }
  return nullptr;
}

std::string_view to_string(ValidationCode c) noexcept {
  switch (c) {
    case ValidationCode::OutputConflict: return "OUTPUT_CONFLICT";
    case ValidationCode::ShortCircuit: return "SHORT_CIRCUIT";
    case ValidationCode::DanglingPinRef: return "DANGLING_PIN_REF";
    case ValidationCode::UnknownPart: return "UNKNOWN_PART";
    case ValidationCode::BadParam: return "BAD_PARAM";
    case ValidationCode::FloatingRequiredInput: return "FLOATING_REQUIRED_INPUT";
  }
  return "UNKNOWN_PART";
}

namespace {

std::string pin_location(const PinRef& p) { return "instance:" + p.component + "/pin:" + p.pin; }

// Level a driver holds for the whole run, if it is a fixed supply.
std::optional<LogicValue> constant_level(const ComponentModel& m, const ParamMap& params) {
  const auto* src = std::get_if<SourceBehavior>(&m.behavior);
  if (src == nullptr || src->source == SourceTemplate::Clock) return std::nullopt;
  return source_signal(m, params).value;
}

}  // namespace

ValidationReport validate_circuit(const Circuit& c, const ComponentRegistry& registry) {
  ValidationReport report;
  auto error = [&](ValidationCode code, std::string msg, std::string loc) {
    report.errors.push_back({code, std::move(msg), std::move(loc)});
  };

  std::map<std::string, const ComponentModel*> models;
  for (const auto& inst : c.instances) {
    const ComponentModel* m = registry.find(inst.part);
    models[inst.id] = m;
    if (m == nullptr) {
      error(ValidationCode::UnknownPart, "unknown part \"" + inst.part + "\"", "instance:" + inst.id);
      continue;
    }
    for (auto& problem : check_params(*m, inst.params)) {
      error(ValidationCode::BadParam, std::move(problem), "instance:" + inst.id);
    }
  }

  std::set<PinRef> connected;
  for (const auto& net : c.nets) {
    std::vector<std::string> drivers;
    bool high = false;
    bool low = false;
    for (const auto& ep : net.endpoints) {
      auto it = models.find(ep.component);
      if (it == models.end()) {
        error(ValidationCode::DanglingPinRef, "no instance \"" + ep.component + "\"", "net:" + net.id);
        continue;
      }
      const ComponentModel* m = it->second;
      if (m == nullptr) continue;  // already reported as UNKNOWN_PART
      const PinSpec* pin = m->find_pin(ep.pin);
      if (pin == nullptr) {
        error(ValidationCode::DanglingPinRef, m->part + " has no pin \"" + ep.pin + "\"", "net:" + net.id);
        continue;
      }
      connected.insert(ep);
      if (pin->direction != PinDirection::Output) continue;
      drivers.push_back(ep.component + "." + ep.pin);
      const ComponentInstance* inst = c.find_instance(ep.component);
      if (auto level = constant_level(*m, inst->params)) {
        high = high || *level == LogicValue::One;
        low = low || *level == LogicValue::Zero;
      }
    }
    for (const auto& port : c.top_inputs) {
      if (port.net == net.id) drivers.push_back("input " + port.name);
    }
    if (high && low) {
      error(ValidationCode::ShortCircuit, "net ties a logic-high source to a logic-low source", "net:" + net.id);
    } else if (drivers.size() > 1) {
      std::string list;
      for (const auto& d : drivers) list += (list.empty() ? "" : ", ") + d;
      error(ValidationCode::OutputConflict, "net has " + std::to_string(drivers.size()) + " drivers: " + list,
            "net:" + net.id);
    }
  }
  for (const auto* ports : {&c.top_inputs, &c.top_outputs}) {
    for (const auto& port : *ports) {
      if (c.find_net(port.net) == nullptr) {
        error(ValidationCode::DanglingPinRef, "port \"" + port.name + "\" names no net \"" + port.net + "\"",
              "net:" + port.net);
      }
    }
  }

  for (const auto& inst : c.instances) {
    const ComponentModel* m = models[inst.id];
    if (m == nullptr) continue;
    for (std::size_t i : m->input_pins()) {
      PinRef ref{inst.id, m->pins[i].name};
      if (!connected.contains(ref)) {
        report.warnings.push_back({ValidationCode::FloatingRequiredInput,
                                   "input " + m->pins[i].name + " is unconnected and reads as X",
                                   pin_location(ref)});
      }
    }
  }

  std::sort(report.errors.begin(), report.errors.end());
  std::sort(report.warnings.begin(), report.warnings.end());
  return report;
}

// --- JSON -------------------------------------------------------------------

namespace {

OrderedJson param_json(const ParamValue& v) {
  if (const auto* s = std::get_if<std::string>(&v)) return *s;
  double d = std::get<double>(v);
  if (std::floor(d) == d && std::fabs(d) < 9.0e15) return static_cast<std::int64_t>(d);
  return d;
}

}  // namespace

std::string serialize_circuit(const Circuit& c) {
  OrderedJson doc;
  doc["format_version"] = 1;
  doc["name"] = c.name;
  OrderedJson instances = OrderedJson::array();
  for (const auto& inst : c.instances) {
    OrderedJson j;
    j["id"] = inst.id;
    j["part"] = inst.part;
    OrderedJson params = OrderedJson::object();
    for (const auto& [k, v] : inst.params) params[k] = param_json(v);
    j["params"] = std::move(params);
    j["position"] = {inst.position.x, inst.position.y};
    instances.push_back(std::move(j));
  }
  doc["instances"] = std::move(instances);
  OrderedJson nets = OrderedJson::array();
  for (const auto& net : c.nets) {
    OrderedJson j;
    j["id"] = net.id;
    if (net.label) j["label"] = *net.label;
    OrderedJson eps = OrderedJson::array();
    for (const auto& ep : net.endpoints) eps.push_back({{"component", ep.component}, {"pin", ep.pin}});
    j["endpoints"] = std::move(eps);
    nets.push_back(std::move(j));
  }
  doc["nets"] = std::move(nets);
  for (const auto& [key, ports] : {std::pair{"top_inputs", &c.top_inputs}, std::pair{"top_outputs", &c.top_outputs}}) {
    OrderedJson arr = OrderedJson::array();
    for (const auto& p : *ports) arr.push_back({{"name", p.name}, {"net", p.net}});
    doc[key] = std::move(arr);
  }
  return doc.dump(2) + "\n";
}

Circuit deserialize_circuit(std::string_view bytes) {
  Json doc = detail::parse_json(bytes);
  ObjectReader r(doc, "");
  std::int64_t version = r.integer("format_version");
  if (version != 1) {
    throw FormatError("unsupported format_version " + std::to_string(version), "/format_version");
  }
  Circuit c;
  c.name = r.string("name");

  std::set<std::string> instance_ids;
  const Json& instances = r.array("instances");
  for (std::size_t i = 0; i < instances.size(); ++i) {
    std::string path = detail::child_path("/instances", i);
    ObjectReader ir(instances[i], path);
    ComponentInstance inst;
    inst.id = ir.string("id");
    if (inst.id.empty()) throw FormatError("empty instance id", ir.path("id"));
    if (!instance_ids.insert(inst.id).second) {
      throw FormatError("duplicate instance id \"" + inst.id + "\"", ir.path("id"));
    }
    inst.part = ir.string("part");
    if (const Json* params = ir.optional("params")) {
      if (!params->is_object()) throw FormatError("expected an object", ir.path("params"));
      for (auto it = params->begin(); it != params->end(); ++it) {
        std::string pp = detail::child_path(ir.path("params"), it.key());
        if (it.value().is_string()) {
          inst.params[it.key()] = it.value().get<std::string>();
        } else if (it.value().is_number()) {
          inst.params[it.key()] = it.value().get<double>();
        } else {
          throw FormatError("parameter must be a number or a string", pp);
        }
      }
    }
    if (const Json* pos = ir.optional("position")) {
      std::string pp = ir.path("position");
      if (!pos->is_array() || pos->size() != 2) throw FormatError("expected [x, y]", pp);
      inst.position.x = static_cast<int>(detail::expect_integer((*pos)[0], pp + "/0"));
      inst.position.y = static_cast<int>(detail::expect_integer((*pos)[1], pp + "/1"));
    }
    ir.finish();
    c.instances.push_back(std::move(inst));
  }

  std::set<std::string> net_ids;
  std::map<PinRef, std::string> owner;
  const Json& nets = r.array("nets");
  for (std::size_t i = 0; i < nets.size(); ++i) {
    std::string path = detail::child_path("/nets", i);
    ObjectReader nr(nets[i], path);
    Net net;
    net.id = nr.string("id");
    if (net.id.empty()) throw FormatError("empty net id", nr.path("id"));
    if (!net_ids.insert(net.id).second) throw FormatError("duplicate net id \"" + net.id + "\"", nr.path("id"));
    if (const Json* label = nr.optional("label")) net.label = detail::expect_string(*label, nr.path("label"));
    const Json& eps = nr.array("endpoints");
    for (std::size_t k = 0; k < eps.size(); ++k) {
      std::string ep_path = detail::child_path(nr.path("endpoints"), k);
      ObjectReader er(eps[k], ep_path);
      PinRef ref{er.string("component"), er.string("pin")};
      er.finish();
      auto [it, fresh] = owner.emplace(ref, net.id);
      if (!fresh) {
        throw FormatError(it->second == net.id ? "duplicate endpoint " + ref.component + "." + ref.pin
                                               : "pin " + ref.component + "." + ref.pin + " is already on net \"" +
                                                     it->second + "\"",
                          ep_path);
      }
      net.endpoints.push_back(std::move(ref));
    }
    nr.finish();
    c.nets.push_back(std::move(net));
  }

  auto read_ports = [&](std::string_view key, std::vector<PortBinding>& out, std::set<std::string>& names) {
    const Json& ports = r.array(key);
    std::string base = "/" + std::string(key);
    for (std::size_t i = 0; i < ports.size(); ++i) {
      std::string path = detail::child_path(base, i);
      ObjectReader pr(ports[i], path);
      PortBinding p{pr.string("name"), pr.string("net")};
      pr.finish();
      if (p.name.empty()) throw FormatError("empty port name", path + "/name");
      if (!names.insert(p.name).second) throw FormatError("duplicate port name \"" + p.name + "\"", path + "/name");
      if (!net_ids.contains(p.net)) throw FormatError("no net \"" + p.net + "\"", path + "/net");
      out.push_back(std::move(p));
    }
  };
  std::set<std::string> port_names;
  read_ports("top_inputs", c.top_inputs, port_names);
  read_ports("top_outputs", c.top_outputs, port_names);
  r.finish();
  return c;
}

const Net* net_of(const Circuit& c, const PinRef& p) {
  if (c.find_instance(p.component) == nullptr) {
    throw ContractError("no instance \"" + p.component + "\" in circuit \"" + c.name + "\"");
  }
  for (const auto& net : c.nets) {
    if (std::find(net.endpoints.begin(), net.endpoints.end(), p) != net.endpoints.end()) return &net;
  }
  return nullptr;
}

Circuit merge_nets(Circuit c, std::string_view kept, std::string_view absorbed) {
  if (kept == absorbed) return c;
  auto find = [&c](std::string_view id) {
    auto it = std::find_if(c.nets.begin(), c.nets.end(), [id](const Net& n) { return n.id == id; });
    if (it == c.nets.end()) throw ContractError("no net \"" + std::string(id) + "\"");
    return it;
  };
  auto from = find(absorbed);
  std::vector<PinRef> moved = std::move(from->endpoints);
  c.nets.erase(from);
  auto into = find(kept);
  for (auto& ep : moved) {
    if (std::find(into->endpoints.begin(), into->endpoints.end(), ep) == into->endpoints.end()) {
      into->endpoints.push_back(std::move(ep));
    }
  }
  for (auto* ports : {&c.top_inputs, &c.top_outputs}) {
    for (auto& p : *ports) {
      if (p.net == absorbed) p.net = std::string(kept);
    }
  }
  return c;
}

}  // namespace dclab
