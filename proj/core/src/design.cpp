#include "dclab/design.hpp"

#include <algorithm>

#include "dclab/error.hpp"

namespace dclab {

std::string_view to_string(Repr r) noexcept { return r == Repr::Netlist ? "NETLIST" : "VHDL"; }

Repr repr_of(const Design& d) noexcept { return std::holds_alternative<Circuit>(d) ? Repr::Netlist : Repr::Vhdl; }

CompiledDesign CompiledDesign::compile(const Design& d, const ComponentRegistry& registry) {
  CompiledDesign out;
  out.registry_ = &registry;
  if (const auto* c = std::get_if<Circuit>(&d)) {
    ValidationReport report = validate_circuit(*c, registry);
    if (!report.ok()) {
      std::string msg = "circuit \"" + c->name + "\" does not validate:";
      for (const auto& e : report.errors) {
        msg += "\n" + std::string(to_string(e.code)) + " at " + e.location + ": " + e.message;
      }
      throw ContractError(msg);
    }
    for (const auto& w : report.warnings) {
      out.warnings_.push_back(std::string(to_string(w.code)) + " at " + w.location + ": " + w.message);
    }
    out.design_ = *c;
    return out;
  }
  const auto& src = std::get<VhdlSource>(d);
  std::string top = src.top;
  if (top.empty()) {
    auto parsed = vhdl::parse_vhdl(src.units);
    if (!vhdl::has_errors(parsed.diagnostics)) {
      if (auto t = vhdl::infer_top(parsed.ast)) top = *t;
    }
    if (top.empty() && !vhdl::has_errors(parsed.diagnostics)) {
      throw ContractError("cannot tell which entity is the top level; name it explicitly");
    }
  }
  std::vector<vhdl::Diagnostic> warnings;
  out.design_ = vhdl::compile_vhdl(src.units, top, registry, &warnings);
  for (const auto& w : warnings) out.warnings_.push_back(w.to_string());
  return out;
}

SimResult CompiledDesign::simulate(const StimulusSet& stim, const SimConfig& cfg) const {
  if (const auto* c = std::get_if<Circuit>(&design_)) return dclab::simulate(*c, stim, cfg, *registry_);
  SimResult r = vhdl::simulate_elaborated(std::get<vhdl::ElaboratedDesign>(design_), stim, cfg);
  if (warnings_.empty()) return r;
  SimLog log;
  for (const auto& w : warnings_) log.add(LogLevel::Warning, 0, "VHDL_WARNING", w);
  log.entries.insert(log.entries.end(), r.log.entries.begin(), r.log.entries.end());
  r.log = std::move(log);
  return r;
}

std::string CompiledDesign::label(std::string_view port) const {
  if (std::holds_alternative<Circuit>(design_)) return std::string(port);
  return vhdl::port_label(port);
}

namespace {

bool has_port(const std::vector<PortBinding>& ports, std::string_view name) {
  return std::any_of(ports.begin(), ports.end(), [&](const PortBinding& p) { return p.name == name; });
}

bool has_port(const std::vector<kernel::PortDecl>& ports, std::string_view name) {
  std::string key = vhdl::port_label(name);
  return std::any_of(ports.begin(), ports.end(), [&](const kernel::PortDecl& p) { return p.name == key; });
}

}  // namespace

bool CompiledDesign::has_output(std::string_view port) const {
  if (const auto* c = std::get_if<Circuit>(&design_)) return has_port(c->top_outputs, port);
  return has_port(std::get<vhdl::ElaboratedDesign>(design_).outputs, port);
}

bool CompiledDesign::has_input(std::string_view port) const {
  if (const auto* c = std::get_if<Circuit>(&design_)) return has_port(c->top_inputs, port);
  return has_port(std::get<vhdl::ElaboratedDesign>(design_).inputs, port);
}

SimResult simulate_design(const Design& d, const StimulusSet& stim, const SimConfig& cfg,
                          const ComponentRegistry& registry) {
  if (const auto* c = std::get_if<Circuit>(&d)) return simulate(*c, stim, cfg, registry);
  return CompiledDesign::compile(d, registry).simulate(stim, cfg);
}

}  // namespace dclab
