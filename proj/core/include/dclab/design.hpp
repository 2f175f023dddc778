#pragma once

#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "dclab/netlist.hpp"
#include "dclab/sim.hpp"
#include "dclab/vhdl/vhdl.hpp"

namespace dclab {

enum class Repr { Netlist, Vhdl };

std::string_view to_string(Repr r) noexcept;

/// VHDL source files plus the name of the top entity.
struct VhdlSource {
  std::vector<vhdl::VhdlUnit> units;
  std::string top;
};

/// Homework may be handed in as a graphical circuit or as VHDL.
using Design = std::variant<Circuit, VhdlSource>;

Repr repr_of(const Design& d) noexcept;

/// A design checked once and ready to be simulated under many stimuli.
class CompiledDesign {
 public:
  /// Throws ContractError carrying the validation errors or VHDL diagnostics.
  static CompiledDesign compile(const Design& d, const ComponentRegistry& registry);

  SimResult simulate(const StimulusSet& stim, const SimConfig& cfg) const;

  /// Trace label of top port `port`: the port name for netlists, port_label
  /// for VHDL.
  std::string label(std::string_view port) const;
  bool has_output(std::string_view port) const;
  bool has_input(std::string_view port) const;
  /// Compile warnings (floating inputs, VHDL warnings), one line each.
  const std::vector<std::string>& warnings() const noexcept { return warnings_; }

 private:
  CompiledDesign() = default;

  const ComponentRegistry* registry_ = nullptr;
  std::variant<Circuit, vhdl::ElaboratedDesign> design_;
  std::vector<std::string> warnings_;
};

SimResult simulate_design(const Design& d, const StimulusSet& stim, const SimConfig& cfg,
                          const ComponentRegistry& registry);

}  // namespace dclab
