#pragma once

#include <cstdint>
#include <string>
#include <variant>
#include <vector>

#include "dclab/kernel.hpp"
#include "dclab/netlist.hpp"
#include "dclab/stimulus.hpp"
#include "dclab/trace.hpp"

namespace dclab {

/// A user-placed watch point: a net id or a pin.
struct Probe {
  std::string id;
  std::variant<std::string, PinRef> target;
  std::string label;
};

enum class WatchMode {
  Ports,    // top inputs and outputs
  AllNets,  // ports plus every net, labelled n_<id>
  Probes,   // only the listed probes
};

struct SimConfig {
  TimeNs horizon_ns = 1000;
  std::uint32_t max_deltas_per_instant = 1000;
  WatchMode watch = WatchMode::AllNets;
  std::vector<Probe> probes;
};

/// Lowers a netlist onto the kernel. Throws ContractError if the circuit has
/// validation errors.
kernel::SimDesign compile_circuit(const Circuit& c, const ComponentRegistry& registry);

/// Watch list over a compiled design: ports first (inputs, then outputs),
/// then internal signals for AllNets. Probes are resolved by simulate().
std::vector<kernel::WatchSignal> watch_list(const kernel::SimDesign& design, WatchMode mode);

/// Binds `stim` to the design's input ports: unknown names throw
/// ContractError; uncovered inputs get constant X and an UNBOUND_INPUT warning.
std::vector<kernel::Waveform> bind_stimulus(const kernel::SimDesign& design,
                                            const StimulusSet& stim, TimeNs horizon_ns,
                                            SimLog& log);

/// Event-driven simulation of a validated netlist.
SimResult simulate(const Circuit& c, const StimulusSet& stim, const SimConfig& cfg,
                   const ComponentRegistry& registry);

}  // namespace dclab
