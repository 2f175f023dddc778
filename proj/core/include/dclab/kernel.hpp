#pragma once

#include <cstdint>
#include <limits>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "dclab/logic.hpp"
#include "dclab/stimulus.hpp"
#include "dclab/trace.hpp"

/// Representation-neutral event-driven simulation core. Netlists and
/// elaborated VHDL both lower to a SimDesign: bit-level nets, per-process
/// drivers resolved with resolve(), and processes woken by net events or
/// timers.
namespace dclab::kernel {

using NetId = std::uint32_t;
using DriverId = std::uint32_t;
using ProcessId = std::uint32_t;

inline constexpr NetId kNoNet = std::numeric_limits<NetId>::max();

/// Services a process may use while it runs.
class Context {
 public:
  virtual ~Context() = default;

  virtual TimeNs now() const = 0;
  virtual LogicValue value(NetId net) const = 0;
  /// Value before the most recent change of `net`.
  virtual LogicValue last_value(NetId net) const = 0;
  /// True when `net` changed in the current delta cycle.
  virtual bool event(NetId net) const = 0;
  /// True while the process was woken by its own timer.
  virtual bool timer_expired() const = 0;

  /// Transport-delay assignment. A zero delay lands in the next delta cycle.
  /// Pending transactions of the driver at or after the new one are dropped.
  virtual void drive(DriverId driver, LogicValue value, TimeNs delay) = 0;
  /// Wake this process after `delay` ns (replaces an earlier request).
  virtual void wake_after(TimeNs delay) = 0;

  virtual void warn(std::string code, std::string message) = 0;
  /// Abort the run with a fault after the current process returns.
  virtual void fail(std::string code, std::string message) = 0;
};

class Process {
 public:
  virtual ~Process() = default;
  /// Called once at time 0 and then on every wake-up.
  virtual void run(Context& ctx) = 0;
};

struct NetDecl {
  std::string name;
  LogicValue initial = LogicValue::Z;
};

struct DriverDecl {
  NetId net = kNoNet;
  LogicValue initial = LogicValue::Z;
};

struct PortDecl {
  std::string name;
  NetId net = kNoNet;
};

/// One runnable instance of a design. Processes carry mutable run state, so a
/// SimDesign is built fresh for every simulation.
struct SimDesign {
  std::vector<NetDecl> nets;
  std::vector<DriverDecl> drivers;
  std::vector<std::unique_ptr<Process>> processes;
  std::vector<std::vector<ProcessId>> readers;  // per net
  std::vector<PortDecl> inputs;
  std::vector<PortDecl> outputs;
  /// Internal signals offered when every net is watched.
  std::vector<PortDecl> internals;

  NetId add_net(std::string name, LogicValue initial = LogicValue::Z);
  DriverId add_driver(NetId net, LogicValue initial = LogicValue::Z);
  ProcessId add_process(std::unique_ptr<Process> p, std::span<const NetId> sensitivity);
  void sensitize(ProcessId p, NetId net);
};

struct Waveform {
  NetId net = kNoNet;
  ChangeList changes;
};

struct WatchSignal {
  std::string label;
  NetId net = kNoNet;  // kNoNet watches an unconnected point (constant Z)
};

struct RunOptions {
  TimeNs horizon_ns = 1000;
  std::uint32_t max_deltas_per_instant = 1000;
};

/// Runs the classic delta-cycle loop over [0, horizon]. Stimulus waveforms
/// drive their nets through dedicated zero-delay drivers.
SimResult run(SimDesign& design, std::vector<Waveform> stimuli,
              const std::vector<WatchSignal>& watch, const RunOptions& options);

}  // namespace dclab::kernel
