#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "dclab/logic.hpp"
#include "dclab/stimulus.hpp"

namespace dclab {

struct TraceSignal {
  std::string label;
  std::string id;  // stable signal identifier (net name in the simulated design)
  ChangeList changes;

  friend bool operator==(const TraceSignal&, const TraceSignal&) = default;
};

/// Value-change record of the watched signals. Every change list starts at
/// time 0 and strictly increases in time with each entry differing from the
/// previous one.
struct Trace {
  std::vector<TraceSignal> signals;
  TimeNs horizon_ns = 0;

  const TraceSignal* find(std::string_view label) const;

  friend bool operator==(const Trace&, const Trace&) = default;
};

/// Value of the most recent change at or before `t_ns`. Throws ContractError
/// for an unknown signal or a time past the horizon.
LogicValue sample(const Trace& trace, std::string_view signal, TimeNs t_ns);

/// Value Change Dump text (timescale 1ns, one 1-bit wire per signal, X/Z as
/// x/z). Byte-identical for identical traces.
std::string export_vcd(const Trace& trace);

enum class LogLevel { Info, Warning, Error };

struct LogEntry {
  LogLevel level = LogLevel::Info;
  TimeNs time_ns = 0;
  std::string code;
  std::string message;

  friend bool operator==(const LogEntry&, const LogEntry&) = default;
};

struct SimLog {
  std::vector<LogEntry> entries;

  void add(LogLevel level, TimeNs t, std::string code, std::string message);
  bool has(std::string_view code) const;
  std::size_t count(std::string_view code) const;
  /// One line per entry: "LEVEL time_ns CODE message".
  std::string to_text() const;
};

/// Run-terminating kernel fault (OSCILLATION, PROCESS_LOOP).
struct SimFault {
  std::string code;
  TimeNs time_ns = 0;
  std::vector<std::string> nets;
  std::string message;
};

struct SimResult {
  Trace trace;
  SimLog log;
  std::optional<SimFault> fault;
};

}  // namespace dclab
