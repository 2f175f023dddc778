#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "dclab/logic.hpp"

namespace dclab {

/// Simulation time in nanoseconds.
using TimeNs = std::uint64_t;

/// One entry of a change list: the signal takes `value` from `time_ns` on.
struct Change {
  TimeNs time_ns = 0;
  LogicValue value = LogicValue::X;

  friend bool operator==(const Change&, const Change&) = default;
};

using ChangeList = std::vector<Change>;

enum class SignalKind { Constant, Clock, Pattern };

/// Waveform of one input port, entered either as parameters (constant, clock)
/// or as a drawn pattern of edges.
struct SignalSpec {
  SignalKind kind = SignalKind::Constant;
  LogicValue value = LogicValue::Zero;  // Constant
  double freq_hz = 0.0;                 // Clock
  double duty = 0.5;                    // Clock, in (0, 1)
  TimeNs phase_ns = 0;                  // Clock
  ChangeList edges;                     // Pattern

  static SignalSpec constant(LogicValue v);
  static SignalSpec clock(double freq_hz, double duty = 0.5, TimeNs phase_ns = 0);
  static SignalSpec pattern(ChangeList edges);

  /// Throws FormatError (path relative to the stimulus object) when an invariant fails.
  void check() const;

  friend bool operator==(const SignalSpec&, const SignalSpec&) = default;
};

/// Clock period in ns: round(1e9 / freq_hz).
TimeNs clock_period_ns(const SignalSpec& clock);
/// Length of the high phase in ns: round(duty * period).
TimeNs clock_high_ns(const SignalSpec& clock);

struct StimulusSet {
  std::map<std::string, SignalSpec> assignments;
  TimeNs horizon_ns = 1;

  friend bool operator==(const StimulusSet&, const StimulusSet&) = default;
};

/// Change list of `spec` over [0, horizon): strictly increasing times, each
/// entry differing from its predecessor, first entry at 0.
///
/// Clocks start low. Within each period the low phase comes first, so with
/// phase 0 the rising edges fall at k*P + (P - high) and falling edges at
/// (k+1)*P. Throws ContractError for horizon 0.
ChangeList expand(const SignalSpec& spec, TimeNs horizon_ns);

std::string serialize_stimulus(const StimulusSet& s);
/// Throws FormatError with a JSON path (schema problems) or byte offset
/// (syntax problems).
StimulusSet deserialize_stimulus(std::string_view bytes);

}  // namespace dclab
