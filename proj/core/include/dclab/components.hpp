#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "dclab/logic.hpp"
#include "dclab/stimulus.hpp"

namespace dclab {

enum class PinDirection { Input, Output };

struct PinSpec {
  std::string name;
  PinDirection direction = PinDirection::Input;
  int index = 0;  // physical pin number, documentation only
};

enum class ComponentKind { Combinational, Sequential, Source, Display };

std::string_view to_string(ComponentKind k) noexcept;

using ParamValue = std::variant<double, std::string>;
using ParamMap = std::map<std::string, ParamValue>;

struct ParamSpec {
  enum class Type { Number, Choice };

  std::string name;
  Type type = Type::Number;
  bool integer = false;
  double min = 0.0;
  double max = 0.0;
  std::vector<std::string> choices;
  std::optional<ParamValue> default_value;
};

/// Boolean function over a model's pins, evaluated with Kleene semantics so
/// X inputs only produce X where the output genuinely depends on them.
class BoolExpr {
 public:
  enum class Op : std::uint8_t { Const, Pin, Not, And, Or, Xor };

  using PinLookup = std::function<std::optional<std::size_t>(std::string_view)>;

  /// Grammar: or := xor {'|' xor}; xor := and {'^' and}; and := unary {'&' unary};
  /// unary := '~' unary | '(' or ')' | '0' | '1' (quoted) | pin-name.
  /// Throws FormatError naming the offending column.
  /// `$name` refers to an entry of `terms` (named sub-expressions).
  static BoolExpr parse(std::string_view text, const PinLookup& lookup,
                        const std::map<std::string, BoolExpr, std::less<>>* terms = nullptr);

  static BoolExpr constant(LogicValue v);
  static BoolExpr pin(std::size_t index);
  static BoolExpr unary_not(BoolExpr e);
  static BoolExpr nary(Op op, std::vector<BoolExpr> args);

  LogicValue eval(std::span<const LogicValue> pin_values) const;

  Op op() const noexcept { return op_; }
  LogicValue value() const noexcept { return value_; }
  std::size_t pin_index() const noexcept { return pin_; }
  const std::vector<BoolExpr>& args() const noexcept { return args_; }

  void collect_pins(std::set<std::size_t>& out) const;

 private:
  Op op_ = Op::Const;
  LogicValue value_ = LogicValue::X;
  std::size_t pin_ = 0;
  std::vector<BoolExpr> args_;
};

/// Datasheet-style function table. `match` holds one character per input
/// column: '0', '1' or '-' (don't care). The first matching row wins.
struct FunctionTable {
  struct Row {
    std::string match;
    LogicVector outputs;
  };

  std::vector<std::size_t> inputs;
  std::vector<std::size_t> outputs;
  std::vector<Row> rows;
};

struct CombinationalBehavior {
  /// (output pin index, function) pairs. Empty when `table` is used.
  std::vector<std::pair<std::size_t, BoolExpr>> functions;
  std::optional<FunctionTable> table;
};

enum class SequentialRule { DFlipFlop, SyncCounter4 };

std::string_view to_string(SequentialRule r) noexcept;

struct SequentialBehavior {
  SequentialRule rule = SequentialRule::DFlipFlop;
  /// Role name -> pin index, one map per independent section (a 74LS74 has two).
  std::vector<std::map<std::string, std::size_t>> sections;
  std::size_t state_bits = 0;
  LogicVector reset_state;
};

enum class SourceTemplate { Constant, Switch, Clock };

struct SourceBehavior {
  SourceTemplate source = SourceTemplate::Constant;
  LogicValue level = LogicValue::Zero;  // Constant only
};

enum class DisplayVariant { SevenSegment, Led };

struct DisplayBehavior {
  DisplayVariant variant = DisplayVariant::SevenSegment;
};

using Behavior =
    std::variant<CombinationalBehavior, SequentialBehavior, SourceBehavior, DisplayBehavior>;

struct ComponentModel {
  std::string part;
  std::string description;
  ComponentKind kind = ComponentKind::Combinational;
  std::vector<PinSpec> pins;
  TimeNs delay_ns = 10;
  std::vector<ParamSpec> params;
  Behavior behavior;

  std::optional<std::size_t> pin_index(std::string_view name) const;
  const PinSpec* find_pin(std::string_view name) const;
  const ParamSpec* find_param(std::string_view name) const;
  std::vector<std::size_t> input_pins() const;
  std::vector<std::size_t> output_pins() const;
};

/// Immutable name -> model map. The built-in catalog is compiled into the
/// library from the JSON fixtures under core/data/parts.
class ComponentRegistry {
 public:
  static const ComponentRegistry& builtin();

  /// Parses one model fixture. Throws FormatError.
  static ComponentModel parse_model(std::string_view json);

  void add(ComponentModel model);
  /// Adds every *.json model fixture in `dir`.
  void load_directory(const std::string& dir);

  const ComponentModel* find(std::string_view part) const;
  /// Throws ContractError for an unknown part.
  const ComponentModel& at(std::string_view part) const;
  std::vector<std::string> parts() const;
  std::size_t size() const noexcept { return models_.size(); }

 private:
  std::map<std::string, std::shared_ptr<const ComponentModel>, std::less<>> models_;
};

// --- parameters ------------------------------------------------------------

/// Human-readable problems with `params` against the model's declarations;
/// empty when every key is declared and in range.
std::vector<std::string> check_params(const ComponentModel& model, const ParamMap& params);

/// Propagation delay, honouring a "delay_ns" override.
TimeNs effective_delay(const ComponentModel& model, const ParamMap& params);

/// Numeric parameter value or the declared default.
std::optional<double> param_number(const ComponentModel& model, const ParamMap& params,
                                   std::string_view name);

// --- behaviour ---------------------------------------------------------------

using PinValues = std::map<std::string, LogicValue>;

/// Values of every OUTPUT pin. Throws ContractError if an INPUT pin is missing
/// or the model is not combinational.
PinValues eval_combinational(const ComponentModel& model, const PinValues& inputs);

/// Index-based form used by the kernel. `pins` is indexed by pin index (values
/// at output positions are ignored); returns a vector of the same size with
/// outputs filled in.
LogicVector eval_combinational(const ComponentModel& model, std::span<const LogicValue> pins);

/// Clock transition between two consecutive samples of a pin. Transitions
/// through X are only "possibly" rising or falling.
enum class Edge : std::uint8_t { None, Rising, Falling, PossiblyRising, PossiblyFalling };

/// Clock activity seen by a sequential model, per pin index.
struct EdgeEvent {
  std::vector<Edge> pins;

  Edge at(std::size_t pin) const noexcept { return pin < pins.size() ? pins[pin] : Edge::None; }
  /// Convenience: a single named clock pin with the given edge.
  static EdgeEvent on(const ComponentModel& model, std::string_view pin, Edge e);
  static EdgeEvent detect(std::span<const LogicValue> previous, std::span<const LogicValue> current);
};

Edge classify_edge(LogicValue before, LogicValue after) noexcept;

using StateVector = LogicVector;

struct SequentialStep {
  StateVector state;
  PinValues outputs;
};

/// Reset vector, or the "init" parameter when present.
StateVector initial_state(const ComponentModel& model, const ParamMap& params = {});

/// Deterministic next state and outputs. Asynchronous clear/preset dominate;
/// a possible (X) edge on a clock makes the section's state X unless both
/// outcomes agree, which only happens when an asynchronous control or a
/// synchronous load of the current value holds it.
/// X on other inputs is resolved by consensus over their 0/1 completions.
SequentialStep step_sequential(const ComponentModel& model, const StateVector& state,
                               const PinValues& inputs, const EdgeEvent& edge);

struct IndexedStep {
  StateVector state;
  LogicVector pins;  // outputs filled in, indexed by pin
};
IndexedStep step_sequential(const ComponentModel& model, const StateVector& state,
                            std::span<const LogicValue> pins, const EdgeEvent& edge);

/// Power-on output levels of a combinational part from its "init" bitmask
/// (bit i = i-th output pin); X everywhere when absent.
LogicVector power_on_outputs(const ComponentModel& model, const ParamMap& params);

enum class SegmentState : std::uint8_t { Dark, Lit, Indeterminate };

struct DisplayState {
  std::vector<std::pair<std::string, SegmentState>> segments;

  std::set<std::string> lit() const;
  bool any_indeterminate() const;
};

/// Common-cathode by default (input 1 = lit); the "polarity" parameter selects
/// common-anode.
DisplayState decode_display(const ComponentModel& model, const PinValues& inputs,
                            const ParamMap& params = {});

/// Waveform template a SOURCE part produces with the given parameters.
SignalSpec source_signal(const ComponentModel& model, const ParamMap& params);

}  // namespace dclab
