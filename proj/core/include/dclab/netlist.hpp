#pragma once

#include <compare>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "dclab/components.hpp"

namespace dclab {

struct PinRef {
  std::string component;
  std::string pin;

  friend auto operator<=>(const PinRef&, const PinRef&) = default;
};

struct Position {
  int x = 0;
  int y = 0;

  friend bool operator==(const Position&, const Position&) = default;
};

struct ComponentInstance {
  std::string id;
  std::string part;
  ParamMap params;
  Position position;  // canvas pixels, not used by simulation

  friend bool operator==(const ComponentInstance&, const ComponentInstance&) = default;
};

struct Net {
  std::string id;
  std::optional<std::string> label;
  std::vector<PinRef> endpoints;

  friend bool operator==(const Net&, const Net&) = default;
};

/// Named external port bound to a net.
struct PortBinding {
  std::string name;
  std::string net;

  friend bool operator==(const PortBinding&, const PortBinding&) = default;
};

struct Circuit {
  std::string name;
  std::vector<ComponentInstance> instances;
  std::vector<Net> nets;
  std::vector<PortBinding> top_inputs;
  std::vector<PortBinding> top_outputs;

  const ComponentInstance* find_instance(std::string_view id) const;
  const Net* find_net(std::string_view id) const;

  friend bool operator==(const Circuit&, const Circuit&) = default;
};

enum class ValidationCode {
  OutputConflict,
  ShortCircuit,
  DanglingPinRef,
  UnknownPart,
  BadParam,
  FloatingRequiredInput,
};

std::string_view to_string(ValidationCode c) noexcept;

struct ValidationIssue {
  ValidationCode code;
  std::string message;
  std::string location;  // "net:<id>", "instance:<id>" or "instance:<id>/pin:<name>"

  friend auto operator<=>(const ValidationIssue&, const ValidationIssue&) = default;
};

struct ValidationReport {
  std::vector<ValidationIssue> errors;
  std::vector<ValidationIssue> warnings;

  bool ok() const noexcept { return errors.empty(); }
};

/// Edit-time rules: at most one driver per net, no VCC/GND tie, every pin and
/// part resolves, parameters in range. Unconnected inputs are warnings.
/// Entries are sorted, so the result does not depend on list order.
ValidationReport validate_circuit(const Circuit& c, const ComponentRegistry& registry);

/// JSON netlist, format_version 1. Deterministic bytes.
std::string serialize_circuit(const Circuit& c);

/// Throws FormatError: syntax errors carry a byte offset, schema errors a JSON
/// path. Rejects unknown fields, unknown format_version, duplicate ids and a pin
/// listed on more than one net.
Circuit deserialize_circuit(std::string_view bytes);

/// The net containing `p`, or nullptr when the pin is floating. Throws
/// ContractError if `p.component` is not an instance of `c`.
const Net* net_of(const Circuit& c, const PinRef& p);

/// Editor action: moves every endpoint of net `absorbed` onto net `kept`,
/// rebinds ports, and removes `absorbed`.
Circuit merge_nets(Circuit c, std::string_view kept, std::string_view absorbed);

}  // namespace dclab
