#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace dclab {

/// Four-valued signal domain. Z is "undriven", X is "unknown or conflicting".
enum class LogicValue : std::uint8_t { Zero = 0, One = 1, X = 2, Z = 3 };

inline constexpr LogicValue kAllLogicValues[] = {LogicValue::Zero, LogicValue::One, LogicValue::X,
                                                 LogicValue::Z};

/// Wired resolution of two drivers on one net. Commutative and associative with
/// identity Z; opposing strong values produce X.
constexpr LogicValue resolve(LogicValue a, LogicValue b) noexcept {
  if (a == LogicValue::Z) return b;
  if (b == LogicValue::Z) return a;
  return a == b ? a : LogicValue::X;
}

constexpr bool is_known(LogicValue v) noexcept {
  return v == LogicValue::Zero || v == LogicValue::One;
}

constexpr LogicValue from_bool(bool b) noexcept { return b ? LogicValue::One : LogicValue::Zero; }

// Kleene operators. A floating (Z) gate input reads as X.
constexpr LogicValue as_input(LogicValue v) noexcept {
  return v == LogicValue::Z ? LogicValue::X : v;
}

constexpr LogicValue logic_not(LogicValue a) noexcept {
  switch (as_input(a)) {
    case LogicValue::Zero: return LogicValue::One;
    case LogicValue::One: return LogicValue::Zero;
    default: return LogicValue::X;
  }
}

constexpr LogicValue logic_and(LogicValue a, LogicValue b) noexcept {
  a = as_input(a);
  b = as_input(b);
  if (a == LogicValue::Zero || b == LogicValue::Zero) return LogicValue::Zero;
  if (a == LogicValue::One && b == LogicValue::One) return LogicValue::One;
  return LogicValue::X;
}

constexpr LogicValue logic_or(LogicValue a, LogicValue b) noexcept {
  a = as_input(a);
  b = as_input(b);
  if (a == LogicValue::One || b == LogicValue::One) return LogicValue::One;
  if (a == LogicValue::Zero && b == LogicValue::Zero) return LogicValue::Zero;
  return LogicValue::X;
}

constexpr LogicValue logic_xor(LogicValue a, LogicValue b) noexcept {
  a = as_input(a);
  b = as_input(b);
  if (!is_known(a) || !is_known(b)) return LogicValue::X;
  return from_bool(a != b);
}

/// '0', '1', 'x', 'z' (lower case, the VCD spelling).
char to_char(LogicValue v) noexcept;

/// Accepts 0/1/x/X/z/Z. std_logic letters are projected: L->0, H->1, U/W/-->X.
std::optional<LogicValue> logic_from_char(char c) noexcept;

/// "0", "1", "X", "Z" as used in the JSON file formats.
std::string to_string(LogicValue v);
std::optional<LogicValue> logic_from_string(std::string_view s) noexcept;

using LogicVector = std::vector<LogicValue>;

}  // namespace dclab
