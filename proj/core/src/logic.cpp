#include "dclab/logic.hpp"

#include "dclab/error.hpp"

namespace dclab {

char to_char(LogicValue v) noexcept {
  switch (v) {
    case LogicValue::Zero: return '0';
    case LogicValue::One: return '1';
    case LogicValue::X: return 'x';
    case LogicValue::Z: return 'z';
  }
  return 'x';
}

std::optional<LogicValue> logic_from_char(char c) noexcept {
  switch (c) {
    case '0':
    case 'L':
    case 'l': return LogicValue::Zero;
    case '1':
    case 'H':
    case 'h': return LogicValue::One;
    case 'x':
    case 'X':
    case 'U':
    case 'u':
    case 'W':
    case 'w':
    case '-': return LogicValue::X;
    case 'z':
    case 'Z': return LogicValue::Z;
    default: return std::nullopt;
  }
}

std::string to_string(LogicValue v) {
  switch (v) {
    case LogicValue::Zero: return "0";
    case LogicValue::One: return "1";
    case LogicValue::X: return "X";
    case LogicValue::Z: return "Z";
  }
  return "X";
}

std::optional<LogicValue> logic_from_string(std::string_view s) noexcept {
  if (s == "0") return LogicValue::Zero;
  if (s == "1") return LogicValue::One;
  if (s == "X" || s == "x") return LogicValue::X;
  if (s == "Z" || s == "z") return LogicValue::Z;
  return std::nullopt;
}

FormatError::FormatError(std::string reason, std::string path, std::optional<std::size_t> offset)
    : Error([&] {
        std::string what = reason;
        if (!path.empty()) what += " (at " + path + ")";
        if (offset) what += " (byte offset " + std::to_string(*offset) + ")";
        return what;
      }()),
      reason_(std::move(reason)),
      path_(std::move(path)),
      offset_(offset) {}

}  // namespace dclab
