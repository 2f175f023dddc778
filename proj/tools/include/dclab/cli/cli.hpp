#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "dclab/design.hpp"

namespace dclab::cli {

enum ExitCode { kOk = 0, kNegative = 1, kUsage = 2 };

/// Entry point of the dclab tool; `args` excludes the program name. JSON and
/// VCD payloads go to `out`, messages to `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

/// Reads a design from files: one or more .vhd/.vhdl files, a netlist JSON,
/// or a design payload ({"repr": ...}). Throws FormatError / Error.
Design load_design(const std::vector<std::string>& files, const std::string& top);

}  // namespace dclab::cli
