#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "dclab/vhdl/vhdl.hpp"

namespace dclab::vhdl::detail {

enum class Tok { Ident, Char, String, Integer, Real, Symbol, Tick, End };

struct Token {
  Tok kind = Tok::End;
  std::string text;      // lowercased identifier, symbol, literal contents
  std::string spelling;  // source text of an identifier
  std::int64_t number = 0;
  double real = 0.0;
  Loc loc;
};

/// Splits one source file into tokens. A trailing End token is always
/// present. Problems are appended to `diags` as LEX errors.
std::vector<Token> lex(std::string_view text, std::uint32_t file, const std::string& file_name,
                       std::vector<Diagnostic>& diags);

bool is_reserved(std::string_view lower);

}  // namespace dclab::vhdl::detail
