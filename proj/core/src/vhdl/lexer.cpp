#include "lexer.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <limits>

namespace dclab::vhdl::detail {

namespace {

constexpr std::array kReserved = {
    "abs",       "access",   "after",     "alias",      "all",       "and",      "architecture", "array",
    "assert",    "attribute", "begin",    "block",      "body",      "buffer",   "bus",          "case",
    "component", "configuration", "constant", "disconnect", "downto", "else",    "elsif",        "end",
    "entity",    "exit",     "file",      "for",        "function",  "generate", "generic",      "group",
    "guarded",   "if",       "impure",    "in",         "inertial",  "inout",    "is",           "label",
    "library",   "linkage",  "literal",   "loop",       "map",       "mod",      "nand",         "new",
    "next",      "nor",      "not",       "null",       "of",        "on",       "open",         "or",
    "others",    "out",      "package",   "port",       "postponed", "procedure", "process",     "pure",
    "range",     "record",   "register",  "reject",     "rem",       "report",   "return",       "rol",
    "ror",       "select",   "severity",  "signal",     "shared",    "sla",      "sll",          "sra",
    "srl",       "subtype",  "then",      "to",         "transport", "type",     "unaffected",   "units",
    "until",     "use",      "variable",  "wait",       "when",      "while",    "with",         "xnor",
    "xor",       "context",  "force",     "release",    "protected", "default",  "parameter",    "vunit",
};

char lower(char c) { return static_cast<char>(std::tolower(static_cast<unsigned char>(c))); }
bool ident_char(char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_'; }

class Lexer {
 public:
  Lexer(std::string_view text, std::uint32_t file, const std::string& name, std::vector<Diagnostic>& diags)
      : s_(text), file_(file), name_(name), diags_(diags) {}

  std::vector<Token> run() {
    std::vector<Token> out;
    while (true) {
      skip_trivia();
      if (pos_ >= s_.size()) break;
      Token t = next(out.empty() ? nullptr : &out.back());
      if (t.kind != Tok::End) out.push_back(std::move(t));
    }
    Token end;
    end.kind = Tok::End;
    end.loc = here();
    out.push_back(end);
    return out;
  }

 private:
  Loc here() const { return {file_, line_, static_cast<std::uint32_t>(pos_ - line_start_ + 1), 1}; }

  void error(Loc at, std::string msg) {
    diags_.push_back({Severity::Error, Category::Lex, name_, at.line, at.column, std::move(msg)});
  }

  void newline() {
    ++line_;
    line_start_ = pos_;
  }

  void skip_trivia() {
    while (pos_ < s_.size()) {
      char c = s_[pos_];
      if (c == '\n') {
        ++pos_;
        newline();
      } else if (std::isspace(static_cast<unsigned char>(c))) {
        ++pos_;
      } else if (c == '-' && pos_ + 1 < s_.size() && s_[pos_ + 1] == '-') {
        while (pos_ < s_.size() && s_[pos_] != '\n') ++pos_;
      } else if (c == '/' && pos_ + 1 < s_.size() && s_[pos_ + 1] == '*') {
        Loc start = here();
        pos_ += 2;
        while (pos_ < s_.size() && !(s_[pos_] == '*' && pos_ + 1 < s_.size() && s_[pos_ + 1] == '/')) {
          if (s_[pos_] == '\n') {
            ++pos_;
            newline();
          } else {
            ++pos_;
          }
        }
        if (pos_ >= s_.size()) {
          error(start, "unterminated block comment");
        } else {
          pos_ += 2;
        }
      } else {
        break;
      }
    }
  }

  Token next(const Token* prev) {
    Token t;
    t.loc = here();
    std::size_t start = pos_;
    char c = s_[pos_];

    if (std::isalpha(static_cast<unsigned char>(c))) {
      while (pos_ < s_.size() && ident_char(s_[pos_])) ++pos_;
      t.spelling = std::string(s_.substr(start, pos_ - start));
      t.text = t.spelling;
      std::transform(t.text.begin(), t.text.end(), t.text.begin(), lower);
      if (pos_ < s_.size() && s_[pos_] == '"' && (t.text == "b" || t.text == "x" || t.text == "o")) {
        return bit_string(t, t.text[0]);
      }
      t.kind = Tok::Ident;
      finish(t, start);
      return t;
    }
    if (c == '\\') {  // extended identifier
      ++pos_;
      while (pos_ < s_.size() && s_[pos_] != '\\' && s_[pos_] != '\n') ++pos_;
      if (pos_ >= s_.size() || s_[pos_] != '\\') {
        error(t.loc, "unterminated extended identifier");
        return {};
      }
      ++pos_;
      t.kind = Tok::Ident;
      t.spelling = std::string(s_.substr(start, pos_ - start));
      t.text = t.spelling;
      finish(t, start);
      return t;
    }
    if (std::isdigit(static_cast<unsigned char>(c))) return number(t, start);
    if (c == '"') return string(t, start);
    if (c == '\'') {
      bool attribute_context =
          prev != nullptr && ((prev->kind == Tok::Ident && !is_reserved(prev->text)) ||
                              (prev->kind == Tok::Symbol && prev->text == ")"));
      if (!attribute_context && pos_ + 2 < s_.size() && s_[pos_ + 2] == '\'') {
        t.kind = Tok::Char;
        t.text = std::string(1, s_[pos_ + 1]);
        pos_ += 3;
        finish(t, start);
        return t;
      }
      ++pos_;
      t.kind = Tok::Tick;
      t.text = "'";
      finish(t, start);
      return t;
    }
    static constexpr std::array kTwo = {"<=", ">=", "=>", ":=", "/=", "**", "<>", "?="};
    for (const char* sym : kTwo) {
      if (s_.substr(pos_, 2) == sym) {
        pos_ += 2;
        t.kind = Tok::Symbol;
        t.text = sym;
        finish(t, start);
        return t;
      }
    }
    static constexpr std::string_view kOne = "();:,.&|+-*/<>=[]";
    if (kOne.find(c) != std::string_view::npos) {
      ++pos_;
      t.kind = Tok::Symbol;
      t.text = std::string(1, c);
      finish(t, start);
      return t;
    }
    ++pos_;
    if (static_cast<unsigned char>(c) >= 0x80) {
      while (pos_ < s_.size() && (static_cast<unsigned char>(s_[pos_]) & 0xC0) == 0x80) ++pos_;
      error(t.loc, "non-ASCII character outside a comment");
    } else {
      error(t.loc, std::string("unexpected character '") + c + "'");
    }
    return {};
  }

  void finish(Token& t, std::size_t start) {
    t.loc.length = static_cast<std::uint32_t>(std::max<std::size_t>(1, pos_ - start));
  }

  Token number(Token& t, std::size_t start) {
    std::string digits;
    auto take_digits = [&] {
      while (pos_ < s_.size() && (std::isdigit(static_cast<unsigned char>(s_[pos_])) || s_[pos_] == '_')) {
        if (s_[pos_] != '_') digits.push_back(s_[pos_]);
        ++pos_;
      }
    };
    take_digits();
    bool real = false;
    if (pos_ + 1 < s_.size() && s_[pos_] == '.' && std::isdigit(static_cast<unsigned char>(s_[pos_ + 1]))) {
      real = true;
      digits.push_back('.');
      ++pos_;
      take_digits();
    }
    if (pos_ < s_.size() && (s_[pos_] == 'e' || s_[pos_] == 'E')) {
      std::size_t save = pos_;
      std::string exp = "e";
      ++pos_;
      if (pos_ < s_.size() && (s_[pos_] == '+' || s_[pos_] == '-')) exp.push_back(s_[pos_++]);
      if (pos_ < s_.size() && std::isdigit(static_cast<unsigned char>(s_[pos_]))) {
        while (pos_ < s_.size() && std::isdigit(static_cast<unsigned char>(s_[pos_]))) exp.push_back(s_[pos_++]);
        digits += exp;
        real = real || exp.find('-') != std::string::npos;
      } else {
        pos_ = save;
      }
    }
    if (pos_ < s_.size() && s_[pos_] == '#') {
      error(t.loc, "based literals are not supported");
      while (pos_ < s_.size() && (ident_char(s_[pos_]) || s_[pos_] == '#')) ++pos_;
      t.kind = Tok::Integer;
      finish(t, start);
      return t;
    }
    finish(t, start);
    t.text = digits;
    double v = std::strtod(digits.c_str(), nullptr);
    if (real) {
      t.kind = Tok::Real;
      t.real = v;
      return t;
    }
    t.kind = Tok::Integer;
    if (v > 9.0e18) {
      error(t.loc, "integer literal out of range");
      v = 0;
    }
    t.number = static_cast<std::int64_t>(v);
    return t;
  }

  Token string(Token& t, std::size_t start) {
    ++pos_;
    std::string value;
    while (true) {
      if (pos_ >= s_.size() || s_[pos_] == '\n') {
        error(t.loc, "unterminated string literal");
        break;
      }
      if (s_[pos_] == '"') {
        if (pos_ + 1 < s_.size() && s_[pos_ + 1] == '"') {
          value.push_back('"');
          pos_ += 2;
          continue;
        }
        ++pos_;
        break;
      }
      value.push_back(s_[pos_++]);
    }
    t.kind = Tok::String;
    t.text = std::move(value);
    finish(t, start);
    return t;
  }

  Token bit_string(Token& t, char base) {
    std::size_t start = pos_ - 1;
    Token raw = string(t, pos_);
    std::string bits;
    for (char c : raw.text) {
      if (c == '_') continue;
      char l = lower(c);
      int value = -1;
      if (std::isdigit(static_cast<unsigned char>(l))) value = l - '0';
      if (l >= 'a' && l <= 'f') value = l - 'a' + 10;
      int width = base == 'b' ? 1 : base == 'o' ? 3 : 4;
      if (value < 0 || value >= (1 << width)) {
        // Metavalues such as X"Z" expand to repeated characters.
        bits.append(static_cast<std::size_t>(width), c);
        if (std::string_view("xzuwlh-").find(l) == std::string_view::npos) {
          error(t.loc, std::string("bad digit '") + c + "' in bit string");
        }
        continue;
      }
      for (int b = width - 1; b >= 0; --b) bits.push_back(((value >> b) & 1) != 0 ? '1' : '0');
    }
    t.kind = Tok::String;
    t.text = std::move(bits);
    finish(t, start);
    return t;
  }

  std::string_view s_;
  std::uint32_t file_;
  const std::string& name_;
  std::vector<Diagnostic>& diags_;
  std::size_t pos_ = 0;
  std::uint32_t line_ = 1;
  std::size_t line_start_ = 0;
};

}  // namespace

std::vector<Token> lex(std::string_view text, std::uint32_t file, const std::string& file_name,
                       std::vector<Diagnostic>& diags) {
  return Lexer(text, file, file_name, diags).run();
}

bool is_reserved(std::string_view lower) {
  return std::find(kReserved.begin(), kReserved.end(), lower) != kReserved.end();
}

}  // namespace dclab::vhdl::detail
