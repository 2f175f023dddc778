#include <algorithm>
#include <array>

#include "dclab/vhdl/vhdl.hpp"
#include "lexer.hpp"

namespace dclab::vhdl {

using detail::Tok;
using detail::Token;

namespace {

struct ParseError {};

constexpr int kMaxDepth = 200;

bool is_time_unit(std::string_view s) {
  static constexpr std::array kUnits = {"fs", "ps", "ns", "us", "ms", "sec", "min", "hr"};
  return std::find(kUnits.begin(), kUnits.end(), s) != kUnits.end();
}

bool is_logical(std::string_view s) {
  return s == "and" || s == "or" || s == "xor" || s == "nand" || s == "nor" || s == "xnor";
}

bool is_relational(std::string_view s) {
  return s == "=" || s == "/=" || s == "<" || s == "<=" || s == ">" || s == ">=" || s == "?=";
}

class Parser {
 public:
  Parser(const std::vector<Token>& tokens, const std::string& file, Ast& ast, std::vector<Diagnostic>& diags)
      : t_(tokens), file_(file), ast_(ast), diags_(diags) {}

  void run() {
    while (!at_end()) {
      try {
        design_unit();
      } catch (const ParseError&) {
        skip_to_unit();
      }
    }
  }

 private:
  // --- token helpers --------------------------------------------------------

  const Token& peek(std::size_t k = 0) const {
    std::size_t i = std::min(p_ + k, t_.size() - 1);
    return t_[i];
  }
  bool at_end() const { return peek().kind == Tok::End; }
  bool is_kw(const Token& t, std::string_view kw) const { return t.kind == Tok::Ident && t.text == kw; }
  bool at_kw(std::string_view kw, std::size_t k = 0) const { return is_kw(peek(k), kw); }
  bool at_sym(std::string_view s, std::size_t k = 0) const {
    return peek(k).kind == Tok::Symbol && peek(k).text == s;
  }
  const Token& advance() {
    const Token& t = peek();
    if (!at_end()) ++p_;
    return t;
  }
  bool accept_kw(std::string_view kw) {
    if (!at_kw(kw)) return false;
    advance();
    return true;
  }
  bool accept_sym(std::string_view s) {
    if (!at_sym(s)) return false;
    advance();
    return true;
  }

  static std::string describe(const Token& t) {
    switch (t.kind) {
      case Tok::End: return "end of file";
      case Tok::Char: return "'" + t.text + "'";
      case Tok::String: return "string \"" + t.text + "\"";
      case Tok::Ident: return "'" + t.spelling + "'";
      case Tok::Tick: return "'''";
      default: return "'" + t.text + "'";
    }
  }

  [[noreturn]] void fail(const Token& at, std::string msg) {
    diags_.push_back({Severity::Error, Category::Syntax, file_, at.loc.line, at.loc.column, std::move(msg)});
    throw ParseError{};
  }
  [[noreturn]] void fail_expected(std::string_view what) {
    fail(peek(), "expected " + std::string(what) + ", found " + describe(peek()));
  }

  void expect_kw(std::string_view kw) {
    if (!accept_kw(kw)) fail_expected("'" + std::string(kw) + "'");
  }
  void expect_sym(std::string_view s) {
    if (!accept_sym(s)) fail_expected("'" + std::string(s) + "'");
  }
  Identifier expect_ident(std::string_view what = "an identifier") {
    const Token& t = peek();
    if (t.kind != Tok::Ident || detail::is_reserved(t.text)) fail_expected(what);
    advance();
    return {t.text, t.spelling, t.loc};
  }

  bool at_unit_start() const {
    if (p_ > 0 && is_kw(t_[p_ - 1], "end")) return false;
    if (at_kw("library") || at_kw("use") || at_kw("package") || at_kw("configuration")) return true;
    if (at_kw("entity")) return peek(1).kind == Tok::Ident && at_kw("is", 2);
    if (at_kw("architecture")) return peek(1).kind == Tok::Ident && at_kw("of", 2);
    if (at_kw("context")) return peek(1).kind == Tok::Ident && at_kw("is", 2);
    return false;
  }

  void skip_to_unit() {
    advance();
    while (!at_end() && !at_unit_start()) advance();
  }

  // Skips past the next ';' at parenthesis depth 0.
  void skip_statement() {
    int depth = 0;
    while (!at_end()) {
      const Token& t = advance();
      if (t.kind != Tok::Symbol) continue;
      if (t.text == "(") ++depth;
      if (t.text == ")" && depth > 0) --depth;
      if (t.text == ";" && depth == 0) return;
    }
  }

  // Skips up to and including "end <closer> ... ;", honouring nesting.
  void skip_block(std::string_view opener, std::string_view closer) {
    int depth = 1;
    while (!at_end()) {
      if (at_kw("end") && at_kw(closer, 1)) {
        advance();
        advance();
        if (--depth == 0) {
          skip_statement();
          return;
        }
        continue;
      }
      if (at_kw(opener) && !(p_ > 0 && is_kw(t_[p_ - 1], "end"))) ++depth;
      advance();
    }
  }

  struct DepthGuard {
    Parser& p;
    explicit DepthGuard(Parser& parser) : p(parser) {
      if (++p.depth_ > kMaxDepth) p.fail(p.peek(), "construct nested too deeply");
    }
    ~DepthGuard() { --p.depth_; }
  };

  // --- design units -------------------------------------------------------------

  void design_unit() {
    if (accept_kw("library")) {
      expect_ident("a library name");
      while (accept_sym(",")) expect_ident("a library name");
      expect_sym(";");
      return;
    }
    if (accept_kw("use")) {
      selected_name();
      while (accept_sym(",")) selected_name();
      expect_sym(";");
      return;
    }
    if (at_kw("entity")) return entity();
    if (at_kw("architecture")) return architecture();
    if (at_kw("package") || at_kw("configuration") || at_kw("context")) {
      const Token& t = advance();
      ast_.unsupported.push_back({t.text + " declarations", t.loc});
      while (!at_end() && !at_unit_start()) advance();
      return;
    }
    fail_expected("a design unit (library, use, entity or architecture)");
  }

  void selected_name() {
    expect_ident("a name");
    while (accept_sym(".")) {
      if (!accept_kw("all")) expect_ident("a name");
    }
  }

  void check_end_name(const Identifier& id) {
    if (peek().kind == Tok::Ident && !detail::is_reserved(peek().text)) {
      const Token& t = advance();
      if (t.text != id.name) fail(t, "end label '" + t.spelling + "' does not match '" + id.spelling + "'");
    }
  }

  void entity() {
    Entity e;
    e.loc = advance().loc;
    e.id = expect_ident("an entity name");
    expect_kw("is");
    if (at_kw("generic")) {
      e.unsupported.push_back({"generics", peek().loc});
      advance();
      skip_statement();
    }
    if (accept_kw("port")) {
      expect_sym("(");
      while (true) {
        e.ports.push_back(interface_decl(true));
        if (accept_sym(";")) continue;
        expect_sym(")");
        break;
      }
      expect_sym(";");
    }
    if (at_kw("begin")) {
      e.unsupported.push_back({"entity statements", peek().loc});
      while (!at_end() && !at_kw("end")) advance();
    }
    expect_kw("end");
    accept_kw("entity");
    check_end_name(e.id);
    expect_sym(";");
    ast_.entities.push_back(std::move(e));
  }

  ObjectDecl interface_decl(bool port) {
    ObjectDecl d;
    d.loc = peek().loc;
    accept_kw("signal");
    d.names.push_back(expect_ident("a port name"));
    while (accept_sym(",")) d.names.push_back(expect_ident("a port name"));
    expect_sym(":");
    if (port) {
      if (accept_kw("in")) {
        d.mode = PortMode::In;
      } else if (accept_kw("out")) {
        d.mode = PortMode::Out;
      } else if (accept_kw("inout")) {
        d.mode = PortMode::InOut;
      } else if (accept_kw("buffer")) {
        d.mode = PortMode::Buffer;
      }
    }
    d.type = type_ref();
    if (accept_sym(":=")) d.init = expression();
    return d;
  }

  TypeRef type_ref() {
    TypeRef t;
    Identifier id = expect_ident("a type name");
    t.name = id.name;
    t.loc = id.loc;
    while (accept_sym(".")) t.name += "." + expect_ident("a type name").name;
    if (accept_sym("(")) {
      t.range = range_expr();
      expect_sym(")");
    } else if (accept_kw("range")) {
      t.range = range_expr();
    }
    return t;
  }

  ExprPtr range_expr() {
    ExprPtr left = expression();
    if (at_kw("to") || at_kw("downto")) {
      auto r = std::make_unique<Expr>();
      r->kind = Expr::Kind::Range;
      r->loc = left->loc;
      r->name = advance().text;
      r->args.push_back(std::move(left));
      r->args.push_back(expression());
      return r;
    }
    return left;
  }

  void architecture() {
    Architecture a;
    a.loc = advance().loc;
    a.id = expect_ident("an architecture name");
    expect_kw("of");
    a.entity = expect_ident("an entity name");
    expect_kw("is");
    while (!at_end() && !at_kw("begin")) {
      try {
        block_declaration(a);
      } catch (const ParseError&) {
        skip_statement();
      }
    }
    expect_kw("begin");
    while (!at_end() && !at_kw("end")) {
      try {
        a.statements.push_back(concurrent_statement());
      } catch (const ParseError&) {
        skip_statement();
      }
    }
    expect_kw("end");
    accept_kw("architecture");
    check_end_name(a.id);
    expect_sym(";");
    ast_.architectures.push_back(std::move(a));
  }

  void block_declaration(Architecture& a) {
    if (at_kw("signal")) {
      ObjectDecl d;
      d.loc = advance().loc;
      d.names.push_back(expect_ident("a signal name"));
      while (accept_sym(",")) d.names.push_back(expect_ident("a signal name"));
      expect_sym(":");
      d.type = type_ref();
      if (accept_sym(":=")) d.init = expression();
      expect_sym(";");
      a.signals.push_back(std::move(d));
      return;
    }
    if (accept_kw("component")) {
      Identifier id = expect_ident("a component name");
      accept_kw("is");
      if (at_kw("generic")) {
        a.unsupported.push_back({"generics", peek().loc});
        advance();
        skip_statement();
      }
      if (accept_kw("port")) {
        expect_sym("(");
        int depth = 1;
        while (!at_end() && depth > 0) {
          if (at_sym("(")) ++depth;
          if (at_sym(")")) --depth;
          advance();
        }
        expect_sym(";");
      }
      expect_kw("end");
      expect_kw("component");
      check_end_name(id);
      expect_sym(";");
      return;
    }
    const Token& t = peek();
    if (at_kw("function") || at_kw("procedure") || at_kw("pure") || at_kw("impure")) {
      a.unsupported.push_back({"subprograms", t.loc});
      skip_subprogram();
      return;
    }
    if (at_kw("constant") || at_kw("type") || at_kw("subtype") || at_kw("shared") || at_kw("variable") ||
        at_kw("attribute") || at_kw("alias") || at_kw("file") || at_kw("use")) {
      std::string what = t.text == "shared" ? "variables" : t.text + " declarations";
      if (t.text == "use") {
        advance();
        skip_statement();
        return;
      }
      a.unsupported.push_back({what, t.loc});
      skip_declaration();
      return;
    }
    fail_expected("a declaration or 'begin'");
  }

  void skip_declaration() {
    int depth = 0;
    while (!at_end()) {
      if (at_kw("record") || at_kw("protected")) {
        std::string closer = peek().text;
        advance();
        skip_block(closer, closer);
        return;
      }
      const Token& t = advance();
      if (t.kind != Tok::Symbol) continue;
      if (t.text == "(") ++depth;
      if (t.text == ")" && depth > 0) --depth;
      if (t.text == ";" && depth == 0) return;
    }
  }

  void skip_subprogram() {
    int depth = 0;
    while (!at_end()) {
      if (depth == 0 && at_sym(";")) {
        advance();
        return;
      }
      if (depth == 0 && at_kw("is")) break;
      if (at_sym("(")) ++depth;
      if (at_sym(")") && depth > 0) --depth;
      advance();
    }
    while (!at_end() && !at_kw("begin")) advance();
    while (!at_end()) {
      if (at_kw("end")) {
        const Token& next = peek(1);
        bool closes = (next.kind == Tok::Symbol && next.text == ";") || is_kw(next, "function") ||
                      is_kw(next, "procedure") || (next.kind == Tok::Ident && !detail::is_reserved(next.text));
        if (closes) {
          skip_statement();
          return;
        }
      }
      advance();
    }
  }

  // --- concurrent statements ------------------------------------------------------

  ConcStmt concurrent_statement() {
    DepthGuard guard(*this);
    ConcStmt s;
    s.loc = peek().loc;
    if (peek().kind == Tok::Ident && !detail::is_reserved(peek().text) && at_sym(":", 1)) {
      s.label = advance().text;
      advance();
    }
    if (accept_kw("postponed")) {
      if (!at_kw("process")) fail_expected("'process'");
    }
    if (at_kw("process")) return process(std::move(s));
    if (at_kw("entity") || at_kw("component") || at_kw("configuration")) return instance(std::move(s));
    if (!s.label.empty() && peek().kind == Tok::Ident && !detail::is_reserved(peek().text) &&
        (at_kw("port", 1) || at_kw("generic", 1))) {
      return instance(std::move(s));
    }
    if (at_kw("with")) return selected_assignment(std::move(s));
    if (at_kw("for") || at_kw("if") || at_kw("case")) {
      if (!s.label.empty()) {
        // Generate statement: skip through "end generate;".
        s.kind = ConcStmt::Kind::Unsupported;
        s.what = "generate statements";
        while (!at_end() && !at_kw("generate")) advance();
        advance();
        skip_block("generate", "generate");
        return s;
      }
    }
    if (at_kw("block")) {
      s.kind = ConcStmt::Kind::Unsupported;
      s.what = "block statements";
      advance();
      skip_block("block", "block");
      return s;
    }
    if (at_kw("assert") || at_kw("report")) {
      s.kind = ConcStmt::Kind::Unsupported;
      s.what = "concurrent assertions";
      skip_statement();
      return s;
    }
    if (peek().kind != Tok::Ident || detail::is_reserved(peek().text)) fail_expected("a concurrent statement");
    s.target = name();
    if (at_sym("(") || peek().kind == Tok::Ident) {
      // Procedure-style call or something else we do not know.
      fail_expected("'<='");
    }
    if (!at_sym("<=")) {
      if (at_sym(":=")) fail(peek(), "variable assignment is not allowed in a concurrent statement");
      fail_expected("'<='");
    }
    advance();
    accept_kw("guarded");
    accept_kw("transport");
    accept_kw("inertial");
    s.waves.push_back(waveform());
    if (at_kw("when")) {
      s.kind = ConcStmt::Kind::Conditional;
      while (accept_kw("when")) {
        s.conditions.push_back(expression());
        if (!accept_kw("else")) break;
        s.waves.push_back(waveform());
      }
    } else {
      s.kind = ConcStmt::Kind::Assign;
    }
    expect_sym(";");
    return s;
  }

  Waveform waveform() {
    Waveform w;
    if (at_kw("unaffected")) fail(peek(), "'unaffected' is not supported");
    w.value = expression();
    if (accept_kw("after")) w.after = expression();
    if (at_sym(",")) fail(peek(), "multi-element waveforms are not supported; use one value per assignment");
    return w;
  }

  ConcStmt selected_assignment(ConcStmt s) {
    s.kind = ConcStmt::Kind::Selected;
    advance();
    s.selector = expression();
    expect_kw("select");
    s.target = name();
    expect_sym("<=");
    accept_kw("transport");
    accept_kw("inertial");
    while (true) {
      Waveform w;
      w.value = expression();
      if (accept_kw("after")) w.after = expression();
      s.waves.push_back(std::move(w));
      expect_kw("when");
      s.choices.push_back(choices());
      if (accept_sym(",")) continue;
      break;
    }
    expect_sym(";");
    return s;
  }

  std::vector<ExprPtr> choices() {
    std::vector<ExprPtr> out;
    do {
      if (at_kw("others")) {
        auto e = std::make_unique<Expr>();
        e->kind = Expr::Kind::Name;
        e->loc = peek().loc;
        e->name = "others";
        e->spelling = advance().spelling;
        out.push_back(std::move(e));
      } else {
        out.push_back(range_expr());
      }
    } while (accept_sym("|"));
    return out;
  }

  ConcStmt process(ConcStmt s) {
    s.kind = ConcStmt::Kind::Process;
    advance();
    if (accept_sym("(")) {
      s.has_sensitivity = true;
      if (accept_kw("all")) {
        s.sensitivity_all = true;
      } else {
        s.sensitivity.push_back(name());
        while (accept_sym(",")) s.sensitivity.push_back(name());
      }
      expect_sym(")");
    }
    accept_kw("is");
    while (!at_end() && !at_kw("begin")) {
      const Token& t = peek();
      if (at_kw("variable") || at_kw("constant") || at_kw("type") || at_kw("subtype") || at_kw("alias") ||
          at_kw("attribute") || at_kw("file")) {
        s.declarations.push_back({t.text == "variable" ? "variables" : t.text + " declarations", t.loc});
        skip_declaration();
      } else if (at_kw("function") || at_kw("procedure") || at_kw("pure") || at_kw("impure")) {
        s.declarations.push_back({"subprograms", t.loc});
        skip_subprogram();
      } else {
        fail_expected("a process declaration or 'begin'");
      }
    }
    expect_kw("begin");
    s.body = statements();
    expect_kw("end");
    accept_kw("postponed");
    expect_kw("process");
    if (peek().kind == Tok::Ident && !detail::is_reserved(peek().text)) {
      const Token& t = advance();
      if (t.text != s.label) fail(t, "end label '" + t.spelling + "' does not match the process label");
    }
    expect_sym(";");
    return s;
  }

  ConcStmt instance(ConcStmt s) {
    s.kind = ConcStmt::Kind::Instance;
    if (s.label.empty()) fail(peek(), "an instantiation needs a label");
    if (at_kw("configuration")) fail(peek(), "configuration instantiation is not supported");
    if (accept_kw("entity")) {
      s.entity_instance = true;
      Identifier lib = expect_ident("a library or entity name");
      if (accept_sym(".")) {
        s.unit = expect_ident("an entity name");
      } else {
        s.unit = lib;
      }
      if (accept_sym("(")) {
        expect_ident("an architecture name");
        expect_sym(")");
      }
    } else {
      accept_kw("component");
      s.unit = expect_ident("a component name");
    }
    if (at_kw("generic")) {
      s.has_generic_map = true;
      advance();
      expect_kw("map");
      expect_sym("(");
      int depth = 1;
      while (!at_end() && depth > 0) {
        if (at_sym("(")) ++depth;
        if (at_sym(")")) --depth;
        advance();
      }
    }
    if (accept_kw("port")) {
      expect_kw("map");
      expect_sym("(");
      while (true) {
        Association a;
        a.loc = peek().loc;
        if (peek().kind == Tok::Ident && !detail::is_reserved(peek().text) && at_sym("=>", 1)) {
          a.formal = expect_ident();
          advance();
        } else if (peek().kind == Tok::Ident && at_sym("(", 1)) {
          // Element association such as q(0) => x: look for the arrow.
          std::size_t save = p_;
          int depth = 0;
          std::size_t k = p_ + 1;
          for (; k < t_.size(); ++k) {
            if (t_[k].kind != Tok::Symbol) continue;
            if (t_[k].text == "(") ++depth;
            if (t_[k].text == ")" && --depth == 0) break;
          }
          if (k + 1 < t_.size() && t_[k + 1].kind == Tok::Symbol && t_[k + 1].text == "=>") {
            fail(t_[save], "partial port association is not supported; map the whole port");
          }
        }
        if (!accept_kw("open")) a.actual = expression();
        s.port_map.push_back(std::move(a));
        if (accept_sym(",")) continue;
        expect_sym(")");
        break;
      }
    }
    expect_sym(";");
    return s;
  }

  // --- sequential statements ------------------------------------------------------

  std::vector<Stmt> statements() {
    std::vector<Stmt> out;
    while (!at_end() && !at_kw("end") && !at_kw("elsif") && !at_kw("else") && !at_kw("when")) {
      try {
        out.push_back(statement());
      } catch (const ParseError&) {
        skip_statement();
      }
    }
    return out;
  }

  void end_of(std::string_view kw, const std::string& label) {
    expect_kw("end");
    expect_kw(kw);
    if (peek().kind == Tok::Ident && !detail::is_reserved(peek().text)) {
      const Token& t = advance();
      if (t.text != label) fail(t, "end label '" + t.spelling + "' does not match");
    }
    expect_sym(";");
  }

  Stmt statement() {
    DepthGuard guard(*this);
    Stmt s;
    s.loc = peek().loc;
    if (peek().kind == Tok::Ident && !detail::is_reserved(peek().text) && at_sym(":", 1)) {
      s.label = advance().text;
      advance();
    }
    if (accept_kw("if")) {
      s.kind = Stmt::Kind::If;
      s.conditions.push_back(expression());
      expect_kw("then");
      s.bodies.push_back(statements());
      while (accept_kw("elsif")) {
        s.conditions.push_back(expression());
        expect_kw("then");
        s.bodies.push_back(statements());
      }
      if (accept_kw("else")) s.bodies.push_back(statements());
      end_of("if", s.label);
      return s;
    }
    if (accept_kw("case")) {
      s.kind = Stmt::Kind::Case;
      s.subject = expression();
      expect_kw("is");
      while (accept_kw("when")) {
        s.choices.push_back(choices());
        expect_sym("=>");
        s.bodies.push_back(statements());
      }
      end_of("case", s.label);
      return s;
    }
    if (at_kw("while") || at_kw("loop")) {
      s.kind = Stmt::Kind::Loop;
      if (accept_kw("while")) {
        s.kind = Stmt::Kind::While;
        s.subject = expression();
      }
      expect_kw("loop");
      s.bodies.push_back(statements());
      end_of("loop", s.label);
      return s;
    }
    if (at_kw("for")) {
      s.kind = Stmt::Kind::Unsupported;
      s.what = "for loops";
      advance();
      skip_block("loop", "loop");
      return s;
    }
    if (accept_kw("wait")) {
      s.kind = Stmt::Kind::Wait;
      if (accept_kw("on")) {
        s.wait = Stmt::WaitKind::On;
        s.names.push_back(name());
        while (accept_sym(",")) s.names.push_back(name());
      } else if (accept_kw("until")) {
        s.wait = Stmt::WaitKind::Until;
        s.subject = expression();
      } else if (accept_kw("for")) {
        s.wait = Stmt::WaitKind::For;
        s.subject = expression();
      }
      if (at_kw("until") || at_kw("for") || at_kw("on")) {
        fail(peek(), "combined wait clauses are not supported");
      }
      expect_sym(";");
      return s;
    }
    if (accept_kw("null")) {
      s.kind = Stmt::Kind::Null;
      expect_sym(";");
      return s;
    }
    if (at_kw("exit") || at_kw("next") || at_kw("return") || at_kw("report") || at_kw("assert")) {
      s.kind = Stmt::Kind::Unsupported;
      s.what = "'" + peek().text + "' statements";
      skip_statement();
      return s;
    }
    if (peek().kind != Tok::Ident || detail::is_reserved(peek().text)) fail_expected("a statement");
    s.target = name();
    if (at_sym(":=")) {
      s.kind = Stmt::Kind::Unsupported;
      s.what = "variable assignments";
      skip_statement();
      return s;
    }
    if (at_sym(";")) {
      s.kind = Stmt::Kind::Unsupported;
      s.what = "procedure calls";
      advance();
      return s;
    }
    expect_sym("<=");
    accept_kw("transport");
    accept_kw("inertial");
    s.kind = Stmt::Kind::SignalAssign;
    s.wave = waveform();
    if (at_kw("when")) fail(peek(), "conditional signal assignment inside a process needs VHDL-2008; use if");
    expect_sym(";");
    return s;
  }

  // --- expressions ------------------------------------------------------------------

  ExprPtr binary(std::string op, ExprPtr a, ExprPtr b) {
    auto e = std::make_unique<Expr>();
    e->kind = Expr::Kind::Binary;
    e->loc = a->loc;
    e->name = std::move(op);
    e->args.push_back(std::move(a));
    e->args.push_back(std::move(b));
    return e;
  }

  ExprPtr expression() {
    DepthGuard guard(*this);
    ExprPtr left = relation();
    std::string first;
    while (peek().kind == Tok::Ident && is_logical(peek().text)) {
      const Token& op = advance();
      if (!first.empty() && (op.text != first || first == "nand" || first == "nor")) {
        fail(op, "mixing '" + first + "' and '" + op.text + "' needs parentheses");
      }
      first = op.text;
      left = binary(op.text, std::move(left), relation());
    }
    return left;
  }

  ExprPtr relation() {
    ExprPtr left = simple();
    if ((peek().kind == Tok::Symbol && is_relational(peek().text))) {
      std::string op = advance().text;
      left = binary(op, std::move(left), simple());
    }
    return left;
  }

  ExprPtr simple() {
    ExprPtr left;
    if (at_sym("+") || at_sym("-")) {
      const Token& op = advance();
      auto e = std::make_unique<Expr>();
      e->kind = Expr::Kind::Unary;
      e->loc = op.loc;
      e->name = op.text;
      e->args.push_back(term());
      left = std::move(e);
    } else {
      left = term();
    }
    while (at_sym("+") || at_sym("-") || at_sym("&")) {
      std::string op = advance().text;
      left = binary(op, std::move(left), term());
    }
    return left;
  }

  ExprPtr term() {
    ExprPtr left = factor();
    while (at_sym("*") || at_sym("/") || at_kw("mod") || at_kw("rem")) {
      std::string op = advance().text;
      left = binary(op, std::move(left), factor());
    }
    return left;
  }

  ExprPtr factor() {
    DepthGuard guard(*this);
    if (at_kw("not") || at_kw("abs")) {
      const Token& op = advance();
      auto e = std::make_unique<Expr>();
      e->kind = Expr::Kind::Unary;
      e->loc = op.loc;
      e->name = op.text;
      e->args.push_back(factor());
      return e;
    }
    ExprPtr base = primary();
    if (accept_sym("**")) return binary("**", std::move(base), primary());
    return base;
  }

  ExprPtr primary() {
    DepthGuard guard(*this);
    const Token& t = peek();
    auto e = std::make_unique<Expr>();
    e->loc = t.loc;
    switch (t.kind) {
      case Tok::Integer:
      case Tok::Real: {
        advance();
        e->kind = Expr::Kind::Integer;
        e->number = t.number;
        e->is_real = t.kind == Tok::Real;
        e->real_value = t.kind == Tok::Real ? t.real : static_cast<double>(t.number);
        if (peek().kind == Tok::Ident && is_time_unit(peek().text)) {
          e->kind = Expr::Kind::Physical;
          e->name = advance().text;
        } else if (e->is_real) {
          e->kind = Expr::Kind::Integer;  // reals only make sense in physical literals
        }
        return e;
      }
      case Tok::Char:
        advance();
        e->kind = Expr::Kind::Char;
        e->text = t.text;
        return e;
      case Tok::String:
        advance();
        e->kind = Expr::Kind::String;
        e->text = t.text;
        return e;
      case Tok::Symbol:
        if (t.text == "(") {
          advance();
          if (accept_kw("others")) {
            expect_sym("=>");
            e->kind = Expr::Kind::Others;
            e->args.push_back(expression());
            expect_sym(")");
            return e;
          }
          ExprPtr inner = expression();
          if (at_sym(",") || at_sym("=>")) fail(peek(), "aggregates other than (others => ...) are not supported");
          expect_sym(")");
          return inner;
        }
        break;
      case Tok::Ident:
        if (!detail::is_reserved(t.text)) return name();
        break;
      default: break;
    }
    fail_expected("an expression");
  }

  ExprPtr name() {
    const Token& t = peek();
    if (t.kind != Tok::Ident || detail::is_reserved(t.text)) fail_expected("a name");
    advance();
    auto e = std::make_unique<Expr>();
    e->kind = Expr::Kind::Name;
    e->loc = t.loc;
    e->name = t.text;
    e->spelling = t.spelling;
    while (true) {
      if (at_sym(".") ) {
        advance();
        Identifier part = at_kw("all") ? Identifier{advance().text, "all", {}} : expect_ident("a name");
        e->kind = Expr::Kind::Selected;
        e->name += "." + part.name;
        e->spelling += "." + part.spelling;
        continue;
      }
      if (at_sym("(")) {
        advance();
        auto call = std::make_unique<Expr>();
        call->kind = Expr::Kind::Apply;
        call->loc = e->loc;
        call->name = e->name;
        call->spelling = e->spelling;
        if (e->kind != Expr::Kind::Name) fail(peek(), "only simple names can be indexed or called");
        do {
          if (peek().kind == Tok::Ident && at_sym("=>", 1)) fail(peek(), "named arguments are not supported");
          call->args.push_back(range_expr());
        } while (accept_sym(","));
        expect_sym(")");
        e = std::move(call);
        continue;
      }
      if (peek().kind == Tok::Tick) {
        advance();
        if (at_sym("(")) fail(peek(), "qualified expressions are not supported");
        const Token& attr = peek();
        if (attr.kind != Tok::Ident) fail_expected("an attribute name");
        advance();
        auto a = std::make_unique<Expr>();
        a->kind = Expr::Kind::Attribute;
        a->loc = e->loc;
        a->name = attr.text;
        a->args.push_back(std::move(e));
        e = std::move(a);
        continue;
      }
      return e;
    }
  }

  const std::vector<Token>& t_;
  const std::string& file_;
  Ast& ast_;
  std::vector<Diagnostic>& diags_;
  std::size_t p_ = 0;
  int depth_ = 0;
};

}  // namespace

std::string_view to_string(Severity s) noexcept { return s == Severity::Error ? "error" : "warning"; }

std::string_view to_string(Category c) noexcept {
  switch (c) {
    case Category::Lex: return "LEX";
    case Category::Syntax: return "SYNTAX";
    case Category::Name: return "NAME";
    case Category::Type: return "TYPE";
    case Category::Elaboration: return "ELABORATION";
  }
  return "SYNTAX";
}

std::string Diagnostic::to_string() const {
  return file + ":" + std::to_string(line) + ":" + std::to_string(column) + ": " +
         std::string(vhdl::to_string(severity)) + "[" + std::string(vhdl::to_string(category)) + "]: " + message;
}

bool has_errors(const std::vector<Diagnostic>& diags) {
  return std::any_of(diags.begin(), diags.end(), [](const Diagnostic& d) { return d.severity == Severity::Error; });
}

ParseResult parse_vhdl(const std::vector<VhdlUnit>& units) {
  ParseResult result;
  for (std::uint32_t f = 0; f < units.size(); ++f) {
    result.ast.files.push_back(units[f].source_name);
    std::vector<Token> tokens = detail::lex(units[f].text, f, units[f].source_name, result.diagnostics);
    Parser(tokens, units[f].source_name, result.ast, result.diagnostics).run();
  }
  return result;
}

}  // namespace dclab::vhdl
