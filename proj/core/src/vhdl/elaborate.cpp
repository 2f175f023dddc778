#include <algorithm>
#include <cmath>
#include <set>

#include "component_process.hpp"
#include "dclab/error.hpp"
#include "dclab/vhdl/vhdl.hpp"
#include "program.hpp"

namespace dclab::vhdl {

using detail::CExpr;
using detail::Instr;
using detail::Program;
using detail::Type;
using detail::TypeKind;
using detail::Value;
using kernel::DriverId;
using kernel::kNoNet;
using kernel::NetId;

kernel::SimDesign ElaboratedDesign::instantiate() const {
  kernel::SimDesign d;
  for (const auto& n : nets) d.add_net(n.name, n.initial);
  for (const auto& drv : drivers) d.add_driver(drv.net, drv.initial);
  for (const auto& p : processes) d.add_process(p.make(), p.sensitivity);
  d.inputs = inputs;
  d.outputs = outputs;
  d.internals = internals;
  return d;
}

namespace {

constexpr int kMaxHierarchy = 32;

struct Abort {};

struct Signal {
  std::string name;
  Type type;
  std::vector<NetId> nets;
  bool is_port = false;
  PortMode mode = PortMode::In;
  LogicVector init;
  Loc loc;
};

struct Scope {
  std::string prefix;  // "" for the top, "u1." below it
  std::map<std::string, Signal> signals;
};

struct ProcBuilder {
  Program prog;
  std::map<NetId, DriverId> drivers;
  std::vector<NetId> wait_nets;
  bool has_wait = false;
  bool sensitivity_list = false;
};

std::size_t edit_distance(std::string_view a, std::string_view b) {
  std::vector<std::size_t> row(b.size() + 1);
  for (std::size_t j = 0; j <= b.size(); ++j) row[j] = j;
  for (std::size_t i = 1; i <= a.size(); ++i) {
    std::size_t diag = row[0];
    row[0] = i;
    for (std::size_t j = 1; j <= b.size(); ++j) {
      std::size_t up = row[j];
      row[j] = std::min({row[j] + 1, row[j - 1] + 1, diag + (a[i - 1] == b[j - 1] ? 0 : 1)});
      diag = up;
    }
  }
  return row[b.size()];
}

std::string closest(std::string_view name, const std::vector<std::string>& candidates) {
  std::string best;
  std::size_t best_d = std::max<std::size_t>(2, name.size() / 3) + 1;
  for (const auto& c : candidates) {
    std::size_t d = edit_distance(name, c);
    if (d < best_d) {
      best_d = d;
      best = c;
    }
  }
  return best;
}

std::optional<LogicValue> std_logic_char(std::string_view c) {
  if (c.size() != 1) return std::nullopt;
  switch (c[0]) {
    case '0':
    case 'L':
    case 'l': return LogicValue::Zero;
    case '1':
    case 'H':
    case 'h': return LogicValue::One;
    case 'Z':
    case 'z': return LogicValue::Z;
    case 'U':
    case 'u':
    case 'X':
    case 'x':
    case 'W':
    case 'w':
    case '-': return LogicValue::X;
    default: return std::nullopt;
  }
}

std::string last_component(const std::string& dotted) {
  auto dot = dotted.rfind('.');
  return dot == std::string::npos ? dotted : dotted.substr(dot + 1);
}

CExpr literal(Type t, Value v) {
  CExpr e;
  e.op = CExpr::Op::Literal;
  e.type = t;
  e.literal = std::move(v);
  return e;
}

CExpr node(CExpr::Op op, Type t, std::vector<CExpr> args) {
  CExpr e;
  e.op = op;
  e.type = t;
  e.args = std::move(args);
  return e;
}

bool needs_context(const Expr& e) {
  return e.kind == Expr::Kind::String || e.kind == Expr::Kind::Others || e.kind == Expr::Kind::Integer;
}

std::vector<NetId> unique_sorted(std::vector<NetId> v) {
  std::sort(v.begin(), v.end());
  v.erase(std::unique(v.begin(), v.end()), v.end());
  return v;
}

class Elaborator {
 public:
  Elaborator(const Ast& ast, const ComponentRegistry& registry) : ast_(ast), registry_(registry) {
    for (const auto& e : ast.entities) entities_[e.id.name] = &e;
    for (const auto& a : ast.architectures) archs_[a.entity.name] = &a;
    for (const auto& part : registry.parts()) catalog_.emplace(entity_name(part), &registry.at(part));
  }

  ElaborationResult run(std::string_view top) {
    ElaborationResult result;
    for (const auto& u : ast_.unsupported) error(Category::Elaboration, u.loc, "unsupported construct: " + u.what);
    for (const auto& a : ast_.architectures) {
      if (!entities_.contains(a.entity.name)) {
        error(Category::Name, a.entity.loc,
              "architecture '" + a.id.spelling + "' is for '" + a.entity.spelling + "', which is not declared" +
                  hint(a.entity.name, entity_names()));
      }
    }
    std::string top_name = lower(top);
    auto it = entities_.find(top_name);
    if (it == entities_.end()) {
      diags_.push_back({Severity::Error, Category::Name, ast_.files.empty() ? "" : ast_.files[0], 1, 1,
                        "no entity named '" + std::string(top) + "'" + hint(top_name, entity_names())});
      result.diagnostics = std::move(diags_);
      return result;
    }
    ed_.top = top_name;
    const Entity& ent = *it->second;
    Scope scope;
    for (const auto& decl : ent.ports) {
      std::optional<Type> t = resolve_type(decl.type);
      LogicVector init = port_default(decl, t);
      for (const auto& id : decl.names) {
        if (!t) continue;
        Signal s = make_signal(id, *t, "", init);
        s.is_port = true;
        s.mode = decl.mode;
        for (std::size_t i = 0; i < s.nets.size(); ++i) {
          kernel::PortDecl p{ed_.nets[s.nets[i]].name, s.nets[i]};
          if (decl.mode == PortMode::In || decl.mode == PortMode::InOut) ed_.inputs.push_back(p);
          if (decl.mode != PortMode::In) ed_.outputs.push_back(p);
        }
        declare(scope, std::move(s));
      }
    }
    elaborate_body(ent, scope, 0);
    if (has_errors(diags_)) {
      result.diagnostics = std::move(diags_);
      return result;
    }
    result.design = std::move(ed_);
    result.diagnostics = std::move(diags_);
    return result;
  }

 private:
  static std::string lower(std::string_view s) {
    std::string out(s);
    for (auto& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    return out;
  }

  std::vector<std::string> entity_names() const {
    std::vector<std::string> out;
    for (const auto& [n, e] : entities_) out.push_back(n);
    return out;
  }

  static std::string hint(std::string_view name, const std::vector<std::string>& candidates) {
    std::string best = closest(name, candidates);
    return best.empty() ? "" : "; did you mean '" + best + "'?";
  }

  void error(Category c, const Loc& loc, std::string msg, Severity sev = Severity::Error) {
    std::string file = loc.file < ast_.files.size() ? ast_.files[loc.file] : "";
    Diagnostic d{sev, c, file, loc.line, loc.column, std::move(msg)};
    for (const auto& existing : diags_) {
      if (existing.file == d.file && existing.line == d.line && existing.column == d.column &&
          existing.message == d.message) {
        return;
      }
    }
    diags_.push_back(std::move(d));
  }

  [[noreturn]] void fail(Category c, const Loc& loc, std::string msg) {
    error(c, loc, std::move(msg));
    throw Abort{};
  }

  // --- declarations ----------------------------------------------------------------

  std::optional<Type> resolve_type(const TypeRef& t) {
    std::string name = last_component(t.name);
    if (name == "std_logic" || name == "std_ulogic") {
      if (t.range) error(Category::Type, t.loc, "'" + name + "' takes no range");
      return Type::logic();
    }
    if (name == "std_logic_vector" || name == "std_ulogic_vector" || name == "unsigned") {
      if (!t.range || t.range->kind != Expr::Kind::Range) {
        error(Category::Type, t.loc, "'" + name + "' needs a constant range such as (3 downto 0)");
        return std::nullopt;
      }
      auto l = static_int(*t.range->args[0]);
      auto r = static_int(*t.range->args[1]);
      if (!l || !r) {
        error(Category::Elaboration, t.range->loc, "unsupported construct: non-constant range bounds");
        return std::nullopt;
      }
      bool down = t.range->name == "downto";
      if ((down && *l < *r) || (!down && *l > *r)) {
        error(Category::Type, t.range->loc, "null range: vectors need at least one element");
        return std::nullopt;
      }
      if ((down ? *l - *r : *r - *l) >= 4096) {
        error(Category::Elaboration, t.range->loc, "unsupported construct: vectors wider than 4096 bits");
        return std::nullopt;
      }
      return Type::vector(*l, *r, down, name == "unsigned");
    }
    static const std::set<std::string, std::less<>> known = {
        "bit", "bit_vector", "boolean", "integer", "natural", "positive", "signed", "character",
        "string", "real", "time", "std_logic_signed", "severity_level"};
    if (known.contains(name)) {
      error(Category::Elaboration, t.loc,
            "unsupported construct: objects of type " + name + " (use std_logic, std_logic_vector or unsigned)");
    } else {
      error(Category::Name, t.loc,
            "unknown type '" + name + "'" + hint(name, {"std_logic", "std_logic_vector", "unsigned"}));
    }
    return std::nullopt;
  }

  /// Bits of a constant initial value (char, string or others aggregate).
  std::optional<LogicVector> static_bits(const Expr& e, const Type& t) {
    if (e.kind == Expr::Kind::Char) {
      auto v = std_logic_char(e.text);
      if (!v) {
        error(Category::Type, e.loc, "'" + e.text + "' is not a std_logic value");
        return std::nullopt;
      }
      if (t.kind != TypeKind::Logic) {
        error(Category::Type, e.loc, "a character literal cannot initialise " + t.name());
        return std::nullopt;
      }
      return LogicVector{*v};
    }
    if (e.kind == Expr::Kind::String) {
      LogicVector bits;
      for (char c : e.text) {
        auto v = std_logic_char(std::string_view(&c, 1));
        if (!v) {
          error(Category::Type, e.loc, "'" + std::string(1, c) + "' is not a std_logic value");
          return std::nullopt;
        }
        bits.push_back(*v);
      }
      if (t.kind != TypeKind::Vector || bits.size() != t.width()) {
        error(Category::Type, e.loc,
              "width mismatch: \"" + e.text + "\" has " + std::to_string(bits.size()) + " bits, " + t.name() +
                  " has " + std::to_string(t.width()));
        return std::nullopt;
      }
      return bits;
    }
    if (e.kind == Expr::Kind::Others && t.kind == TypeKind::Vector) {
      auto inner = static_bits(*e.args[0], Type::logic());
      if (!inner) return std::nullopt;
      return LogicVector(t.width(), inner->front());
    }
    error(Category::Elaboration, e.loc, "unsupported construct: initial values other than literals");
    return std::nullopt;
  }

  LogicVector port_default(const ObjectDecl& decl, const std::optional<Type>& t) {
    std::size_t w = t ? t->width() : 1;
    if (decl.init && t) {
      if (auto bits = static_bits(*decl.init, *t)) return *bits;
    }
    return LogicVector(w, LogicValue::X);
  }

  Signal make_signal(const Identifier& id, const Type& t, const std::string& prefix, const LogicVector& init) {
    Signal s;
    s.name = id.name;
    s.type = t;
    s.loc = id.loc;
    s.init = init;
    std::string base = prefix + id.name;
    for (std::size_t p = 0; p < t.width(); ++p) {
      std::string label = base;
      if (t.kind == TypeKind::Vector) {
        std::int64_t index = t.descending ? t.left - static_cast<std::int64_t>(p) : t.left + static_cast<std::int64_t>(p);
        label += "[" + std::to_string(index) + "]";
      }
      s.nets.push_back(static_cast<NetId>(ed_.nets.size()));
      ed_.nets.push_back({label, init[p]});
    }
    ed_.signal_map[base] = s.nets;
    return s;
  }

  void declare(Scope& scope, Signal s) {
    if (scope.signals.contains(s.name)) {
      error(Category::Name, s.loc, "'" + s.name + "' is already declared in this scope");
      return;
    }
    scope.signals.emplace(s.name, std::move(s));
  }

  std::vector<std::string> visible(const Scope& scope) const {
    std::vector<std::string> out;
    for (const auto& [n, s] : scope.signals) out.push_back(n);
    return out;
  }

  const Signal& lookup(const Scope& scope, const Expr& e) {
    auto it = scope.signals.find(e.name);
    if (it != scope.signals.end()) return it->second;
    std::string best = closest(e.name, visible(scope));
    std::string spelling = e.spelling.empty() ? e.name : e.spelling;
    if (!best.empty()) fail(Category::Name, e.loc, "'" + spelling + "' is not declared; did you mean '" + best + "'?");
    fail(Category::Name, e.loc,
         "'" + spelling + "' is not declared; declare it with: signal " + spelling + " : std_logic;");
  }

  // --- elaboration of an architecture ----------------------------------------------

  void elaborate_body(const Entity& ent, Scope& scope, int depth) {
    for (const auto& u : ent.unsupported) error(Category::Elaboration, u.loc, "unsupported construct: " + u.what);
    auto ait = archs_.find(ent.id.name);
    if (ait == archs_.end()) {
      error(Category::Name, ent.id.loc, "entity '" + ent.id.spelling + "' has no architecture");
      return;
    }
    const Architecture& arch = *ait->second;
    for (const auto& u : arch.unsupported) error(Category::Elaboration, u.loc, "unsupported construct: " + u.what);
    for (const auto& decl : arch.signals) {
      std::optional<Type> t = resolve_type(decl.type);
      if (!t) continue;
      LogicVector init(t->width(), LogicValue::X);
      if (decl.init) {
        if (auto bits = static_bits(*decl.init, *t)) init = *bits;
      }
      for (const auto& id : decl.names) {
        Signal s = make_signal(id, *t, scope.prefix, init);
        for (std::size_t i = 0; i < s.nets.size(); ++i) ed_.internals.push_back({ed_.nets[s.nets[i]].name, s.nets[i]});
        declare(scope, std::move(s));
      }
    }
    for (const auto& st : arch.statements) {
      try {
        concurrent(st, scope, depth);
      } catch (const Abort&) {
      }
    }
  }

  void concurrent(const ConcStmt& st, Scope& scope, int depth) {
    switch (st.kind) {
      case ConcStmt::Kind::Unsupported: fail(Category::Elaboration, st.loc, "unsupported construct: " + st.what);
      case ConcStmt::Kind::Instance: return instance(st, scope, depth);
      case ConcStmt::Kind::Process: return process(st, scope);
      default: break;
    }
    ProcBuilder pb;
    pb.prog.name = scope.prefix + (st.label.empty() ? "assignment at line " + std::to_string(st.loc.line) : st.label);
    std::vector<std::size_t> to_end;
    std::vector<NetId> reads;
    auto assign = [&](const Waveform& w) {
      compile_assign(*st.target, w, scope, pb);
      pb.prog.code.back().expr.collect_reads(reads);
    };
    if (st.kind == ConcStmt::Kind::Assign) {
      assign(st.waves[0]);
    } else if (st.kind == ConcStmt::Kind::Conditional) {
      for (std::size_t i = 0; i < st.waves.size(); ++i) {
        std::size_t jump = 0;
        bool conditional = i < st.conditions.size();
        if (conditional) {
          CExpr cond = condition(*st.conditions[i], scope);
          cond.collect_reads(reads);
          jump = emit_jump_if_false(pb, std::move(cond));
        }
        assign(st.waves[i]);
        if (conditional) {
          to_end.push_back(emit_jump(pb));
          pb.prog.code[jump].target = pb.prog.code.size();
        }
      }
    } else {
      CExpr subject = expression(*st.selector, scope, nullptr);
      subject.collect_reads(reads);
      for (std::size_t i = 0; i < st.waves.size(); ++i) {
        std::optional<CExpr> cond = choice_condition(subject, st.choices[i], scope);
        std::size_t jump = 0;
        if (cond) jump = emit_jump_if_false(pb, std::move(*cond));
        assign(st.waves[i]);
        to_end.push_back(emit_jump(pb));
        if (cond) pb.prog.code[jump].target = pb.prog.code.size();
      }
    }
    for (std::size_t j : to_end) pb.prog.code[j].target = pb.prog.code.size();
    reads = unique_sorted(std::move(reads));
    Instr wait;
    wait.op = reads.empty() ? Instr::Op::WaitForever : Instr::Op::WaitOn;
    wait.nets = reads;
    pb.prog.code.push_back(std::move(wait));
    Instr loop;
    loop.op = Instr::Op::Jump;
    loop.target = 0;
    pb.prog.code.push_back(std::move(loop));
    finish(std::move(pb), reads);
  }

  void finish(ProcBuilder pb, std::vector<NetId> sensitivity) {
    auto prog = std::make_shared<const Program>(std::move(pb.prog));
    ed_.processes.push_back({[prog] { return detail::make_process(prog); }, unique_sorted(std::move(sensitivity))});
  }

  std::size_t emit_jump_if_false(ProcBuilder& pb, CExpr cond) {
    Instr in;
    in.op = Instr::Op::JumpIfFalse;
    in.expr = std::move(cond);
    pb.prog.code.push_back(std::move(in));
    return pb.prog.code.size() - 1;
  }

  std::size_t emit_jump(ProcBuilder& pb) {
    Instr in;
    in.op = Instr::Op::Jump;
    pb.prog.code.push_back(std::move(in));
    return pb.prog.code.size() - 1;
  }

  void process(const ConcStmt& st, Scope& scope) {
    for (const auto& u : st.declarations) error(Category::Elaboration, u.loc, "unsupported construct: " + u.what);
    ProcBuilder pb;
    pb.prog.name = scope.prefix + (st.label.empty() ? "process at line " + std::to_string(st.loc.line) : st.label);
    pb.sensitivity_list = st.has_sensitivity;
    std::vector<NetId> sens;
    if (st.has_sensitivity && !st.sensitivity_all) {
      for (const auto& n : st.sensitivity) {
        try {
          CExpr e = expression(*n, scope, nullptr);
          if (e.op != CExpr::Op::Read) fail(Category::Type, n->loc, "sensitivity lists name signals only");
          sens.insert(sens.end(), e.nets.begin(), e.nets.end());
        } catch (const Abort&) {
        }
      }
    }
    statements(st.body, scope, pb);
    if (st.has_sensitivity) {
      if (st.sensitivity_all) {
        for (const auto& in : pb.prog.code) in.expr.collect_reads(sens);
      }
      sens = unique_sorted(std::move(sens));
      Instr wait;
      wait.op = Instr::Op::WaitOn;
      wait.nets = sens;
      pb.prog.code.push_back(std::move(wait));
    } else if (!pb.has_wait) {
      error(Category::Elaboration, st.loc, "process has neither a sensitivity list nor a wait statement");
      return;
    } else {
      sens = pb.wait_nets;
    }
    Instr loop;
    loop.op = Instr::Op::Jump;
    loop.target = 0;
    pb.prog.code.push_back(std::move(loop));
    finish(std::move(pb), std::move(sens));
  }

  void statements(const std::vector<Stmt>& body, Scope& scope, ProcBuilder& pb) {
    for (const auto& s : body) {
      try {
        statement(s, scope, pb);
      } catch (const Abort&) {
      }
    }
  }

  void statement(const Stmt& s, Scope& scope, ProcBuilder& pb) {
    auto& code = pb.prog.code;
    switch (s.kind) {
      case Stmt::Kind::Null: return;
      case Stmt::Kind::Unsupported: fail(Category::Elaboration, s.loc, "unsupported construct: " + s.what);
      case Stmt::Kind::SignalAssign: compile_assign(*s.target, s.wave, scope, pb); return;
      case Stmt::Kind::If: {
        std::vector<std::size_t> to_end;
        for (std::size_t i = 0; i < s.bodies.size(); ++i) {
          if (i < s.conditions.size()) {
            std::size_t jump = emit_jump_if_false(pb, condition(*s.conditions[i], scope));
            statements(s.bodies[i], scope, pb);
            to_end.push_back(emit_jump(pb));
            code[jump].target = code.size();
          } else {
            statements(s.bodies[i], scope, pb);
          }
        }
        for (std::size_t j : to_end) code[j].target = code.size();
        return;
      }
      case Stmt::Kind::Case: {
        CExpr subject = expression(*s.subject, scope, nullptr);
        std::vector<std::size_t> to_end;
        for (std::size_t i = 0; i < s.bodies.size(); ++i) {
          std::optional<CExpr> cond = choice_condition(subject, s.choices[i], scope);
          std::size_t jump = 0;
          if (cond) jump = emit_jump_if_false(pb, std::move(*cond));
          statements(s.bodies[i], scope, pb);
          to_end.push_back(emit_jump(pb));
          if (cond) code[jump].target = code.size();
        }
        for (std::size_t j : to_end) code[j].target = code.size();
        return;
      }
      case Stmt::Kind::Loop:
      case Stmt::Kind::While: {
        std::size_t start = code.size();
        std::optional<std::size_t> exit;
        if (s.kind == Stmt::Kind::While) exit = emit_jump_if_false(pb, condition(*s.subject, scope));
        statements(s.bodies[0], scope, pb);
        code[emit_jump(pb)].target = start;
        if (exit) code[*exit].target = code.size();
        return;
      }
      case Stmt::Kind::Wait: {
        if (pb.sensitivity_list) {
          fail(Category::Elaboration, s.loc, "a process with a sensitivity list cannot contain wait statements");
        }
        pb.has_wait = true;
        Instr in;
        switch (s.wait) {
          case Stmt::WaitKind::Forever: in.op = Instr::Op::WaitForever; break;
          case Stmt::WaitKind::For: {
            in.op = Instr::Op::WaitFor;
            in.time = time_value(*s.subject);
            break;
          }
          case Stmt::WaitKind::On:
            in.op = Instr::Op::WaitOn;
            for (const auto& n : s.names) {
              CExpr e = expression(*n, scope, nullptr);
              if (e.op != CExpr::Op::Read) fail(Category::Type, n->loc, "wait on names signals only");
              in.nets.insert(in.nets.end(), e.nets.begin(), e.nets.end());
            }
            break;
          case Stmt::WaitKind::Until:
            in.op = Instr::Op::WaitUntil;
            in.expr = condition(*s.subject, scope);
            in.expr.collect_reads(in.nets);
            if (in.nets.empty()) in.op = Instr::Op::WaitForever;
            break;
        }
        in.nets = unique_sorted(std::move(in.nets));
        pb.wait_nets.insert(pb.wait_nets.end(), in.nets.begin(), in.nets.end());
        code.push_back(std::move(in));
        return;
      }
    }
  }

  std::optional<CExpr> choice_condition(const CExpr& subject, const std::vector<ExprPtr>& choices, Scope& scope) {
    std::optional<CExpr> cond;
    for (const auto& c : choices) {
      if (c->kind == Expr::Kind::Name && c->name == "others") return std::nullopt;
      CExpr one;
      if (c->kind == Expr::Kind::Range) {
        if (subject.type.kind != TypeKind::Integer) {
          fail(Category::Type, c->loc, "range choices need an integer selector");
        }
        CExpr lo = expression(*c->args[0], scope, &subject.type);
        CExpr hi = expression(*c->args[1], scope, &subject.type);
        if (c->name == "downto") std::swap(lo, hi);
        one = node(CExpr::Op::And, Type::boolean(),
                   {node(CExpr::Op::Ge, Type::boolean(), {subject, std::move(lo)}),
                    node(CExpr::Op::Le, Type::boolean(), {subject, std::move(hi)})});
      } else {
        CExpr value = expression(*c, scope, &subject.type);
        one = equality(subject, std::move(value), false, c->loc, true);
      }
      cond = cond ? node(CExpr::Op::Or, Type::boolean(), {std::move(*cond), std::move(one)}) : std::move(one);
    }
    return cond;
  }

  // --- assignments ------------------------------------------------------------------------

  struct Target {
    std::vector<NetId> nets;
    Type type;
    LogicVector init;
  };

  Target target(const Expr& e, const Scope& scope) {
    if (e.kind != Expr::Kind::Name && e.kind != Expr::Kind::Apply) {
      fail(Category::Type, e.loc, "assignment target must be a signal, an element or a slice");
    }
    const Signal& s = lookup(scope, e);
    if (s.is_port && s.mode == PortMode::In) {
      fail(Category::Type, e.loc, "cannot assign to input port '" + s.name + "'");
    }
    if (e.kind == Expr::Kind::Name) return {s.nets, s.type, s.init};
    auto [first, count, type] = select(s, e);
    return {std::vector<NetId>(s.nets.begin() + first, s.nets.begin() + first + count), type,
            LogicVector(s.init.begin() + first, s.init.begin() + first + count)};
  }

  void compile_assign(const Expr& target_expr, const Waveform& w, Scope& scope, ProcBuilder& pb) {
    Target t = target(target_expr, scope);
    CExpr value = expression(*w.value, scope, &t.type);
    check_assignable(t.type, value.type, w.value->loc);
    Instr in;
    in.op = Instr::Op::Assign;
    in.time = w.after ? time_value(*w.after) : 0;
    for (std::size_t i = 0; i < t.nets.size(); ++i) {
      auto [it, fresh] = pb.drivers.try_emplace(t.nets[i], 0);
      if (fresh) {
        it->second = static_cast<DriverId>(ed_.drivers.size());
        ed_.drivers.push_back({t.nets[i], t.init[i]});
      }
      in.drivers.push_back(it->second);
    }
    in.expr = std::move(value);
    pb.prog.code.push_back(std::move(in));
  }

  void check_assignable(const Type& target, const Type& value, const Loc& loc) {
    if (target.kind != value.kind) {
      fail(Category::Type, loc, "type mismatch: cannot assign " + value.name() + " to " + target.name());
    }
    if (target.kind == TypeKind::Vector) {
      if (target.numeric != value.numeric) {
        fail(Category::Type, loc,
             "type mismatch: cannot assign " + value.name() + " to " + target.name() + " (convert with " +
                 (target.numeric ? "unsigned(...)" : "std_logic_vector(...)") + ")");
      }
      if (target.width() != value.width()) {
        fail(Category::Type, loc,
             "width mismatch: target has " + std::to_string(target.width()) + " bits, value has " +
                 std::to_string(value.width()));
      }
    }
  }

  TimeNs time_value(const Expr& e) {
    auto t = static_time(e);
    if (!t) fail(Category::Elaboration, e.loc, "unsupported construct: delays must be constant time expressions");
    if (*t < 0) fail(Category::Type, e.loc, "negative delay");
    return static_cast<TimeNs>(*t);
  }

  // --- static evaluation -------------------------------------------------------------------

  std::optional<std::int64_t> static_int(const Expr& e) {
    switch (e.kind) {
      case Expr::Kind::Integer:
        if (e.is_real) return std::nullopt;
        return e.number;
      case Expr::Kind::Unary: {
        auto v = static_int(*e.args[0]);
        if (!v) return std::nullopt;
        if (e.name == "-") return -*v;
        if (e.name == "+") return *v;
        if (e.name == "abs") return std::abs(*v);
        return std::nullopt;
      }
      case Expr::Kind::Binary: {
        auto a = static_int(*e.args[0]);
        auto b = static_int(*e.args[1]);
        if (!a || !b) return std::nullopt;
        if (e.name == "+") return *a + *b;
        if (e.name == "-") return *a - *b;
        if (e.name == "*") return *a * *b;
        if (e.name == "/" && *b != 0) return *a / *b;
        if (e.name == "mod" && *b != 0) return ((*a % *b) + *b) % *b;
        if (e.name == "rem" && *b != 0) return *a % *b;
        if (e.name == "**" && *b >= 0 && *b < 63) {
          std::int64_t r = 1;
          for (std::int64_t i = 0; i < *b; ++i) r *= *a;
          return r;
        }
        return std::nullopt;
      }
      default: return std::nullopt;
    }
  }

  /// Constant time in ns; nullopt when not static, Abort when not whole ns.
  std::optional<std::int64_t> static_time(const Expr& e) {
    switch (e.kind) {
      case Expr::Kind::Physical: {
        static const std::map<std::string, long double, std::less<>> scale = {
            {"fs", 1e-6L}, {"ps", 1e-3L}, {"ns", 1.0L}, {"us", 1e3L},
            {"ms", 1e6L},  {"sec", 1e9L}, {"min", 6e10L}, {"hr", 3.6e12L}};
        long double ns = (e.is_real ? static_cast<long double>(e.real_value) : static_cast<long double>(e.number)) *
                         scale.at(e.name);
        long double whole = std::round(ns);
        if (std::fabs(ns - whole) > 1e-6L) {
          fail(Category::Elaboration, e.loc, "unsupported construct: delays finer than 1 ns");
        }
        if (whole > 9.0e18L) fail(Category::Elaboration, e.loc, "time value out of range");
        return static_cast<std::int64_t>(whole);
      }
      case Expr::Kind::Binary: {
        if (e.name == "+" || e.name == "-") {
          auto a = static_time(*e.args[0]);
          auto b = static_time(*e.args[1]);
          if (!a || !b) return std::nullopt;
          return e.name == "+" ? *a + *b : *a - *b;
        }
        if (e.name == "*") {
          if (auto k = static_int(*e.args[0])) {
            if (auto t = static_time(*e.args[1])) return *k * *t;
          }
          if (auto k = static_int(*e.args[1])) {
            if (auto t = static_time(*e.args[0])) return *k * *t;
          }
        }
        if (e.name == "/") {
          auto t = static_time(*e.args[0]);
          auto k = static_int(*e.args[1]);
          if (t && k && *k != 0) return *t / *k;
        }
        return std::nullopt;
      }
      default: return std::nullopt;
    }
  }

  // --- expressions --------------------------------------------------------------------------

  CExpr condition(const Expr& e, const Scope& scope) {
    CExpr c = expression(e, scope, nullptr);
    if (c.type.kind == TypeKind::Logic) return node(CExpr::Op::Truth, Type::boolean(), {std::move(c)});
    if (c.type.kind != TypeKind::Boolean) fail(Category::Type, e.loc, "condition must be boolean, found " + c.type.name());
    return c;
  }

  std::pair<CExpr, CExpr> pair(const Expr& a, const Expr& b, const Scope& scope, const Type* hint) {
    if (needs_context(a) && !needs_context(b)) {
      CExpr y = expression(b, scope, hint);
      CExpr x = expression(a, scope, &y.type);
      return {std::move(x), std::move(y)};
    }
    CExpr x = expression(a, scope, hint);
    CExpr y = expression(b, scope, &x.type);
    return {std::move(x), std::move(y)};
  }

  /// (first position, count, type) of an index or slice of `s`.
  std::tuple<std::size_t, std::size_t, Type> select(const Signal& s, const Expr& e) {
    if (s.type.kind != TypeKind::Vector) fail(Category::Type, e.loc, "'" + s.name + "' is not a vector");
    if (e.args.size() != 1) fail(Category::Type, e.loc, "'" + s.name + "' takes exactly one index");
    const Expr& arg = *e.args[0];
    if (arg.kind == Expr::Kind::Range) {
      auto l = static_int(*arg.args[0]);
      auto r = static_int(*arg.args[1]);
      if (!l || !r) fail(Category::Elaboration, arg.loc, "unsupported construct: non-constant slice bounds");
      bool down = arg.name == "downto";
      if (down != s.type.descending) {
        fail(Category::Type, arg.loc, "slice direction does not match " + s.type.name());
      }
      std::int64_t pl = s.type.position(*l);
      std::int64_t pr = s.type.position(*r);
      if (pl < 0 || pr < 0 || pl > pr) {
        fail(Category::Type, arg.loc, "slice is outside " + s.type.name());
      }
      Type t = Type::vector(*l, *r, down, s.type.numeric);
      return {static_cast<std::size_t>(pl), static_cast<std::size_t>(pr - pl + 1), t};
    }
    auto i = static_int(arg);
    if (!i) fail(Category::Elaboration, arg.loc, "unsupported construct: non-constant index");
    std::int64_t p = s.type.position(*i);
    if (p < 0) fail(Category::Type, arg.loc, "index " + std::to_string(*i) + " is outside " + s.type.name());
    return {static_cast<std::size_t>(p), 1, Type::logic()};
  }

  CExpr read(const Signal& s, std::size_t first, std::size_t count, Type t) {
    CExpr e;
    e.op = CExpr::Op::Read;
    e.type = t;
    e.nets.assign(s.nets.begin() + first, s.nets.begin() + first + count);
    return e;
  }

  CExpr expression(const Expr& e, const Scope& scope, const Type* hint) {
    switch (e.kind) {
      case Expr::Kind::Name: {
        if (e.name == "true" || e.name == "false") return literal(Type::boolean(), Value{{}, e.name == "true"});
        const Signal& s = lookup(scope, e);
        return read(s, 0, s.nets.size(), s.type);
      }
      case Expr::Kind::Char: {
        auto v = std_logic_char(e.text);
        if (!v) fail(Category::Type, e.loc, "'" + e.text + "' is not a std_logic value");
        return literal(Type::logic(), Value{{*v}, 0});
      }
      case Expr::Kind::String: {
        LogicVector bits;
        for (char c : e.text) {
          auto v = std_logic_char(std::string_view(&c, 1));
          if (!v) fail(Category::Type, e.loc, "'" + std::string(1, c) + "' is not a std_logic value");
          bits.push_back(*v);
        }
        if (bits.empty()) fail(Category::Type, e.loc, "empty vector literal");
        bool numeric = hint != nullptr && hint->kind == TypeKind::Vector && hint->numeric;
        Type t = Type::bits(bits.size(), numeric);
        return literal(t, Value{std::move(bits), 0});
      }
      case Expr::Kind::Integer:
        if (e.is_real) fail(Category::Elaboration, e.loc, "unsupported construct: real literals");
        return literal(Type::integer(), Value{{}, e.number});
      case Expr::Kind::Physical: {
        auto t = static_time(e);
        return literal(Type::time(), Value{{}, t.value_or(0)});
      }
      case Expr::Kind::Others: {
        if (hint == nullptr || hint->kind != TypeKind::Vector) {
          fail(Category::Type, e.loc, "(others => ...) needs a vector context");
        }
        CExpr inner = expression(*e.args[0], scope, nullptr);
        if (inner.type.kind != TypeKind::Logic) fail(Category::Type, e.loc, "(others => ...) takes a std_logic value");
        Type t = *hint;
        if (inner.op == CExpr::Op::Literal) {
          return literal(t, Value{LogicVector(t.width(), inner.literal.bits[0]), 0});
        }
        CExpr out = inner;
        for (std::size_t i = 1; i < t.width(); ++i) {
          out = node(CExpr::Op::Concat, Type::bits(i + 1, t.numeric), {std::move(out), inner});
        }
        out.type = t;
        return out;
      }
      case Expr::Kind::Unary: return unary(e, scope, hint);
      case Expr::Kind::Binary: return binary(e, scope, hint);
      case Expr::Kind::Apply: return apply(e, scope, hint);
      case Expr::Kind::Attribute: return attribute(e, scope);
      case Expr::Kind::Range: fail(Category::Type, e.loc, "a range is not allowed here");
      case Expr::Kind::Selected:
        fail(Category::Elaboration, e.loc, "unsupported construct: selected name '" + e.spelling + "'");
    }
    fail(Category::Elaboration, e.loc, "unsupported construct");
  }

  CExpr unary(const Expr& e, const Scope& scope, const Type* hint) {
    CExpr arg = expression(*e.args[0], scope, hint);
    if (e.name == "not") {
      if (arg.type.kind == TypeKind::Integer || arg.type.kind == TypeKind::Time) {
        fail(Category::Type, e.loc, "'not' needs std_logic, a vector or boolean, found " + arg.type.name());
      }
      Type t = arg.type;
      return node(CExpr::Op::Not, t, {std::move(arg)});
    }
    if (arg.type.kind != TypeKind::Integer) {
      fail(Category::Type, e.loc, "'" + e.name + "' needs an integer operand, found " + arg.type.name());
    }
    if (e.name == "+") return arg;
    if (arg.op == CExpr::Op::Literal) {
      arg.literal.num = e.name == "-" ? -arg.literal.num : std::abs(arg.literal.num);
      return arg;
    }
    return node(e.name == "-" ? CExpr::Op::Neg : CExpr::Op::Abs, Type::integer(), {std::move(arg)});
  }

  CExpr equality(CExpr a, CExpr b, bool negate, const Loc& loc, bool exact_only = false) {
    const Type& x = a.type;
    const Type& y = b.type;
    CExpr::Op op = CExpr::Op::ExactEq;
    if (x.kind == TypeKind::Integer && y.kind == TypeKind::Integer) {
      op = CExpr::Op::NumEq;
    } else if (x.kind == TypeKind::Vector && y.kind == TypeKind::Vector) {
      if ((x.numeric || y.numeric) && !exact_only) {
        op = CExpr::Op::NumEq;
      } else if (x.width() != y.width()) {
        fail(Category::Type, loc,
             "width mismatch: comparing " + std::to_string(x.width()) + " bits with " + std::to_string(y.width()));
      }
    } else if ((x.kind == TypeKind::Vector && x.numeric && y.kind == TypeKind::Integer) ||
               (y.kind == TypeKind::Vector && y.numeric && x.kind == TypeKind::Integer)) {
      op = CExpr::Op::NumEq;
    } else if (x.kind != y.kind || x.kind == TypeKind::Time) {
      std::string extra = (x.kind == TypeKind::Vector || y.kind == TypeKind::Vector) &&
                                  (x.kind == TypeKind::Integer || y.kind == TypeKind::Integer)
                              ? " (compare unsigned(...) with an integer)"
                              : "";
      fail(Category::Type, loc, "cannot compare " + x.name() + " with " + y.name() + extra);
    }
    CExpr out = node(op, Type::boolean(), {std::move(a), std::move(b)});
    out.negate = negate;
    return out;
  }

  CExpr binary(const Expr& e, const Scope& scope, const Type* hint) {
    const std::string& op = e.name;
    static const std::map<std::string, CExpr::Op, std::less<>> logical = {
        {"and", CExpr::Op::And},   {"or", CExpr::Op::Or},   {"xor", CExpr::Op::Xor},
        {"nand", CExpr::Op::Nand}, {"nor", CExpr::Op::Nor}, {"xnor", CExpr::Op::Xnor}};
    if (auto it = logical.find(op); it != logical.end()) {
      auto [a, b] = pair(*e.args[0], *e.args[1], scope, hint);
      const Type& x = a.type;
      const Type& y = b.type;
      bool ok = x.kind == y.kind && (x.kind == TypeKind::Logic || x.kind == TypeKind::Boolean ||
                                     (x.kind == TypeKind::Vector && x.width() == y.width() && x.numeric == y.numeric));
      if (!ok) {
        fail(Category::Type, e.loc,
             "operator '" + op + "' needs operands of one type and width; found " + x.name() + " and " + y.name());
      }
      Type t = x;
      return node(it->second, t, {std::move(a), std::move(b)});
    }
    if (op == "=" || op == "/=") {
      auto [a, b] = pair(*e.args[0], *e.args[1], scope, nullptr);
      return equality(std::move(a), std::move(b), op == "/=", e.loc);
    }
    if (op == "<" || op == "<=" || op == ">" || op == ">=") {
      auto [a, b] = pair(*e.args[0], *e.args[1], scope, nullptr);
      auto numeric = [](const Type& t) {
        return t.kind == TypeKind::Integer || (t.kind == TypeKind::Vector && t.numeric);
      };
      if (!numeric(a.type) || !numeric(b.type)) {
        fail(Category::Type, e.loc,
             "operator '" + op + "' needs unsigned or integer operands; found " + a.type.name() + " and " +
                 b.type.name());
      }
      CExpr::Op code = op == "<" ? CExpr::Op::Lt : op == "<=" ? CExpr::Op::Le : op == ">" ? CExpr::Op::Gt : CExpr::Op::Ge;
      return node(code, Type::boolean(), {std::move(a), std::move(b)});
    }
    if (op == "+" || op == "-") {
      auto [a, b] = pair(*e.args[0], *e.args[1], scope, hint);
      CExpr::Op code = op == "+" ? CExpr::Op::Add : CExpr::Op::Sub;
      const Type& x = a.type;
      const Type& y = b.type;
      if (x.kind == TypeKind::Integer && y.kind == TypeKind::Integer) {
        return node(code, Type::integer(), {std::move(a), std::move(b)});
      }
      bool xu = x.kind == TypeKind::Vector && x.numeric;
      bool yu = y.kind == TypeKind::Vector && y.numeric;
      if ((xu || x.kind == TypeKind::Integer) && (yu || y.kind == TypeKind::Integer)) {
        std::size_t w = std::max(xu ? x.width() : 0, yu ? y.width() : 0);
        if (w > 62) fail(Category::Elaboration, e.loc, "unsupported construct: arithmetic wider than 62 bits");
        return node(code, Type::bits(w, true), {std::move(a), std::move(b)});
      }
      fail(Category::Type, e.loc,
           "operator '" + op + "' needs unsigned or integer operands; found " + x.name() + " and " + y.name() +
               (x.kind == TypeKind::Vector || y.kind == TypeKind::Vector ? " (convert with unsigned(...))" : ""));
    }
    if (op == "*" || op == "/" || op == "mod" || op == "rem") {
      auto [a, b] = pair(*e.args[0], *e.args[1], scope, hint);
      if (a.type.kind != TypeKind::Integer || b.type.kind != TypeKind::Integer) {
        fail(Category::Type, e.loc, "operator '" + op + "' is only supported on integers");
      }
      CExpr::Op code = op == "*" ? CExpr::Op::Mul : op == "/" ? CExpr::Op::Div : op == "mod" ? CExpr::Op::Mod : CExpr::Op::Rem;
      return node(code, Type::integer(), {std::move(a), std::move(b)});
    }
    if (op == "&") {
      const Type* inner = nullptr;
      Type element_hint;
      if (hint != nullptr && hint->kind == TypeKind::Vector) {
        element_hint = Type::bits(1, hint->numeric);
        inner = &element_hint;
      }
      CExpr a = expression(*e.args[0], scope, inner);
      CExpr b = expression(*e.args[1], scope, inner);
      if (!a.type.is_bits() || !b.type.is_bits()) {
        fail(Category::Type, e.loc, "'&' joins std_logic values and vectors; found " + a.type.name() + " and " +
                                        b.type.name());
      }
      bool numeric = (hint != nullptr && hint->kind == TypeKind::Vector) ? hint->numeric
                                                                        : (a.type.numeric || b.type.numeric);
      std::size_t w = a.type.width() + b.type.width();
      return node(CExpr::Op::Concat, Type::bits(w, numeric), {std::move(a), std::move(b)});
    }
    fail(Category::Elaboration, e.loc, "unsupported construct: operator '" + op + "'");
  }

  CExpr apply(const Expr& e, const Scope& scope, const Type* hint) {
    if (auto it = scope.signals.find(e.name); it != scope.signals.end()) {
      auto [first, count, type] = select(it->second, e);
      return read(it->second, first, count, type);
    }
    const std::string& f = e.name;
    auto arity = [&](std::size_t n) {
      if (e.args.size() != n) {
        fail(Category::Type, e.loc, "'" + f + "' takes " + std::to_string(n) + " argument" + (n == 1 ? "" : "s"));
      }
    };
    if (f == "rising_edge" || f == "falling_edge") {
      arity(1);
      CExpr arg = expression(*e.args[0], scope, nullptr);
      if (arg.op != CExpr::Op::Read || arg.type.kind != TypeKind::Logic) {
        fail(Category::Type, e.args[0]->loc, "'" + f + "' needs a std_logic signal");
      }
      CExpr out = node(f == "rising_edge" ? CExpr::Op::RisingEdge : CExpr::Op::FallingEdge, Type::boolean(), {});
      out.nets = arg.nets;
      return out;
    }
    if (f == "to_integer") {
      arity(1);
      CExpr arg = expression(*e.args[0], scope, nullptr);
      if (arg.type.kind != TypeKind::Vector || !arg.type.numeric) {
        fail(Category::Type, e.args[0]->loc, "'to_integer' needs an unsigned argument, found " + arg.type.name());
      }
      if (arg.type.width() > 62) fail(Category::Elaboration, e.loc, "unsupported construct: to_integer wider than 62 bits");
      return node(CExpr::Op::ToInteger, Type::integer(), {std::move(arg)});
    }
    if (f == "to_unsigned" || f == "resize") {
      arity(2);
      auto w = static_int(*e.args[1]);
      if (!w) fail(Category::Elaboration, e.args[1]->loc, "unsupported construct: non-constant width");
      if (*w < 1 || *w > 62) fail(Category::Type, e.args[1]->loc, "width must be between 1 and 62");
      Type t = Type::bits(static_cast<std::size_t>(*w), true);
      CExpr arg = expression(*e.args[0], scope, nullptr);
      if (f == "to_unsigned") {
        if (arg.type.kind != TypeKind::Integer) {
          fail(Category::Type, e.args[0]->loc, "'to_unsigned' needs an integer argument, found " + arg.type.name());
        }
        return node(CExpr::Op::ToUnsigned, t, {std::move(arg)});
      }
      if (arg.type.kind != TypeKind::Vector || !arg.type.numeric) {
        fail(Category::Type, e.args[0]->loc, "'resize' needs an unsigned argument, found " + arg.type.name());
      }
      return node(CExpr::Op::Resize, t, {std::move(arg)});
    }
    if (f == "unsigned" || f == "std_logic_vector" || f == "std_ulogic_vector") {
      arity(1);
      bool numeric = f == "unsigned";
      Type inner_hint = Type::bits(1, !numeric);
      CExpr arg = expression(*e.args[0], scope, &inner_hint);
      if (arg.type.kind != TypeKind::Vector) {
        fail(Category::Type, e.args[0]->loc, "'" + f + "' converts vectors, found " + arg.type.name());
      }
      Type t = arg.type;
      t.numeric = numeric;
      return node(CExpr::Op::Cast, t, {std::move(arg)});
    }
    if (f == "is_x") {
      arity(1);
      CExpr arg = expression(*e.args[0], scope, nullptr);
      if (!arg.type.is_bits()) fail(Category::Type, e.args[0]->loc, "'is_x' needs std_logic or a vector");
      return node(CExpr::Op::IsX, Type::boolean(), {std::move(arg)});
    }
    (void)hint;
    static const std::vector<std::string> builtins = {"rising_edge", "falling_edge", "to_integer", "to_unsigned",
                                                      "resize",      "unsigned",     "std_logic_vector", "is_x"};
    std::vector<std::string> candidates = visible(scope);
    candidates.insert(candidates.end(), builtins.begin(), builtins.end());
    std::string best = closest(f, candidates);
    fail(Category::Name, e.loc,
         "'" + e.spelling + "' is neither a declared signal nor a supported function" +
             (best.empty() ? "" : "; did you mean '" + best + "'?"));
  }

  CExpr attribute(const Expr& e, const Scope& scope) {
    const Expr& prefix = *e.args[0];
    if (prefix.kind != Expr::Kind::Name) fail(Category::Elaboration, e.loc, "unsupported construct: attribute prefix");
    const Signal& s = lookup(scope, prefix);
    if (e.name == "event") {
      if (s.type.kind != TypeKind::Logic) fail(Category::Type, e.loc, "'event is supported on std_logic signals only");
      CExpr out = node(CExpr::Op::Event, Type::boolean(), {});
      out.nets = s.nets;
      return out;
    }
    if (s.type.kind == TypeKind::Vector) {
      const Type& t = s.type;
      std::int64_t v = 0;
      if (e.name == "length") {
        v = static_cast<std::int64_t>(t.width());
      } else if (e.name == "left") {
        v = t.left;
      } else if (e.name == "right") {
        v = t.right;
      } else if (e.name == "high") {
        v = std::max(t.left, t.right);
      } else if (e.name == "low") {
        v = std::min(t.left, t.right);
      } else {
        fail(Category::Elaboration, e.loc, "unsupported construct: attribute '" + e.name + "'");
      }
      return literal(Type::integer(), Value{{}, v});
    }
    fail(Category::Elaboration, e.loc, "unsupported construct: attribute '" + e.name + "'");
  }

  // --- instances -------------------------------------------------------------------------------

  struct Formal {
    std::string name;
    Type type;
    PortMode mode;
    LogicVector init;
    Loc loc;
  };

  /// Resolves the port map of `st` against `formals`: per formal the actual
  /// expression, or null for open / unassociated.
  std::vector<const Expr*> associate(const ConcStmt& st, const std::vector<Formal>& formals, const std::string& unit) {
    std::vector<const Expr*> actual(formals.size(), nullptr);
    std::vector<bool> seen(formals.size(), false);
    std::size_t positional = 0;
    bool named = false;
    for (const auto& a : st.port_map) {
      std::size_t index = 0;
      if (a.formal.name.empty()) {
        if (named) fail(Category::Syntax, a.loc, "positional association after named association");
        if (positional >= formals.size()) fail(Category::Name, a.loc, "too many ports in the map of '" + unit + "'");
        index = positional++;
      } else {
        named = true;
        auto it = std::find_if(formals.begin(), formals.end(), [&](const Formal& f) { return f.name == a.formal.name; });
        if (it == formals.end()) {
          std::vector<std::string> names;
          for (const auto& f : formals) names.push_back(f.name);
          fail(Category::Name, a.formal.loc,
               "'" + unit + "' has no port '" + a.formal.spelling + "'" + hint(a.formal.name, names));
        }
        index = static_cast<std::size_t>(it - formals.begin());
      }
      if (seen[index]) fail(Category::Elaboration, a.loc, "port '" + formals[index].name + "' is associated twice");
      seen[index] = true;
      actual[index] = a.actual.get();
    }
    return actual;
  }

  /// Nets an actual denotes: a signal, element or slice, or for inputs a
  /// literal that becomes a constant net.
  std::vector<NetId> actual_nets(const Expr& actual, const Formal& f, const Scope& scope, const std::string& where) {
    if (actual.kind == Expr::Kind::Char || actual.kind == Expr::Kind::String || actual.kind == Expr::Kind::Others) {
      if (f.mode != PortMode::In) fail(Category::Type, actual.loc, "a literal can only drive an input port");
      auto bits = static_bits(actual, f.type);
      if (!bits) throw Abort{};
      std::vector<NetId> nets;
      for (std::size_t i = 0; i < bits->size(); ++i) {
        NetId n = static_cast<NetId>(ed_.nets.size());
        ed_.nets.push_back({where + "." + f.name + (bits->size() > 1 ? "[" + std::to_string(i) + "]" : ""), (*bits)[i]});
        nets.push_back(n);
      }
      return nets;
    }
    CExpr e = expression(actual, scope, &f.type);
    if (e.op != CExpr::Op::Read) {
      fail(Category::Elaboration, actual.loc, "unsupported construct: expressions in port maps (use a signal)");
    }
    if (e.type.kind != f.type.kind || e.type.width() != f.type.width() ||
        (e.type.kind == TypeKind::Vector && e.type.numeric != f.type.numeric)) {
      fail(Category::Type, actual.loc, "port '" + f.name + "' is " + f.type.name() + " but the actual is " + e.type.name());
    }
    return e.nets;
  }

  void instance(const ConcStmt& st, Scope& parent, int depth) {
    if (st.has_generic_map) fail(Category::Elaboration, st.loc, "unsupported construct: generic maps");
    const std::string& unit = st.unit.name;
    std::string where = parent.prefix + st.label;
    if (auto it = entities_.find(unit); it != entities_.end()) {
      if (depth + 1 >= kMaxHierarchy) {
        fail(Category::Elaboration, st.loc, "instantiation nested more than " + std::to_string(kMaxHierarchy) +
                                                " levels deep (recursive design?)");
      }
      const Entity& ent = *it->second;
      std::vector<Formal> formals;
      for (const auto& decl : ent.ports) {
        std::optional<Type> t = resolve_type(decl.type);
        if (!t) throw Abort{};
        LogicVector init = port_default(decl, t);
        for (const auto& id : decl.names) formals.push_back({id.name, *t, decl.mode, init, id.loc});
      }
      std::vector<const Expr*> actual = associate(st, formals, ent.id.spelling);
      Scope child;
      child.prefix = where + ".";
      for (std::size_t i = 0; i < formals.size(); ++i) {
        const Formal& f = formals[i];
        Signal s;
        s.name = f.name;
        s.type = f.type;
        s.is_port = true;
        s.mode = f.mode;
        s.init = f.init;
        s.loc = f.loc;
        if (actual[i] != nullptr) {
          s.nets = actual_nets(*actual[i], f, parent, where);
        } else {
          for (std::size_t b = 0; b < f.type.width(); ++b) {
            s.nets.push_back(static_cast<NetId>(ed_.nets.size()));
            ed_.nets.push_back({child.prefix + f.name + (f.type.kind == TypeKind::Vector ? "[" + std::to_string(b) + "]" : ""),
                                f.mode == PortMode::In ? f.init[b] : LogicValue::X});
          }
        }
        ed_.signal_map[child.prefix + f.name] = s.nets;
        declare(child, std::move(s));
      }
      elaborate_body(ent, child, depth + 1);
      return;
    }
    if (auto it = catalog_.find(unit); it != catalog_.end()) {
      const ComponentModel& m = *it->second;
      std::vector<Formal> formals;
      for (const auto& pin : m.pins) {
        formals.push_back({identifier(pin.name), Type::logic(),
                           pin.direction == PinDirection::Input ? PortMode::In : PortMode::Out,
                           LogicVector{LogicValue::X}, st.unit.loc});
      }
      std::vector<const Expr*> actual = associate(st, formals, unit);
      std::vector<NetId> pin_nets(m.pins.size(), kNoNet);
      for (std::size_t i = 0; i < formals.size(); ++i) {
        if (actual[i] == nullptr) continue;
        if (formals[i].mode == PortMode::Out && actual[i]->kind == Expr::Kind::Name) {
          const Signal& s = lookup(parent, *actual[i]);
          if (s.is_port && s.mode == PortMode::In) {
            fail(Category::Type, actual[i]->loc, "output '" + formals[i].name + "' cannot drive input port '" + s.name + "'");
          }
        }
        pin_nets[i] = actual_nets(*actual[i], formals[i], parent, where).front();
      }
      dclab::detail::ComponentLowering low = dclab::detail::lower_component(m, {}, std::move(pin_nets));
      std::vector<DriverId> ids;
      for (const auto& [net, initial] : low.drivers) {
        ids.push_back(static_cast<DriverId>(ed_.drivers.size()));
        ed_.drivers.push_back({net, initial});
      }
      if (low.make) {
        auto make = low.make;
        ed_.processes.push_back({[make, ids] { return make(ids); }, low.sensitivity});
      }
      return;
    }
    std::vector<std::string> names = entity_names();
    for (const auto& [n, m] : catalog_) names.push_back(n);
    fail(Category::Name, st.unit.loc,
         "no entity or catalog part named '" + st.unit.spelling + "'" + hint(unit, names));
  }

  const Ast& ast_;
  const ComponentRegistry& registry_;
  std::map<std::string, const Entity*> entities_;
  std::map<std::string, const Architecture*> archs_;
  std::map<std::string, const ComponentModel*> catalog_;
  ElaboratedDesign ed_;
  std::vector<Diagnostic> diags_;
};

}  // namespace

ElaborationResult elaborate(const Ast& ast, std::string_view top, const ComponentRegistry& registry) {
  return Elaborator(ast, registry).run(top);
}

std::string port_label(std::string_view name) {
  auto open = name.find('[');
  if (open != std::string_view::npos && name.back() == ']' && open > 0) {
    std::string_view index = name.substr(open + 1, name.size() - open - 2);
    if (!index.empty() && std::all_of(index.begin(), index.end(), [](char c) { return c >= '0' && c <= '9'; })) {
      return identifier(name.substr(0, open)) + "[" + std::to_string(std::stoll(std::string(index))) + "]";
    }
  }
  return identifier(name);
}

ElaboratedDesign compile_vhdl(const std::vector<VhdlUnit>& units, std::string_view top,
                              const ComponentRegistry& registry, std::vector<Diagnostic>* warnings) {
  ParseResult parsed = parse_vhdl(units);
  std::vector<Diagnostic> diags = parsed.diagnostics;
  std::optional<ElaboratedDesign> design;
  if (!has_errors(diags)) {
    ElaborationResult er = elaborate(parsed.ast, top, registry);
    diags.insert(diags.end(), er.diagnostics.begin(), er.diagnostics.end());
    design = std::move(er.design);
  }
  if (!design) {
    std::string msg = "VHDL design \"" + std::string(top) + "\" does not elaborate:";
    for (const auto& d : diags) {
      if (d.severity == Severity::Error) msg += "\n" + d.to_string();
    }
    throw ContractError(msg);
  }
  if (warnings != nullptr) {
    for (const auto& d : diags) {
      if (d.severity == Severity::Warning) warnings->push_back(d);
    }
  }
  return std::move(*design);
}

SimResult simulate_elaborated(const ElaboratedDesign& design, const StimulusSet& stim, const SimConfig& cfg) {
  if (cfg.horizon_ns < 1) throw ContractError("horizon_ns must be at least 1");
  kernel::SimDesign sim = design.instantiate();
  SimLog pre;
  StimulusSet lowered = stim;
  lowered.assignments.clear();
  for (const auto& [name, spec] : stim.assignments) lowered.assignments[port_label(name)] = spec;
  std::vector<kernel::Waveform> waves = bind_stimulus(sim, lowered, cfg.horizon_ns, pre);
  std::vector<kernel::WatchSignal> watch = watch_list(sim, cfg.watch);
  for (const auto& probe : cfg.probes) {
    const auto* name = std::get_if<std::string>(&probe.target);
    if (name == nullptr) throw ContractError("probe " + probe.id + ": VHDL designs are probed by signal name");
    std::string key = port_label(*name);
    NetId net = kNoNet;
    for (NetId n = 0; n < design.nets.size() && net == kNoNet; ++n) {
      if (design.nets[n].name == *name || design.nets[n].name == key) net = n;
    }
    if (net == kNoNet) throw ContractError("probe " + probe.id + " names no signal \"" + *name + "\"");
    watch.push_back({probe.label.empty() ? probe.id : probe.label, net});
  }
  kernel::RunOptions opt{cfg.horizon_ns, cfg.max_deltas_per_instant};
  SimResult result = kernel::run(sim, std::move(waves), watch, opt);
  pre.entries.insert(pre.entries.end(), result.log.entries.begin(), result.log.entries.end());
  result.log = std::move(pre);
  return result;
}

SimResult simulate_vhdl(const std::vector<VhdlUnit>& units, std::string_view top, const StimulusSet& stim,
                        const SimConfig& cfg, const ComponentRegistry& registry) {
  if (cfg.horizon_ns < 1) throw ContractError("horizon_ns must be at least 1");
  std::vector<Diagnostic> warnings;
  ElaboratedDesign design = compile_vhdl(units, top, registry, &warnings);
  SimResult result = simulate_elaborated(design, stim, cfg);
  SimLog log;
  for (const auto& d : warnings) log.add(LogLevel::Warning, 0, "VHDL_WARNING", d.to_string());
  log.entries.insert(log.entries.end(), result.log.entries.begin(), result.log.entries.end());
  result.log = std::move(log);
  return result;
}

std::optional<std::string> infer_top(const Ast& ast) {
  std::set<std::string> candidates;
  for (const auto& a : ast.architectures) candidates.insert(a.entity.name);
  for (const auto& a : ast.architectures) {
    for (const auto& st : a.statements) {
      if (st.kind == ConcStmt::Kind::Instance) candidates.erase(st.unit.name);
    }
  }
  std::optional<std::string> top;
  for (const auto& e : ast.entities) {
    if (!candidates.contains(e.id.name)) continue;
    if (top && *top != e.id.name) return std::nullopt;
    top = e.id.name;
  }
  return top;
}

}  // namespace dclab::vhdl
