#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

/// Syntax tree of the supported VHDL subset. Identifiers are stored
/// lowercased in `name` with the source spelling kept alongside.
namespace dclab::vhdl {

struct Loc {
  std::uint32_t file = 0;
  std::uint32_t line = 1;
  std::uint32_t column = 1;
  std::uint32_t length = 1;  // bytes of source text the node starts with
};

struct Expr;
using ExprPtr = std::unique_ptr<Expr>;

struct Expr {
  enum class Kind {
    Name,       // name
    Char,       // text = the character between the quotes
    String,     // text = bit string, already expanded to binary for X"..", O".."
    Integer,    // number
    Physical,   // number (or real_value) with unit in `name`
    Unary,      // name = "not", "-", "+", "abs"; args[0]
    Binary,     // name = operator; args[0], args[1]
    Apply,      // name(args...) -- call, index or slice; args may hold a Range
    Attribute,  // args[0]'name
    Others,     // (others => args[0])
    Range,      // args[0] (to|downto) args[1]; name = "to" or "downto"
    Selected,   // prefix.suffix, e.g. ieee.std_logic_1164.all; name = full dotted text
  };

  Kind kind = Kind::Name;
  Loc loc;
  std::string name;
  std::string spelling;
  std::string text;
  std::int64_t number = 0;
  double real_value = 0.0;
  bool is_real = false;
  std::vector<ExprPtr> args;
};

/// Constructs the subset recognises but does not implement. Elaboration
/// reports each one.
struct Unsupported {
  std::string what;
  Loc loc;
};

struct TypeRef {
  std::string name;  // std_logic, std_logic_vector, unsigned, ...
  Loc loc;
  ExprPtr range;     // Expr::Kind::Range, or null
};

enum class PortMode { In, Out, InOut, Buffer };

struct Identifier {
  std::string name;
  std::string spelling;
  Loc loc;
};

struct ObjectDecl {
  std::vector<Identifier> names;
  PortMode mode = PortMode::In;  // ports only
  TypeRef type;
  ExprPtr init;
  Loc loc;
};

struct Waveform {
  ExprPtr value;
  ExprPtr after;  // time expression or null
};

struct Stmt {
  enum class Kind { SignalAssign, If, Case, Loop, While, Wait, Null, Unsupported };
  enum class WaitKind { Forever, For, Until, On };

  Kind kind = Kind::Null;
  Loc loc;
  std::string label;

  ExprPtr target;   // SignalAssign
  Waveform wave;    // SignalAssign
  ExprPtr subject;  // Case selector, While condition, Wait until/for expression

  /// If: one condition per body; a trailing body without a condition is the
  /// else branch. Case: `choices[i]` lists the alternatives of `bodies[i]`
  /// (an Expr::Kind::Name "others" matches everything).
  std::vector<ExprPtr> conditions;
  std::vector<std::vector<ExprPtr>> choices;
  std::vector<std::vector<Stmt>> bodies;

  WaitKind wait = WaitKind::Forever;
  std::vector<ExprPtr> names;  // wait on

  std::string what;  // Unsupported
};

struct Association {
  Identifier formal;  // empty name for positional association
  ExprPtr actual;     // null for `open`
  Loc loc;
};

struct ConcStmt {
  enum class Kind { Assign, Conditional, Selected, Process, Instance, Unsupported };

  Kind kind = Kind::Assign;
  Loc loc;
  std::string label;

  // Assign / Conditional / Selected. A Conditional holds one waveform per
  // branch and one condition per branch except a final unconditional else.
  ExprPtr target;
  std::vector<Waveform> waves;
  std::vector<ExprPtr> conditions;
  ExprPtr selector;
  std::vector<std::vector<ExprPtr>> choices;

  // Process
  bool has_sensitivity = false;
  bool sensitivity_all = false;
  std::vector<ExprPtr> sensitivity;
  std::vector<Stmt> body;
  std::vector<Unsupported> declarations;

  // Instance
  Identifier unit;
  bool entity_instance = false;
  std::vector<Association> port_map;
  bool has_generic_map = false;

  std::string what;  // Unsupported
};

struct Entity {
  Identifier id;
  std::vector<ObjectDecl> ports;
  std::vector<Unsupported> unsupported;
  Loc loc;
};

struct Architecture {
  Identifier id;
  Identifier entity;
  std::vector<ObjectDecl> signals;
  std::vector<Unsupported> unsupported;
  std::vector<ConcStmt> statements;
  Loc loc;
};

struct Ast {
  std::vector<std::string> files;
  std::vector<Entity> entities;
  std::vector<Architecture> architectures;
  std::vector<Unsupported> unsupported;
};

}  // namespace dclab::vhdl
