#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "dclab/kernel.hpp"
#include "dclab/logic.hpp"

// Executable form of elaborated VHDL: typed expression trees and a flat
// instruction list per process, interpreted on top of the kernel.
namespace dclab::vhdl::detail {

enum class TypeKind { Logic, Vector, Boolean, Integer, Time };

struct Type {
  TypeKind kind = TypeKind::Logic;
  bool numeric = false;  // unsigned rather than std_logic_vector
  std::int64_t left = 0;
  std::int64_t right = 0;
  bool descending = true;

  std::size_t width() const {
    if (kind != TypeKind::Vector) return 1;
    return static_cast<std::size_t>((descending ? left - right : right - left) + 1);
  }
  bool is_bits() const { return kind == TypeKind::Logic || kind == TypeKind::Vector; }
  /// Position (0 = leftmost) of VHDL index `i`, or -1 when out of range.
  std::int64_t position(std::int64_t i) const {
    std::int64_t p = descending ? left - i : i - left;
    return p >= 0 && p < static_cast<std::int64_t>(width()) ? p : -1;
  }
  std::string name() const;

  static Type logic() { return {}; }
  static Type vector(std::int64_t l, std::int64_t r, bool down, bool numeric = false) {
    return {TypeKind::Vector, numeric, l, r, down};
  }
  /// width-bit vector "(w-1 downto 0)"
  static Type bits(std::size_t w, bool numeric) {
    return vector(static_cast<std::int64_t>(w) - 1, 0, true, numeric);
  }
  static Type boolean() { return {TypeKind::Boolean, false, 0, 0, true}; }
  static Type integer() { return {TypeKind::Integer, false, 0, 0, true}; }
  static Type time() { return {TypeKind::Time, false, 0, 0, true}; }
};

struct Value {
  LogicVector bits;      // Logic (one element) and Vector, leftmost first
  std::int64_t num = 0;  // Integer, Time (ns), Boolean (0/1)
};

struct CExpr {
  enum class Op {
    Literal, Read,
    Not, And, Or, Xor, Nand, Nor, Xnor,
    ExactEq, NumEq, Lt, Le, Gt, Ge,
    Add, Sub, Mul, Div, Mod, Rem, Neg, Abs,
    Concat, RisingEdge, FallingEdge, Event,
    IsX, ToInteger, ToUnsigned, Resize, Cast, Truth,
  };

  Op op = Op::Literal;
  Type type;
  Value literal;
  std::vector<kernel::NetId> nets;  // Read, RisingEdge, FallingEdge, Event
  std::vector<CExpr> args;
  bool negate = false;  // ExactEq / NumEq used as "/="

  void collect_reads(std::vector<kernel::NetId>& out) const;
};

Value eval(const CExpr& e, const kernel::Context& ctx);

struct Instr {
  enum class Op { Assign, Jump, JumpIfFalse, WaitOn, WaitUntil, WaitFor, WaitForever };

  Op op = Op::Jump;
  CExpr expr;                              // Assign value, JumpIfFalse / WaitUntil condition
  std::vector<kernel::DriverId> drivers;   // Assign targets, leftmost first
  TimeNs time = 0;                         // Assign delay, WaitFor duration
  std::size_t target = 0;                  // jumps
  std::vector<kernel::NetId> nets;         // WaitOn / WaitUntil
};

struct Program {
  std::string name;
  std::vector<Instr> code;
};

/// Instructions one activation may execute before the run faults with
/// PROCESS_LOOP.
inline constexpr std::uint64_t kInstructionBudget = 1'000'000;

std::unique_ptr<kernel::Process> make_process(std::shared_ptr<const Program> program);

}  // namespace dclab::vhdl::detail
