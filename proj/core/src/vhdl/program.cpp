#include "program.hpp"

#include <algorithm>
#include <cstdlib>
#include <optional>

namespace dclab::vhdl::detail {

using kernel::Context;

std::string Type::name() const {
  switch (kind) {
    case TypeKind::Logic: return "std_logic";
    case TypeKind::Boolean: return "boolean";
    case TypeKind::Integer: return "integer";
    case TypeKind::Time: return "time";
    case TypeKind::Vector: break;
  }
  return std::string(numeric ? "unsigned(" : "std_logic_vector(") + std::to_string(left) +
         (descending ? " downto " : " to ") + std::to_string(right) + ")";
}

void CExpr::collect_reads(std::vector<kernel::NetId>& out) const {
  out.insert(out.end(), nets.begin(), nets.end());
  for (const auto& a : args) a.collect_reads(out);
}

namespace {

bool has_meta(const LogicVector& v) {
  return std::any_of(v.begin(), v.end(), [](LogicValue b) { return !is_known(b); });
}

std::uint64_t to_uint(const LogicVector& v) {
  std::uint64_t n = 0;
  for (LogicValue b : v) n = (n << 1) | (b == LogicValue::One ? 1U : 0U);
  return n;
}

LogicVector from_uint(std::uint64_t n, std::size_t width) {
  LogicVector out(width, LogicValue::Zero);
  for (std::size_t i = 0; i < width; ++i) {
    if (i < 64 && ((n >> i) & 1U) != 0) out[width - 1 - i] = LogicValue::One;
  }
  return out;
}

std::uint64_t mask(std::size_t width) { return width >= 64 ? ~std::uint64_t{0} : (std::uint64_t{1} << width) - 1; }

LogicValue bitwise(CExpr::Op op, LogicValue a, LogicValue b) {
  switch (op) {
    case CExpr::Op::And: return logic_and(a, b);
    case CExpr::Op::Or: return logic_or(a, b);
    case CExpr::Op::Xor: return logic_xor(a, b);
    case CExpr::Op::Nand: return logic_not(logic_and(a, b));
    case CExpr::Op::Nor: return logic_not(logic_or(a, b));
    default: return logic_not(logic_xor(a, b));
  }
}

bool boolean_op(CExpr::Op op, bool a, bool b) {
  switch (op) {
    case CExpr::Op::And: return a && b;
    case CExpr::Op::Or: return a || b;
    case CExpr::Op::Xor: return a != b;
    case CExpr::Op::Nand: return !(a && b);
    case CExpr::Op::Nor: return !(a || b);
    default: return a == b;
  }
}

// Operand of a numeric comparison: integer value, or nullopt on metavalues.
std::optional<std::int64_t> numeric(const CExpr& e, const Value& v) {
  if (e.type.kind == TypeKind::Integer) return v.num;
  if (has_meta(v.bits)) return std::nullopt;
  return static_cast<std::int64_t>(to_uint(v.bits));
}

Value boolean(bool b) { return Value{{}, b ? 1 : 0}; }

}  // namespace

Value eval(const CExpr& e, const Context& ctx) {
  using Op = CExpr::Op;
  switch (e.op) {
    case Op::Literal: return e.literal;
    case Op::Read: {
      Value v;
      v.bits.reserve(e.nets.size());
      for (auto n : e.nets) v.bits.push_back(ctx.value(n));
      return v;
    }
    case Op::Not: {
      Value v = eval(e.args[0], ctx);
      if (e.type.kind == TypeKind::Boolean) return boolean(v.num == 0);
      for (auto& b : v.bits) b = logic_not(b);
      return v;
    }
    case Op::And:
    case Op::Or:
    case Op::Xor:
    case Op::Nand:
    case Op::Nor:
    case Op::Xnor: {
      Value a = eval(e.args[0], ctx);
      if (e.type.kind == TypeKind::Boolean) {
        // Short-circuit like VHDL's and/or on booleans.
        if (e.op == Op::And && a.num == 0) return boolean(false);
        if (e.op == Op::Or && a.num != 0) return boolean(true);
        Value b = eval(e.args[1], ctx);
        return boolean(boolean_op(e.op, a.num != 0, b.num != 0));
      }
      Value b = eval(e.args[1], ctx);
      for (std::size_t i = 0; i < a.bits.size(); ++i) a.bits[i] = bitwise(e.op, a.bits[i], b.bits[i]);
      return a;
    }
    case Op::ExactEq: {
      Value a = eval(e.args[0], ctx);
      Value b = eval(e.args[1], ctx);
      bool eq = e.args[0].type.is_bits() ? a.bits == b.bits : a.num == b.num;
      return boolean(eq != e.negate);
    }
    case Op::NumEq:
    case Op::Lt:
    case Op::Le:
    case Op::Gt:
    case Op::Ge: {
      auto a = numeric(e.args[0], eval(e.args[0], ctx));
      auto b = numeric(e.args[1], eval(e.args[1], ctx));
      if (!a || !b) return boolean(e.negate);
      bool r = false;
      switch (e.op) {
        case Op::NumEq: r = (*a == *b) != e.negate; break;
        case Op::Lt: r = *a < *b; break;
        case Op::Le: r = *a <= *b; break;
        case Op::Gt: r = *a > *b; break;
        default: r = *a >= *b; break;
      }
      return boolean(r);
    }
    case Op::Add:
    case Op::Sub: {
      Value a = eval(e.args[0], ctx);
      Value b = eval(e.args[1], ctx);
      if (e.type.kind == TypeKind::Integer) return Value{{}, e.op == Op::Add ? a.num + b.num : a.num - b.num};
      std::size_t w = e.type.width();
      auto x = numeric(e.args[0], a);
      auto y = numeric(e.args[1], b);
      if (!x || !y) return Value{LogicVector(w, LogicValue::X), 0};
      std::uint64_t r = e.op == Op::Add ? static_cast<std::uint64_t>(*x) + static_cast<std::uint64_t>(*y)
                                        : static_cast<std::uint64_t>(*x) - static_cast<std::uint64_t>(*y);
      return Value{from_uint(r & mask(w), w), 0};
    }
    case Op::Mul: return Value{{}, eval(e.args[0], ctx).num * eval(e.args[1], ctx).num};
    case Op::Div:
    case Op::Mod:
    case Op::Rem: {
      std::int64_t a = eval(e.args[0], ctx).num;
      std::int64_t b = eval(e.args[1], ctx).num;
      if (b == 0) return Value{{}, 0};
      if (e.op == Op::Div) return Value{{}, a / b};
      if (e.op == Op::Rem) return Value{{}, a % b};
      std::int64_t m = a % b;
      if (m != 0 && ((m < 0) != (b < 0))) m += b;
      return Value{{}, m};
    }
    case Op::Neg: return Value{{}, -eval(e.args[0], ctx).num};
    case Op::Abs: return Value{{}, std::abs(eval(e.args[0], ctx).num)};
    case Op::Concat: {
      Value a = eval(e.args[0], ctx);
      Value b = eval(e.args[1], ctx);
      a.bits.insert(a.bits.end(), b.bits.begin(), b.bits.end());
      return a;
    }
    case Op::RisingEdge:
    case Op::FallingEdge: {
      auto n = e.nets[0];
      if (!ctx.event(n)) return boolean(false);
      LogicValue now = ctx.value(n);
      LogicValue before = ctx.last_value(n);
      if (e.op == Op::RisingEdge) return boolean(now == LogicValue::One && before == LogicValue::Zero);
      return boolean(now == LogicValue::Zero && before == LogicValue::One);
    }
    case Op::Event: return boolean(ctx.event(e.nets[0]));
    case Op::IsX: return boolean(has_meta(eval(e.args[0], ctx).bits));
    case Op::ToInteger: {
      Value a = eval(e.args[0], ctx);
      return Value{{}, has_meta(a.bits) ? 0 : static_cast<std::int64_t>(to_uint(a.bits))};
    }
    case Op::ToUnsigned: {
      std::size_t w = e.type.width();
      return Value{from_uint(static_cast<std::uint64_t>(eval(e.args[0], ctx).num) & mask(w), w), 0};
    }
    case Op::Resize: {
      Value a = eval(e.args[0], ctx);
      std::size_t w = e.type.width();
      LogicVector out(w, LogicValue::Zero);
      for (std::size_t i = 0; i < w && i < a.bits.size(); ++i) out[w - 1 - i] = a.bits[a.bits.size() - 1 - i];
      return Value{std::move(out), 0};
    }
    case Op::Cast: return eval(e.args[0], ctx);
    case Op::Truth: return boolean(eval(e.args[0], ctx).bits[0] == LogicValue::One);
  }
  return {};
}

namespace {

class VhdlProcess final : public kernel::Process {
 public:
  explicit VhdlProcess(std::shared_ptr<const Program> p) : prog_(std::move(p)) {}

  void run(Context& ctx) override {
    const auto& code = prog_->code;
    if (pc_ >= code.size()) return;
    if (started_) {
      if (!resumes(code[pc_], ctx)) return;
      ++pc_;
    }
    started_ = true;
    std::uint64_t budget = kInstructionBudget;
    while (pc_ < code.size()) {
      if (budget-- == 0) {
        ctx.fail("PROCESS_LOOP", "process " + prog_->name + " ran " + std::to_string(kInstructionBudget) +
                                     " statements without reaching a wait");
        pc_ = code.size();
        return;
      }
      const Instr& in = code[pc_];
      switch (in.op) {
        case Instr::Op::Assign: {
          Value v = eval(in.expr, ctx);
          for (std::size_t i = 0; i < in.drivers.size(); ++i) ctx.drive(in.drivers[i], v.bits[i], in.time);
          ++pc_;
          break;
        }
        case Instr::Op::Jump: pc_ = in.target; break;
        case Instr::Op::JumpIfFalse: pc_ = eval(in.expr, ctx).num != 0 ? pc_ + 1 : in.target; break;
        case Instr::Op::WaitFor: ctx.wake_after(in.time); return;
        case Instr::Op::WaitOn:
        case Instr::Op::WaitUntil:
        case Instr::Op::WaitForever: return;
      }
    }
  }

 private:
  static bool resumes(const Instr& w, const Context& ctx) {
    switch (w.op) {
      case Instr::Op::WaitFor: return ctx.timer_expired();
      case Instr::Op::WaitOn:
        return std::any_of(w.nets.begin(), w.nets.end(), [&](auto n) { return ctx.event(n); });
      case Instr::Op::WaitUntil:
        return std::any_of(w.nets.begin(), w.nets.end(), [&](auto n) { return ctx.event(n); }) &&
               eval(w.expr, ctx).num != 0;
      default: return false;
    }
  }

  std::shared_ptr<const Program> prog_;
  std::size_t pc_ = 0;
  bool started_ = false;
};

}  // namespace

std::unique_ptr<kernel::Process> make_process(std::shared_ptr<const Program> program) {
  return std::make_unique<VhdlProcess>(std::move(program));
}

}  // namespace dclab::vhdl::detail
