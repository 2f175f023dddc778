#include "dclab/components.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "dclab/error.hpp"
#include "json_util.hpp"
#include "parts_data.hpp"

namespace dclab {

using detail::Json;
using detail::ObjectReader;

std::string_view to_string(ComponentKind k) noexcept {
  switch (k) {
    case ComponentKind::Combinational: return "COMBINATIONAL";
    case ComponentKind::Sequential: return "SEQUENTIAL";
    case ComponentKind::Source: return "SOURCE";
    case ComponentKind::Display: return "DISPLAY";
  }
  return "COMBINATIONAL";
}

std::string_view to_string(SequentialRule r) noexcept {
  switch (r) {
    case SequentialRule::DFlipFlop: return "D_FLIP_FLOP";
    case SequentialRule::SyncCounter4: return "SYNC_COUNTER_4";
  }
  return "D_FLIP_FLOP";
}

// --- BoolExpr ----------------------------------------------------------------

BoolExpr BoolExpr::constant(LogicValue v) {
  BoolExpr e;
  e.op_ = Op::Const;
  e.value_ = v;
  return e;
}

BoolExpr BoolExpr::pin(std::size_t index) {
  BoolExpr e;
  e.op_ = Op::Pin;
  e.pin_ = index;
  return e;
}

BoolExpr BoolExpr::unary_not(BoolExpr inner) {
  BoolExpr e;
  e.op_ = Op::Not;
  e.args_.push_back(std::move(inner));
  return e;
}

BoolExpr BoolExpr::nary(Op op, std::vector<BoolExpr> args) {
  if (args.size() == 1) return std::move(args.front());
  BoolExpr e;
  e.op_ = op;
  e.args_ = std::move(args);
  return e;
}

LogicValue BoolExpr::eval(std::span<const LogicValue> pins) const {
  switch (op_) {
    case Op::Const: return value_;
    case Op::Pin: return as_input(pins[pin_]);
    case Op::Not: return logic_not(args_.front().eval(pins));
    case Op::And: {
      LogicValue acc = LogicValue::One;
      for (const auto& a : args_) {
        acc = logic_and(acc, a.eval(pins));
        if (acc == LogicValue::Zero) break;
      }
      return acc;
    }
    case Op::Or: {
      LogicValue acc = LogicValue::Zero;
      for (const auto& a : args_) {
        acc = logic_or(acc, a.eval(pins));
        if (acc == LogicValue::One) break;
      }
      return acc;
    }
    case Op::Xor: {
      LogicValue acc = LogicValue::Zero;
      for (const auto& a : args_) acc = logic_xor(acc, a.eval(pins));
      return acc;
    }
  }
  return LogicValue::X;
}

void BoolExpr::collect_pins(std::set<std::size_t>& out) const {
  if (op_ == Op::Pin) out.insert(pin_);
  for (const auto& a : args_) a.collect_pins(out);
}

namespace {

class ExprParser {
 public:
  ExprParser(std::string_view text, const BoolExpr::PinLookup& lookup,
             const std::map<std::string, BoolExpr, std::less<>>* terms)
      : text_(text), lookup_(lookup), terms_(terms) {}

  BoolExpr parse() {
    BoolExpr e = parse_or();
    skip_space();
    if (pos_ != text_.size()) fail("unexpected character");
    return e;
  }

 private:
  [[noreturn]] void fail(const std::string& what) const {
    throw FormatError(what + " at column " + std::to_string(pos_ + 1) + " in \"" +
                          std::string(text_) + "\"",
                      "");
  }

  void skip_space() {
    while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
  }

  bool accept(char c) {
    skip_space();
    if (pos_ < text_.size() && text_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  BoolExpr parse_or() {
    std::vector<BoolExpr> args{parse_xor()};
    while (accept('|')) args.push_back(parse_xor());
    return BoolExpr::nary(BoolExpr::Op::Or, std::move(args));
  }

  BoolExpr parse_xor() {
    std::vector<BoolExpr> args{parse_and()};
    while (accept('^')) args.push_back(parse_and());
    return BoolExpr::nary(BoolExpr::Op::Xor, std::move(args));
  }

  BoolExpr parse_and() {
    std::vector<BoolExpr> args{parse_unary()};
    while (accept('&')) args.push_back(parse_unary());
    return BoolExpr::nary(BoolExpr::Op::And, std::move(args));
  }

  BoolExpr parse_unary() {
    if (++depth_ > 200) fail("expression nested too deeply");
    BoolExpr result = parse_unary_inner();
    --depth_;
    return result;
  }

  BoolExpr parse_unary_inner() {
    skip_space();
    if (pos_ >= text_.size()) fail("unexpected end of expression");
    char c = text_[pos_];
    if (c == '~') {
      ++pos_;
      return BoolExpr::unary_not(parse_unary());
    }
    if (c == '(') {
      ++pos_;
      BoolExpr inner = parse_or();
      if (!accept(')')) fail("expected ')'");
      return inner;
    }
    if (c == '\'') {
      if (pos_ + 2 < text_.size() && text_[pos_ + 2] == '\'') {
        char v = text_[pos_ + 1];
        pos_ += 3;
        if (v == '0') return BoolExpr::constant(LogicValue::Zero);
        if (v == '1') return BoolExpr::constant(LogicValue::One);
      }
      fail("bad constant, expected '0' or '1'");
    }
    bool is_term = false;
    if (c == '$') {
      is_term = true;
      ++pos_;
    }
    std::size_t start = pos_;
    while (pos_ < text_.size() &&
           (std::isalnum(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '_')) {
      ++pos_;
    }
    if (start == pos_) fail("expected a pin name");
    std::string_view name = text_.substr(start, pos_ - start);
    if (is_term) {
      if (terms_ != nullptr) {
        if (auto it = terms_->find(name); it != terms_->end()) return it->second;
      }
      pos_ = start;
      fail("unknown term $" + std::string(name));
    }
    if (auto idx = lookup_(name)) return BoolExpr::pin(*idx);
    pos_ = start;
    fail("unknown pin \"" + std::string(name) + "\"");
  }

  std::string_view text_;
  const BoolExpr::PinLookup& lookup_;
  const std::map<std::string, BoolExpr, std::less<>>* terms_;
  std::size_t pos_ = 0;
  int depth_ = 0;
};

}  // namespace

BoolExpr BoolExpr::parse(std::string_view text, const PinLookup& lookup,
                         const std::map<std::string, BoolExpr, std::less<>>* terms) {
  return ExprParser(text, lookup, terms).parse();
}

// --- ComponentModel ----------------------------------------------------------

std::optional<std::size_t> ComponentModel::pin_index(std::string_view name) const {
  for (std::size_t i = 0; i < pins.size(); ++i) {
    if (pins[i].name == name) return i;
  }
  return std::nullopt;
}

const PinSpec* ComponentModel::find_pin(std::string_view name) const {
  auto i = pin_index(name);
  return i ? &pins[*i] : nullptr;
}

const ParamSpec* ComponentModel::find_param(std::string_view name) const {
  for (const auto& p : params) {
    if (p.name == name) return &p;
  }
  return nullptr;
}

std::vector<std::size_t> ComponentModel::input_pins() const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < pins.size(); ++i) {
    if (pins[i].direction == PinDirection::Input) out.push_back(i);
  }
  return out;
}

std::vector<std::size_t> ComponentModel::output_pins() const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < pins.size(); ++i) {
    if (pins[i].direction == PinDirection::Output) out.push_back(i);
  }
  return out;
}

// --- fixture parsing -----------------------------------------------------------

namespace {

const std::map<SequentialRule, std::vector<std::string>>& rule_roles() {
  static const std::map<SequentialRule, std::vector<std::string>> roles{
      {SequentialRule::DFlipFlop, {"d", "clk", "clr_n", "pre_n", "q", "q_n"}},
      {SequentialRule::SyncCounter4,
       {"clk", "clr_n", "load_n", "enp", "ent", "a", "b", "c", "d", "qa", "qb", "qc", "qd", "rco"}},
  };
  return roles;
}

std::size_t rule_state_bits(SequentialRule r) {
  return r == SequentialRule::DFlipFlop ? 1 : 4;
}

ParamSpec parse_param(const std::string& name, const Json& j, const std::string& path) {
  ObjectReader r(j, path);
  ParamSpec p;
  p.name = name;
  std::string type = r.string("type");
  if (type == "number" || type == "integer") {
    p.type = ParamSpec::Type::Number;
    p.integer = type == "integer";
    p.min = r.number("min");
    p.max = r.number("max");
    if (p.min > p.max) throw FormatError("min exceeds max", path);
    if (const Json* d = r.optional("default")) {
      p.default_value = detail::expect_number(*d, r.path("default"));
    }
  } else if (type == "choice") {
    p.type = ParamSpec::Type::Choice;
    const Json& choices = r.array("choices");
    for (std::size_t i = 0; i < choices.size(); ++i) {
      p.choices.push_back(detail::expect_string(choices[i], detail::child_path(r.path("choices"), i)));
    }
    if (p.choices.empty()) throw FormatError("choice parameter needs choices", r.path("choices"));
    if (const Json* d = r.optional("default")) {
      p.default_value = detail::expect_string(*d, r.path("default"));
    }
  } else {
    throw FormatError("unknown parameter type \"" + type + "\"", r.path("type"));
  }
  r.finish();
  return p;
}

ParamSpec integer_param(std::string name, double min, double max, std::optional<double> def) {
  ParamSpec p;
  p.name = std::move(name);
  p.type = ParamSpec::Type::Number;
  p.integer = true;
  p.min = min;
  p.max = max;
  if (def) p.default_value = *def;
  return p;
}

}  // namespace

ComponentModel ComponentRegistry::parse_model(std::string_view bytes) {
  Json doc = detail::parse_json(bytes);
  ObjectReader r(doc, "");
  std::int64_t version = r.integer("format_version");
  if (version != 1) {
    throw FormatError("unsupported format_version " + std::to_string(version), "/format_version");
  }
  ComponentModel m;
  m.part = r.string("part");
  if (const Json* d = r.optional("description")) m.description = detail::expect_string(*d, "/description");
  std::string kind = r.string("kind");
  if (kind == "COMBINATIONAL") {
    m.kind = ComponentKind::Combinational;
  } else if (kind == "SEQUENTIAL") {
    m.kind = ComponentKind::Sequential;
  } else if (kind == "SOURCE") {
    m.kind = ComponentKind::Source;
  } else if (kind == "DISPLAY") {
    m.kind = ComponentKind::Display;
  } else {
    throw FormatError("unknown kind \"" + kind + "\"", "/kind");
  }
  std::int64_t delay = r.integer("delay_ns");
  if (delay < 0) throw FormatError("delay_ns must be non-negative", "/delay_ns");
  m.delay_ns = static_cast<TimeNs>(delay);

  const Json& pins = r.array("pins");
  if (pins.empty()) throw FormatError("a model needs at least one pin", "/pins");
  for (std::size_t i = 0; i < pins.size(); ++i) {
    std::string pp = detail::child_path("/pins", i);
    ObjectReader pr(pins[i], pp);
    PinSpec pin;
    pin.name = pr.string("name");
    std::string dir = pr.string("direction");
    if (dir == "INPUT") {
      pin.direction = PinDirection::Input;
    } else if (dir == "OUTPUT") {
      pin.direction = PinDirection::Output;
    } else {
      throw FormatError("direction must be INPUT or OUTPUT", pr.path("direction"));
    }
    pin.index = static_cast<int>(pr.integer("index"));
    pr.finish();
    if (m.pin_index(pin.name)) throw FormatError("duplicate pin \"" + pin.name + "\"", pp);
    m.pins.push_back(std::move(pin));
  }

  if (const Json* params = r.optional("params")) {
    if (!params->is_object()) throw FormatError("expected an object", "/params");
    for (auto it = params->begin(); it != params->end(); ++it) {
      m.params.push_back(parse_param(it.key(), it.value(), detail::child_path("/params", it.key())));
    }
  }

  auto lookup_input = [&m](std::string_view name) -> std::optional<std::size_t> {
    auto i = m.pin_index(name);
    if (i && m.pins[*i].direction == PinDirection::Input) return i;
    return std::nullopt;
  };
  auto require_pin = [&m](const std::string& name, const std::string& path) {
    auto i = m.pin_index(name);
    if (!i) throw FormatError("unknown pin \"" + name + "\"", path);
    return *i;
  };

  switch (m.kind) {
    case ComponentKind::Combinational: {
      CombinationalBehavior b;
      std::map<std::string, BoolExpr, std::less<>> terms;
      if (const Json* t = r.optional("terms")) {
        // Terms may use earlier terms; JSON object order is not preserved, so
        // they are given as an array of [name, expression] pairs.
        detail::expect_array(*t, "/terms");
        for (std::size_t i = 0; i < t->size(); ++i) {
          std::string tp = detail::child_path("/terms", i);
          const Json& e = (*t)[i];
          if (!e.is_array() || e.size() != 2) throw FormatError("expected [name, expression]", tp);
          std::string name = detail::expect_string(e[0], tp + "/0");
          std::string text = detail::expect_string(e[1], tp + "/1");
          try {
            terms.insert_or_assign(name, BoolExpr::parse(text, lookup_input, &terms));
          } catch (const FormatError& err) {
            throw FormatError(err.reason(), tp + "/1");
          }
        }
      }
      const Json* functions = r.optional("functions");
      const Json* table = r.optional("table");
      if ((functions == nullptr) == (table == nullptr)) {
        throw FormatError("combinational model needs exactly one of functions or table", "");
      }
      if (functions != nullptr) {
        if (!functions->is_object()) throw FormatError("expected an object", "/functions");
        for (auto it = functions->begin(); it != functions->end(); ++it) {
          std::string fp = detail::child_path("/functions", it.key());
          std::size_t out = require_pin(it.key(), fp);
          if (m.pins[out].direction != PinDirection::Output) throw FormatError("not an output pin", fp);
          try {
            b.functions.emplace_back(out, BoolExpr::parse(detail::expect_string(it.value(), fp),
                                                          lookup_input, &terms));
          } catch (const FormatError& err) {
            if (!err.path().empty()) throw;
            throw FormatError(err.reason(), fp);
          }
        }
        std::sort(b.functions.begin(), b.functions.end(),
                  [](const auto& a, const auto& c) { return a.first < c.first; });
      } else {
        ObjectReader tr(*table, "/table");
        FunctionTable ft;
        const Json& ins = tr.array("inputs");
        for (std::size_t i = 0; i < ins.size(); ++i) {
          std::string p = detail::child_path("/table/inputs", i);
          std::size_t idx = require_pin(detail::expect_string(ins[i], p), p);
          if (m.pins[idx].direction != PinDirection::Input) throw FormatError("not an input pin", p);
          ft.inputs.push_back(idx);
        }
        const Json& outs = tr.array("outputs");
        for (std::size_t i = 0; i < outs.size(); ++i) {
          std::string p = detail::child_path("/table/outputs", i);
          std::size_t idx = require_pin(detail::expect_string(outs[i], p), p);
          if (m.pins[idx].direction != PinDirection::Output) throw FormatError("not an output pin", p);
          ft.outputs.push_back(idx);
        }
        const Json& rows = tr.array("rows");
        for (std::size_t i = 0; i < rows.size(); ++i) {
          std::string p = detail::child_path("/table/rows", i);
          const Json& row = rows[i];
          if (!row.is_array() || row.size() != 2) throw FormatError("expected [match, outputs]", p);
          FunctionTable::Row fr;
          fr.match = detail::expect_string(row[0], p + "/0");
          std::string values = detail::expect_string(row[1], p + "/1");
          if (fr.match.size() != ft.inputs.size() ||
              fr.match.find_first_not_of("01-") != std::string::npos) {
            throw FormatError("match must have one of 0/1/- per input", p + "/0");
          }
          if (values.size() != ft.outputs.size()) throw FormatError("wrong output count", p + "/1");
          for (char c : values) {
            auto v = logic_from_char(c);
            if (!v) throw FormatError("bad output value", p + "/1");
            fr.outputs.push_back(*v);
          }
          ft.rows.push_back(std::move(fr));
        }
        tr.finish();
        b.table = std::move(ft);
      }
      m.behavior = std::move(b);
      std::size_t outputs = m.output_pins().size();
      m.params.push_back(integer_param("delay_ns", 0, 1e9, static_cast<double>(m.delay_ns)));
      m.params.push_back(integer_param("init", 0, std::ldexp(1.0, static_cast<int>(outputs)) - 1, {}));
      break;
    }
    case ComponentKind::Sequential: {
      SequentialBehavior b;
      std::string rule = r.string("rule");
      if (rule == "D_FLIP_FLOP") {
        b.rule = SequentialRule::DFlipFlop;
      } else if (rule == "SYNC_COUNTER_4") {
        b.rule = SequentialRule::SyncCounter4;
      } else {
        throw FormatError("unknown sequential rule \"" + rule + "\"", "/rule");
      }
      const Json& sections = r.array("sections");
      if (sections.empty()) throw FormatError("at least one section required", "/sections");
      for (std::size_t s = 0; s < sections.size(); ++s) {
        std::string sp = detail::child_path("/sections", s);
        ObjectReader sr(sections[s], sp);
        std::map<std::string, std::size_t> roles;
        for (const std::string& role : rule_roles().at(b.rule)) {
          roles[role] = require_pin(sr.string(role), sr.path(role));
        }
        sr.finish();
        b.sections.push_back(std::move(roles));
      }
      b.state_bits = rule_state_bits(b.rule) * b.sections.size();
      b.reset_state.assign(b.state_bits, LogicValue::Zero);
      m.behavior = std::move(b);
      m.params.push_back(integer_param("delay_ns", 0, 1e9, static_cast<double>(m.delay_ns)));
      m.params.push_back(integer_param(
          "init", 0, std::ldexp(1.0, static_cast<int>(std::get<SequentialBehavior>(m.behavior).state_bits)) - 1,
          0));
      break;
    }
    case ComponentKind::Source: {
      SourceBehavior b;
      std::string source = r.string("source");
      if (source == "CONSTANT") {
        b.source = SourceTemplate::Constant;
        b.level = detail::expect_logic(r.required("level"), "/level");
      } else if (source == "SWITCH") {
        b.source = SourceTemplate::Switch;
      } else if (source == "CLOCK") {
        b.source = SourceTemplate::Clock;
      } else {
        throw FormatError("unknown source template \"" + source + "\"", "/source");
      }
      if (m.output_pins().size() != 1 || m.pins.size() != 1) {
        throw FormatError("a source has exactly one output pin", "/pins");
      }
      m.behavior = b;
      break;
    }
    case ComponentKind::Display: {
      DisplayBehavior b;
      std::string display = r.string("display");
      if (display == "SEVEN_SEGMENT") {
        b.variant = DisplayVariant::SevenSegment;
      } else if (display == "LED") {
        b.variant = DisplayVariant::Led;
      } else {
        throw FormatError("unknown display \"" + display + "\"", "/display");
      }
      if (!m.output_pins().empty()) throw FormatError("a display has no outputs", "/pins");
      m.behavior = b;
      break;
    }
  }
  r.finish();
  return m;
}

// --- registry ------------------------------------------------------------------

const ComponentRegistry& ComponentRegistry::builtin() {
  static const ComponentRegistry registry = [] {
    ComponentRegistry reg;
    for (const auto& [name, text] : detail::builtin_part_fixtures()) {
      try {
        reg.add(parse_model(text));
      } catch (const FormatError& e) {
        throw Error("built-in part fixture " + std::string(name) + ": " + e.what());
      }
    }
    return reg;
  }();
  return registry;
}

void ComponentRegistry::add(ComponentModel model) {
  std::string name = model.part;
  models_.insert_or_assign(std::move(name), std::make_shared<const ComponentModel>(std::move(model)));
}

void ComponentRegistry::load_directory(const std::string& dir) {
  std::vector<std::filesystem::path> files;
  for (const auto& entry : std::filesystem::directory_iterator(dir)) {
    if (entry.is_regular_file() && entry.path().extension() == ".json") files.push_back(entry.path());
  }
  std::sort(files.begin(), files.end());
  for (const auto& f : files) {
    std::ifstream in(f, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    try {
      add(parse_model(ss.str()));
    } catch (const FormatError& e) {
      throw FormatError(f.filename().string() + ": " + e.reason(), e.path(), e.offset());
    }
  }
}

const ComponentModel* ComponentRegistry::find(std::string_view part) const {
  auto it = models_.find(part);
  return it == models_.end() ? nullptr : it->second.get();
}

const ComponentModel& ComponentRegistry::at(std::string_view part) const {
  const ComponentModel* m = find(part);
  if (m == nullptr) throw ContractError("unknown part \"" + std::string(part) + "\"");
  return *m;
}

std::vector<std::string> ComponentRegistry::parts() const {
  std::vector<std::string> out;
  out.reserve(models_.size());
  for (const auto& [name, model] : models_) out.push_back(name);
  return out;
}

// --- parameters --------------------------------------------------------------------

std::vector<std::string> check_params(const ComponentModel& model, const ParamMap& params) {
  std::vector<std::string> problems;
  for (const auto& [key, value] : params) {
    const ParamSpec* spec = model.find_param(key);
    if (spec == nullptr) {
      problems.push_back("parameter \"" + key + "\" is not declared by " + model.part);
      continue;
    }
    if (spec->type == ParamSpec::Type::Number) {
      const double* d = std::get_if<double>(&value);
      if (d == nullptr) {
        problems.push_back("parameter \"" + key + "\" must be a number");
      } else if (!std::isfinite(*d) || *d < spec->min || *d > spec->max) {
        std::ostringstream msg;
        msg << "parameter \"" << key << "\" = " << *d << " outside [" << spec->min << ", " << spec->max << "]";
        problems.push_back(msg.str());
      } else if (spec->integer && std::floor(*d) != *d) {
        problems.push_back("parameter \"" + key + "\" must be an integer");
      }
    } else {
      const std::string* s = std::get_if<std::string>(&value);
      if (s == nullptr || std::find(spec->choices.begin(), spec->choices.end(), *s) == spec->choices.end()) {
        problems.push_back("parameter \"" + key + "\" must be one of the declared choices");
      }
    }
  }
  // Clock-specific consistency: the resulting waveform must be representable.
  if (const auto* src = std::get_if<SourceBehavior>(&model.behavior);
      src != nullptr && src->source == SourceTemplate::Clock && problems.empty()) {
    try {
      source_signal(model, params).check();
    } catch (const FormatError& e) {
      problems.push_back("clock parameters: " + e.reason());
    }
  }
  return problems;
}

std::optional<double> param_number(const ComponentModel& model, const ParamMap& params,
                                   std::string_view name) {
  if (auto it = params.find(std::string(name)); it != params.end()) {
    if (const double* d = std::get_if<double>(&it->second)) return *d;
  }
  if (const ParamSpec* spec = model.find_param(name); spec != nullptr && spec->default_value) {
    if (const double* d = std::get_if<double>(&*spec->default_value)) return *d;
  }
  return std::nullopt;
}

TimeNs effective_delay(const ComponentModel& model, const ParamMap& params) {
  if (model.kind == ComponentKind::Source || model.kind == ComponentKind::Display) return 0;
  if (auto d = param_number(model, params, "delay_ns")) return static_cast<TimeNs>(*d);
  return model.delay_ns;
}

// --- combinational evaluation ----------------------------------------------------------

namespace {

constexpr std::size_t kMaxConsensusBits = 14;

/// Evaluates `fn` over every 0/1 completion of the X/Z entries of `values` at
/// `positions` and merges the results element-wise: agreeing values are kept,
/// disagreeing ones become X.
template <class Fn>
LogicVector consensus(LogicVector values, const std::vector<std::size_t>& positions,
                      std::size_t result_size, Fn&& fn) {
  std::vector<std::size_t> unknown;
  for (std::size_t p : positions) {
    if (!is_known(values[p])) unknown.push_back(p);
  }
  if (unknown.empty()) return fn(values);
  if (unknown.size() > kMaxConsensusBits) return LogicVector(result_size, LogicValue::X);
  std::optional<LogicVector> merged;
  const std::uint64_t combos = std::uint64_t{1} << unknown.size();
  for (std::uint64_t k = 0; k < combos; ++k) {
    for (std::size_t b = 0; b < unknown.size(); ++b) values[unknown[b]] = from_bool(((k >> b) & 1U) != 0);
    LogicVector r = fn(values);
    if (!merged) {
      merged = std::move(r);
      continue;
    }
    bool all_x = true;
    for (std::size_t i = 0; i < r.size(); ++i) {
      if ((*merged)[i] != r[i]) (*merged)[i] = LogicValue::X;
      if ((*merged)[i] != LogicValue::X) all_x = false;
    }
    if (all_x) break;
  }
  return *merged;
}

LogicVector eval_table(const FunctionTable& table, std::span<const LogicValue> pins,
                       std::size_t pin_count) {
  LogicVector values(pins.begin(), pins.end());
  values.resize(pin_count, LogicValue::X);
  auto lookup = [&table](const LogicVector& v) {
    for (const auto& row : table.rows) {
      bool match = true;
      for (std::size_t c = 0; c < table.inputs.size() && match; ++c) {
        char want = row.match[c];
        if (want == '-') continue;
        match = v[table.inputs[c]] == (want == '1' ? LogicValue::One : LogicValue::Zero);
      }
      if (match) return row.outputs;
    }
    return LogicVector(table.outputs.size(), LogicValue::X);
  };
  return consensus(std::move(values), table.inputs, table.outputs.size(), lookup);
}

void require_kind(const ComponentModel& model, ComponentKind kind, const char* op) {
  if (model.kind != kind) {
    throw ContractError(std::string(op) + ": " + model.part + " is " + std::string(to_string(model.kind)));
  }
}

LogicVector gather_inputs(const ComponentModel& model, const PinValues& inputs) {
  LogicVector pins(model.pins.size(), LogicValue::X);
  for (std::size_t i = 0; i < model.pins.size(); ++i) {
    if (model.pins[i].direction != PinDirection::Input) continue;
    auto it = inputs.find(model.pins[i].name);
    if (it == inputs.end()) {
      throw ContractError(model.part + ": missing value for input pin \"" + model.pins[i].name + "\"");
    }
    pins[i] = it->second;
  }
  return pins;
}

PinValues scatter_outputs(const ComponentModel& model, const LogicVector& pins) {
  PinValues out;
  for (std::size_t i = 0; i < model.pins.size(); ++i) {
    if (model.pins[i].direction == PinDirection::Output) out.emplace(model.pins[i].name, pins[i]);
  }
  return out;
}

}  // namespace

LogicVector eval_combinational(const ComponentModel& model, std::span<const LogicValue> pins) {
  require_kind(model, ComponentKind::Combinational, "eval_combinational");
  const auto& b = std::get<CombinationalBehavior>(model.behavior);
  LogicVector out(pins.begin(), pins.end());
  if (b.table) {
    LogicVector values = eval_table(*b.table, pins, model.pins.size());
    for (std::size_t i = 0; i < b.table->outputs.size(); ++i) out[b.table->outputs[i]] = values[i];
  } else {
    for (const auto& [pin, fn] : b.functions) out[pin] = fn.eval(pins);
  }
  return out;
}

PinValues eval_combinational(const ComponentModel& model, const PinValues& inputs) {
  require_kind(model, ComponentKind::Combinational, "eval_combinational");
  LogicVector pins = gather_inputs(model, inputs);
  return scatter_outputs(model, eval_combinational(model, std::span<const LogicValue>(pins)));
}

LogicVector power_on_outputs(const ComponentModel& model, const ParamMap& params) {
  std::vector<std::size_t> outs = model.output_pins();
  LogicVector values(outs.size(), LogicValue::X);
  if (model.kind != ComponentKind::Combinational) return values;
  if (auto it = params.find("init"); it != params.end()) {
    if (const double* d = std::get_if<double>(&it->second)) {
      auto mask = static_cast<std::uint64_t>(*d);
      for (std::size_t i = 0; i < outs.size(); ++i) values[i] = from_bool(((mask >> i) & 1U) != 0);
    }
  }
  return values;
}

// --- sequential ----------------------------------------------------------------------

Edge classify_edge(LogicValue before, LogicValue after) noexcept {
  before = as_input(before);
  after = as_input(after);
  if (before == after) return Edge::None;
  if (before == LogicValue::Zero && after == LogicValue::One) return Edge::Rising;
  if (before == LogicValue::One && after == LogicValue::Zero) return Edge::Falling;
  if (before == LogicValue::Zero || after == LogicValue::One) return Edge::PossiblyRising;
  return Edge::PossiblyFalling;
}

EdgeEvent EdgeEvent::on(const ComponentModel& model, std::string_view pin, Edge e) {
  EdgeEvent ev;
  ev.pins.assign(model.pins.size(), Edge::None);
  auto idx = model.pin_index(pin);
  if (!idx) throw ContractError(model.part + ": unknown pin \"" + std::string(pin) + "\"");
  ev.pins[*idx] = e;
  return ev;
}

EdgeEvent EdgeEvent::detect(std::span<const LogicValue> previous, std::span<const LogicValue> current) {
  EdgeEvent ev;
  ev.pins.resize(current.size(), Edge::None);
  for (std::size_t i = 0; i < current.size() && i < previous.size(); ++i) {
    ev.pins[i] = classify_edge(previous[i], current[i]);
  }
  return ev;
}

StateVector initial_state(const ComponentModel& model, const ParamMap& params) {
  require_kind(model, ComponentKind::Sequential, "initial_state");
  const auto& b = std::get<SequentialBehavior>(model.behavior);
  StateVector s = b.reset_state;
  if (auto it = params.find("init"); it != params.end()) {
    if (const double* d = std::get_if<double>(&it->second)) {
      auto mask = static_cast<std::uint64_t>(*d);
      for (std::size_t i = 0; i < s.size(); ++i) s[i] = from_bool(((mask >> i) & 1U) != 0);
    }
  }
  return s;
}

namespace {

bool high(const LogicVector& v, std::size_t pin) { return v[pin] == LogicValue::One; }
bool low(const LogicVector& v, std::size_t pin) { return v[pin] == LogicValue::Zero; }

// Rule functions over fully known values. `state` and the result hold the
// section's bits starting at `base`.
void dff_next(const std::map<std::string, std::size_t>& roles, const LogicVector& pins, bool rising,
              LogicVector& state, std::size_t base) {
  if (low(pins, roles.at("clr_n"))) {
    state[base] = LogicValue::Zero;
  } else if (low(pins, roles.at("pre_n"))) {
    state[base] = LogicValue::One;
  } else if (rising) {
    state[base] = pins[roles.at("d")];
  }
}

void dff_outputs(const std::map<std::string, std::size_t>& roles, const LogicVector& state,
                 std::size_t base, const LogicVector& pins, LogicVector& out) {
  bool both = low(pins, roles.at("clr_n")) && low(pins, roles.at("pre_n"));
  bool q = state[base] == LogicValue::One;
  out[roles.at("q")] = from_bool(q || both);
  out[roles.at("q_n")] = from_bool(!q || both);
}

unsigned counter_value(const LogicVector& state, std::size_t base) {
  unsigned v = 0;
  for (std::size_t i = 0; i < 4; ++i) v |= (state[base + i] == LogicValue::One ? 1U : 0U) << i;
  return v;
}

void counter_store(LogicVector& state, std::size_t base, unsigned v) {
  for (std::size_t i = 0; i < 4; ++i) state[base + i] = from_bool(((v >> i) & 1U) != 0);
}

void counter_next(const std::map<std::string, std::size_t>& roles, const LogicVector& pins, bool rising,
                  LogicVector& state, std::size_t base) {
  if (!rising) return;
  if (low(pins, roles.at("clr_n"))) {
    counter_store(state, base, 0);
  } else if (low(pins, roles.at("load_n"))) {
    unsigned v = (high(pins, roles.at("a")) ? 1U : 0U) | (high(pins, roles.at("b")) ? 2U : 0U) |
                 (high(pins, roles.at("c")) ? 4U : 0U) | (high(pins, roles.at("d")) ? 8U : 0U);
    counter_store(state, base, v);
  } else if (high(pins, roles.at("enp")) && high(pins, roles.at("ent"))) {
    counter_store(state, base, (counter_value(state, base) + 1) & 0xFU);
  }
}

void counter_outputs(const std::map<std::string, std::size_t>& roles, const LogicVector& state,
                     std::size_t base, const LogicVector& pins, LogicVector& out) {
  out[roles.at("qa")] = state[base];
  out[roles.at("qb")] = state[base + 1];
  out[roles.at("qc")] = state[base + 2];
  out[roles.at("qd")] = state[base + 3];
  out[roles.at("rco")] = from_bool(high(pins, roles.at("ent")) && counter_value(state, base) == 15);
}

// Layout of the consensus vector: [pins..., state bits...].
struct SeqLayout {
  std::vector<std::size_t> positions;  // non-clock input pins and state bits
};

SeqLayout seq_layout(const ComponentModel& model, const SequentialBehavior& b) {
  std::set<std::size_t> clocks;
  for (const auto& s : b.sections) clocks.insert(s.at("clk"));
  SeqLayout layout;
  for (std::size_t i : model.input_pins()) {
    if (!clocks.contains(i)) layout.positions.push_back(i);
  }
  for (std::size_t i = 0; i < b.state_bits; ++i) layout.positions.push_back(model.pins.size() + i);
  return layout;
}

}  // namespace

IndexedStep step_sequential(const ComponentModel& model, const StateVector& state,
                            std::span<const LogicValue> pins, const EdgeEvent& edge) {
  require_kind(model, ComponentKind::Sequential, "step_sequential");
  const auto& b = std::get<SequentialBehavior>(model.behavior);
  if (state.size() != b.state_bits) throw ContractError(model.part + ": wrong state vector size");
  const std::size_t pin_count = model.pins.size();
  const std::size_t per_section = b.rule == SequentialRule::DFlipFlop ? 1 : 4;

  LogicVector combined(pins.begin(), pins.end());
  combined.resize(pin_count, LogicValue::X);
  for (auto& v : combined) v = as_input(v);
  combined.insert(combined.end(), state.begin(), state.end());
  SeqLayout layout = seq_layout(model, b);

  auto next_state = [&](const LogicVector& v) {
    LogicVector result(b.state_bits);
    for (std::size_t s = 0; s < b.sections.size(); ++s) {
      const auto& roles = b.sections[s];
      const std::size_t base = s * per_section;
      auto apply = [&](bool rising) {
        LogicVector st(v.begin() + static_cast<std::ptrdiff_t>(pin_count), v.end());
        if (b.rule == SequentialRule::DFlipFlop) {
          dff_next(roles, v, rising, st, base);
        } else {
          counter_next(roles, v, rising, st, base);
        }
        return st;
      };
      Edge e = edge.at(roles.at("clk"));
      LogicVector chosen;
      if (e == Edge::Rising) {
        chosen = apply(true);
      } else if (e == Edge::PossiblyRising) {
        LogicVector with = apply(true);
        LogicVector without = apply(false);
        bool same = std::equal(with.begin() + static_cast<std::ptrdiff_t>(base),
                               with.begin() + static_cast<std::ptrdiff_t>(base + per_section),
                               without.begin() + static_cast<std::ptrdiff_t>(base));
        chosen = with;
        if (!same) {
          for (std::size_t i = base; i < base + per_section; ++i) chosen[i] = LogicValue::X;
        }
      } else {
        chosen = apply(false);
      }
      for (std::size_t i = base; i < base + per_section; ++i) result[i] = chosen[i];
    }
    return result;
  };

  IndexedStep step;
  step.state = consensus(combined, layout.positions, b.state_bits, next_state);

  LogicVector after(combined.begin(), combined.begin() + static_cast<std::ptrdiff_t>(pin_count));
  after.insert(after.end(), step.state.begin(), step.state.end());
  auto outputs = [&](const LogicVector& v) {
    LogicVector out(pin_count, LogicValue::X);
    LogicVector st(v.begin() + static_cast<std::ptrdiff_t>(pin_count), v.end());
    for (std::size_t s = 0; s < b.sections.size(); ++s) {
      if (b.rule == SequentialRule::DFlipFlop) {
        dff_outputs(b.sections[s], st, s * per_section, v, out);
      } else {
        counter_outputs(b.sections[s], st, s * per_section, v, out);
      }
    }
    return out;
  };
  LogicVector out = consensus(after, layout.positions, pin_count, outputs);
  step.pins.assign(pins.begin(), pins.end());
  step.pins.resize(pin_count, LogicValue::X);
  for (std::size_t i : model.output_pins()) step.pins[i] = out[i];
  return step;
}

SequentialStep step_sequential(const ComponentModel& model, const StateVector& state,
                               const PinValues& inputs, const EdgeEvent& edge) {
  require_kind(model, ComponentKind::Sequential, "step_sequential");
  LogicVector pins = gather_inputs(model, inputs);
  IndexedStep s = step_sequential(model, state, std::span<const LogicValue>(pins), edge);
  return {std::move(s.state), scatter_outputs(model, s.pins)};
}

// --- display / source ------------------------------------------------------------------

std::set<std::string> DisplayState::lit() const {
  std::set<std::string> out;
  for (const auto& [name, s] : segments) {
    if (s == SegmentState::Lit) out.insert(name);
  }
  return out;
}

bool DisplayState::any_indeterminate() const {
  return std::any_of(segments.begin(), segments.end(),
                     [](const auto& s) { return s.second == SegmentState::Indeterminate; });
}

DisplayState decode_display(const ComponentModel& model, const PinValues& inputs, const ParamMap& params) {
  require_kind(model, ComponentKind::Display, "decode_display");
  bool anode = false;
  if (auto it = params.find("polarity"); it != params.end()) {
    if (const auto* s = std::get_if<std::string>(&it->second)) anode = *s == "common_anode";
  }
  DisplayState state;
  for (const PinSpec& pin : model.pins) {
    auto it = inputs.find(pin.name);
    LogicValue v = it == inputs.end() ? LogicValue::Z : as_input(it->second);
    SegmentState s = SegmentState::Indeterminate;
    if (is_known(v)) s = ((v == LogicValue::One) != anode) ? SegmentState::Lit : SegmentState::Dark;
    std::string name = pin.name;
    std::transform(name.begin(), name.end(), name.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    state.segments.emplace_back(std::move(name), s);
  }
  return state;
}

SignalSpec source_signal(const ComponentModel& model, const ParamMap& params) {
  require_kind(model, ComponentKind::Source, "source_signal");
  const auto& b = std::get<SourceBehavior>(model.behavior);
  switch (b.source) {
    case SourceTemplate::Constant: return SignalSpec::constant(b.level);
    case SourceTemplate::Switch: {
      double v = param_number(model, params, "value").value_or(0.0);
      return SignalSpec::constant(v != 0.0 ? LogicValue::One : LogicValue::Zero);
    }
    case SourceTemplate::Clock: {
      double freq = param_number(model, params, "freq_hz").value_or(50.0);
      double duty = param_number(model, params, "duty").value_or(0.5);
      double phase = param_number(model, params, "phase_ns").value_or(0.0);
      return SignalSpec::clock(freq, duty, static_cast<TimeNs>(phase));
    }
  }
  return SignalSpec::constant(LogicValue::X);
}

}  // namespace dclab
