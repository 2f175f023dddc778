#include <algorithm>
#include <cctype>
#include <set>
#include <sstream>

#include "dclab/error.hpp"
#include "dclab/vhdl/vhdl.hpp"
#include "lexer.hpp"

namespace dclab::vhdl {

namespace {

/// Lowercase, [a-z0-9_] only, no doubled or trailing underscores.
std::string sanitize(std::string_view name) {
  std::string out;
  for (char raw : name) {
    char c = static_cast<char>(std::tolower(static_cast<unsigned char>(raw)));
    bool ok = (c >= 'a' && c <= 'z') || (c >= '0' && c <= '9');
    if (!ok) c = '_';
    if (c == '_' && (out.empty() || out.back() == '_')) continue;
    out += c;
  }
  while (!out.empty() && out.back() == '_') out.pop_back();
  return out;
}

std::string header(const std::string& what) {
  return "-- " + std::string(kGeneratorVersion) + "\n-- " + what + "\n";
}

const char* kContext = "library ieee;\nuse ieee.std_logic_1164.all;\n";
const char* kNumericContext = "library ieee;\nuse ieee.std_logic_1164.all;\nuse ieee.numeric_std.all;\n";

char upper(LogicValue v) { return static_cast<char>(std::toupper(static_cast<unsigned char>(to_char(v)))); }

std::string char_literal(LogicValue v) { return std::string("'") + upper(v) + "'"; }

/// "10 ms", "250 ns": the largest unit that represents `ns` exactly.
std::string time_literal(TimeNs ns) {
  static const std::pair<TimeNs, const char*> units[] = {
      {1'000'000'000, "sec"}, {1'000'000, "ms"}, {1'000, "us"}, {1, "ns"}};
  for (const auto& [scale, unit] : units) {
    if (ns != 0 && ns % scale == 0) return std::to_string(ns / scale) + " " + unit;
  }
  return std::to_string(ns) + " ns";
}

std::string after(TimeNs delay) { return delay == 0 ? "" : " after " + time_literal(delay); }

bool simple(const BoolExpr& e) {
  return e.op() == BoolExpr::Op::Pin || e.op() == BoolExpr::Op::Const ||
         (e.op() == BoolExpr::Op::Not && e.args()[0].op() == BoolExpr::Op::Pin);
}

std::string expr_text(const BoolExpr& e, const std::vector<std::string>& names, bool nested) {
  using Op = BoolExpr::Op;
  switch (e.op()) {
    case Op::Const: return char_literal(e.value());
    case Op::Pin: return names[e.pin_index()];
    case Op::Not: {
      const BoolExpr& a = e.args()[0];
      if ((a.op() == Op::And || a.op() == Op::Or) && a.args().size() == 2 && simple(a.args()[0]) &&
          simple(a.args()[1])) {
        std::string s = expr_text(a.args()[0], names, true) + (a.op() == Op::And ? " nand " : " nor ") +
                        expr_text(a.args()[1], names, true);
        return nested ? "(" + s + ")" : s;
      }
      return "not " + expr_text(a, names, true);
    }
    case Op::And:
    case Op::Or:
    case Op::Xor: {
      const char* op = e.op() == Op::And ? " and " : e.op() == Op::Or ? " or " : " xor ";
      std::string s;
      for (std::size_t i = 0; i < e.args().size(); ++i) {
        if (i > 0) s += op;
        s += expr_text(e.args()[i], names, true);
      }
      return nested && e.args().size() > 1 ? "(" + s + ")" : s;
    }
  }
  return "'X'";
}

struct PortLine {
  std::string name;
  std::string mode;
  std::string type;
  std::string init;
};

std::string port_clause(const std::vector<PortLine>& ports) {
  if (ports.empty()) return "";
  std::string out = "  port (\n";
  for (std::size_t i = 0; i < ports.size(); ++i) {
    const auto& p = ports[i];
    out += "    " + p.name + " : " + p.mode + " " + p.type;
    if (!p.init.empty()) out += " := " + p.init;
    out += i + 1 < ports.size() ? ";\n" : "\n";
  }
  return out + "  );\n";
}

/// Entity plus behavioural architecture of one part, specialised to `params`.
std::string emit_part(const ComponentModel& m, const ParamMap& params, const std::string& ename) {
  std::vector<std::string> names;
  for (const auto& p : m.pins) names.push_back(identifier(p.name));
  TimeNs delay = effective_delay(m, params);

  std::vector<PortLine> ports;
  LogicVector power_on;
  if (m.kind == ComponentKind::Combinational) power_on = power_on_outputs(m, params);
  std::size_t out_index = 0;
  for (std::size_t i = 0; i < m.pins.size(); ++i) {
    PortLine p{names[i], m.pins[i].direction == PinDirection::Input ? "in" : "out", "std_logic", ""};
    if (m.pins[i].direction == PinDirection::Output) {
      if (out_index < power_on.size() && is_known(power_on[out_index])) p.init = char_literal(power_on[out_index]);
      if (m.kind == ComponentKind::Source) {
        SignalSpec s = source_signal(m, params);
        if (s.kind == SignalKind::Constant) p.init = char_literal(s.value);
      }
      ++out_index;
    }
    ports.push_back(p);
  }

  bool numeric = m.kind == ComponentKind::Sequential &&
                 std::get<SequentialBehavior>(m.behavior).rule == SequentialRule::SyncCounter4;
  std::ostringstream os;
  os << "-- " << m.part;
  if (!m.description.empty()) os << ": " << m.description;
  os << "\n" << (numeric ? kNumericContext : kContext) << "\n";
  os << "entity " << ename << " is\n" << port_clause(ports) << "end entity " << ename << ";\n\n";

  std::ostringstream decls;
  std::ostringstream body;
  switch (m.kind) {
    case ComponentKind::Combinational: {
      const auto& b = std::get<CombinationalBehavior>(m.behavior);
      if (!b.table) {
        for (const auto& [pin, fn] : b.functions) {
          body << "  " << names[pin] << " <= " << expr_text(fn, names, false) << after(delay) << ";\n";
        }
        break;
      }
      const FunctionTable& t = *b.table;
      std::string sens;
      std::string all;
      for (std::size_t k = 0; k < t.inputs.size(); ++k) {
        sens += (k ? ", " : "") + names[t.inputs[k]];
        all += (k ? " & " : "") + names[t.inputs[k]];
      }
      auto outputs = [&](const LogicVector& v, const std::string& indent) {
        for (std::size_t k = 0; k < t.outputs.size(); ++k) {
          body << indent << names[t.outputs[k]] << " <= " << char_literal(v[k]) << after(delay) << ";\n";
        }
      };
      body << "  process (" << sens << ")\n  begin\n";
      body << "    if is_x(" << all << ") then\n";
      outputs(LogicVector(t.outputs.size(), LogicValue::X), "      ");
      bool closed = false;
      for (const auto& row : t.rows) {
        std::string cond;
        for (std::size_t k = 0; k < row.match.size(); ++k) {
          if (row.match[k] == '-') continue;
          cond += (cond.empty() ? "" : " and ") + names[t.inputs[k]] + " = '" + row.match[k] + "'";
        }
        if (cond.empty()) {
          body << "    else\n";
          outputs(row.outputs, "      ");
          closed = true;
          break;
        }
        body << "    elsif " << cond << " then\n";
        outputs(row.outputs, "      ");
      }
      if (!closed) {
        body << "    else\n";
        outputs(LogicVector(t.outputs.size(), LogicValue::X), "      ");
      }
      body << "    end if;\n  end process;\n";
      break;
    }
    case ComponentKind::Sequential: {
      const auto& b = std::get<SequentialBehavior>(m.behavior);
      StateVector init = initial_state(m, params);
      std::string d = after(delay);
      for (std::size_t s = 0; s < b.sections.size(); ++s) {
        const auto& r = b.sections[s];
        auto pin = [&](const char* role) { return names[r.at(role)]; };
        std::string st = b.sections.size() == 1 ? "state" : "state_" + std::to_string(s + 1);
        if (b.rule == SequentialRule::DFlipFlop) {
          decls << "  signal " << st << " : std_logic := " << char_literal(init[s]) << ";\n";
          body << "  process (" << pin("clk") << ", " << pin("clr_n") << ", " << pin("pre_n") << ")\n  begin\n"
               << "    if " << pin("clr_n") << " = '0' then\n      " << st << " <= '0';\n"
               << "    elsif " << pin("pre_n") << " = '0' then\n      " << st << " <= '1';\n"
               << "    elsif rising_edge(" << pin("clk") << ") then\n      " << st << " <= " << pin("d") << ";\n"
               << "    end if;\n  end process;\n";
          std::string both = pin("clr_n") + " = '0' and " + pin("pre_n") + " = '0'";
          body << "  " << pin("q") << " <= '1'" << d << " when " << both << " else " << st << d << ";\n";
          body << "  " << pin("q_n") << " <= '1'" << d << " when " << both << " else not " << st << d << ";\n";
        } else {
          std::string bits;
          for (std::size_t k = 4; k-- > 0;) bits += upper(init[s * 4 + k]);
          decls << "  signal " << st << " : unsigned(3 downto 0) := \"" << bits << "\";\n";
          body << "  process (" << pin("clk") << ")\n  begin\n"
               << "    if rising_edge(" << pin("clk") << ") then\n"
               << "      if " << pin("clr_n") << " = '0' then\n        " << st << " <= \"0000\";\n"
               << "      elsif " << pin("load_n") << " = '0' then\n        " << st << " <= " << pin("d") << " & "
               << pin("c") << " & " << pin("b") << " & " << pin("a") << ";\n"
               << "      elsif " << pin("enp") << " = '1' and " << pin("ent") << " = '1' then\n        " << st
               << " <= " << st << " + 1;\n"
               << "      end if;\n    end if;\n  end process;\n";
          const char* q[] = {"qa", "qb", "qc", "qd"};
          for (int k = 0; k < 4; ++k) body << "  " << pin(q[k]) << " <= " << st << "(" << k << ")" << d << ";\n";
          body << "  " << pin("rco") << " <= " << pin("ent") << " and " << st << "(3) and " << st << "(2) and "
               << st << "(1) and " << st << "(0)" << d << ";\n";
        }
      }
      break;
    }
    case ComponentKind::Source: {
      std::string y = names[m.output_pins().front()];
      SignalSpec s = source_signal(m, params);
      if (s.kind != SignalKind::Clock) {
        body << "  " << y << " <= " << char_literal(s.value) << ";\n";
        break;
      }
      TimeNs period = clock_period_ns(s);
      TimeNs high = clock_high_ns(s);
      body << "  process\n  begin\n    " << y << " <= '0';\n";
      if (s.phase_ns > 0) body << "    wait for " << time_literal(s.phase_ns) << ";\n";
      if (high == 0 || high >= period) {
        body << "    " << y << " <= '" << (high == 0 ? '0' : '1') << "';\n    wait;\n";
      } else {
        body << "    loop\n      " << y << " <= '0';\n      wait for " << time_literal(period - high) << ";\n      "
             << y << " <= '1';\n      wait for " << time_literal(high) << ";\n    end loop;\n";
      }
      body << "  end process;\n";
      break;
    }
    case ComponentKind::Display: break;
  }
  os << "architecture behavioral of " << ename << " is\n" << decls.str() << "begin\n" << body.str()
     << "end architecture behavioral;\n";
  return os.str();
}

bool specialised(const ComponentModel& m, const ParamMap& params) {
  return !params.empty() && m.kind != ComponentKind::Display;
}

struct PortGroup {
  std::string name;  // VHDL identifier
  bool input = true;
  std::size_t width = 0;  // 0 = scalar
  std::vector<const PortBinding*> bits;  // index -> binding (scalar: one)
};

/// Groups "base[i]" ports with indices 0..n-1 into vectors; everything else
/// stays scalar.
std::vector<PortGroup> group_ports(const Circuit& c) {
  struct Parsed {
    const PortBinding* port;
    bool input;
    std::string base;
    long index;
  };
  std::vector<Parsed> parsed;
  auto parse = [&](const PortBinding& p, bool input) {
    std::string label = port_label(p.name);
    auto open = label.find('[');
    if (open == std::string::npos) {
      parsed.push_back({&p, input, label, -1});
    } else {
      parsed.push_back({&p, input, label.substr(0, open), std::stol(label.substr(open + 1))});
    }
  };
  for (const auto& p : c.top_inputs) parse(p, true);
  for (const auto& p : c.top_outputs) parse(p, false);

  std::map<std::string, std::vector<const Parsed*>> by_base;
  for (const auto& p : parsed) by_base[p.base].push_back(&p);

  std::vector<PortGroup> out;
  std::set<std::string> emitted;
  for (const auto& p : parsed) {
    const auto& members = by_base[p.base];
    bool vector = p.index >= 0 && std::all_of(members.begin(), members.end(), [&](const Parsed* q) {
                    return q->index >= 0 && q->input == p.input && q->index < static_cast<long>(members.size());
                  });
    if (vector) {
      std::set<long> indices;
      for (const auto* q : members) indices.insert(q->index);
      vector = indices.size() == members.size();
    }
    if (vector) {
      if (!emitted.insert(p.base).second) continue;
      PortGroup g{p.base, p.input, members.size(), std::vector<const PortBinding*>(members.size())};
      for (const auto* q : members) g.bits[static_cast<std::size_t>(q->index)] = q->port;
      out.push_back(std::move(g));
      continue;
    }
    std::string name = p.index >= 0 ? identifier(p.port->name) : p.base;
    if (!emitted.insert(name).second) {
      throw ContractError("port \"" + p.port->name + "\" collides with another port after mapping to VHDL name " +
                          name);
    }
    out.push_back({name, p.input, 0, {p.port}});
  }
  return out;
}

std::string group_type(const PortGroup& g) {
  return g.width == 0 ? "std_logic" : "std_logic_vector(" + std::to_string(g.width - 1) + " downto 0)";
}

std::string bit_ref(const PortGroup& g, std::size_t i) {
  return g.width == 0 ? g.name : g.name + "(" + std::to_string(i) + ")";
}

}  // namespace

std::string identifier(std::string_view name) {
  std::string out = sanitize(name);
  if (out.empty()) return "p";
  if (out[0] >= '0' && out[0] <= '9') out = "p" + out;
  if (detail::is_reserved(out)) out += "_p";
  return out;
}

std::string entity_name(std::string_view part) {
  std::string s = sanitize(part);
  if (!s.empty() && s[0] >= '0' && s[0] <= '9') return "ttl_" + s;
  return "dclab_" + s;
}

std::string top_entity_name(const Circuit& c) {
  std::string name = identifier(c.name.empty() ? "top" : c.name);
  if (name.rfind("ttl_", 0) == 0 || name.rfind("dclab_", 0) == 0) name += "_top";
  return name;
}

VhdlUnit emit_library(const ComponentRegistry& registry) {
  std::string text = header("component library: behavioural models of the catalog parts");
  for (const auto& part : registry.parts()) {
    text += "\n" + emit_part(registry.at(part), {}, entity_name(part));
  }
  return {"dclab_lib.vhd", text, UnitKind::EntityArch};
}

std::vector<VhdlUnit> emit_vhdl(const Circuit& c, const ComponentRegistry& registry) {
  ValidationReport report = validate_circuit(c, registry);
  if (!report.ok()) {
    const auto& e = report.errors.front();
    throw ContractError("cannot emit VHDL for \"" + c.name + "\": " + std::string(to_string(e.code)) + " at " +
                        e.location + ": " + e.message);
  }
  const std::string top = top_entity_name(c);
  std::vector<PortGroup> groups = group_ports(c);

  // Net -> VHDL expression naming it.
  std::map<std::string, std::string> net_ref;
  std::set<std::string> taken;
  for (const auto& g : groups) taken.insert(g.name);
  for (const auto& g : groups) {
    if (!g.input) continue;
    for (std::size_t i = 0; i < g.bits.size(); ++i) net_ref.emplace(g.bits[i]->net, bit_ref(g, i));
  }
  std::map<PinRef, std::string> pin_net;
  std::ostringstream signals;
  for (const auto& n : c.nets) {
    for (const auto& ep : n.endpoints) pin_net.emplace(ep, n.id);
    if (net_ref.contains(n.id)) continue;
    std::string name = "n_" + sanitize(n.id);
    if (name == "n_") name = "n_net";
    while (!taken.insert(name).second) name += "_";
    net_ref.emplace(n.id, name);
    bool driven = std::any_of(n.endpoints.begin(), n.endpoints.end(), [&](const PinRef& ep) {
      const ComponentModel& m = registry.at(c.find_instance(ep.component)->part);
      const PinSpec* pin = m.find_pin(ep.pin);
      return pin != nullptr && pin->direction == PinDirection::Output;
    });
    signals << "  signal " << name << " : std_logic" << (driven ? "" : " := 'Z'") << ";\n";
  }

  std::vector<const ComponentInstance*> instances;
  for (const auto& inst : c.instances) instances.push_back(&inst);
  std::sort(instances.begin(), instances.end(),
            [](const ComponentInstance* a, const ComponentInstance* b) { return a->id < b->id; });

  std::ostringstream special;
  std::ostringstream body;
  bool dangling = false;
  std::string dangling_name = "dangling";
  while (taken.contains(dangling_name)) dangling_name += "_";
  for (const auto* inst : instances) {
    const ComponentModel& m = registry.at(inst->part);
    std::string ename = entity_name(inst->part);
    if (specialised(m, inst->params)) {
      ename += "_" + sanitize(inst->id);
      special << "\n" << emit_part(m, inst->params, ename);
    }
    std::string label = identifier(inst->id);
    while (taken.contains(label)) label = "inst_" + label;
    taken.insert(label);
    body << "  " << label << ": entity work." << ename << "\n    port map (";
    for (std::size_t i = 0; i < m.pins.size(); ++i) {
      std::string actual;
      auto it = pin_net.find(PinRef{inst->id, m.pins[i].name});
      if (it != pin_net.end()) {
        actual = net_ref.at(it->second);
      } else if (m.pins[i].direction == PinDirection::Input) {
        actual = dangling_name;
        dangling = true;
      } else {
        actual = "open";
      }
      body << (i ? ",\n              " : "") << identifier(m.pins[i].name) << " => " << actual;
    }
    body << ");\n";
  }
  for (const auto& g : groups) {
    if (g.input) continue;
    for (std::size_t i = 0; i < g.bits.size(); ++i) {
      body << "  " << bit_ref(g, i) << " <= " << net_ref.at(g.bits[i]->net) << ";\n";
    }
  }
  if (dangling) signals << "  signal " << dangling_name << " : std_logic;\n";

  std::vector<PortLine> ports;
  for (const auto& g : groups) ports.push_back({g.name, g.input ? "in" : "out", group_type(g), ""});

  std::ostringstream os;
  os << header("circuit: " + c.name);
  os << special.str();
  if (!special.str().empty()) os << "\n";
  os << kContext << "\n";
  os << "entity " << top << " is\n" << port_clause(ports) << "end entity " << top << ";\n\n";
  os << "architecture structural of " << top << " is\n" << signals.str() << "begin\n" << body.str()
     << "end architecture structural;\n";
  return {{top + ".vhd", os.str(), UnitKind::EntityArch}, emit_library(registry)};
}

VhdlUnit emit_testbench(const Circuit& c, const StimulusSet& stim) {
  const std::string top = top_entity_name(c);
  std::vector<PortGroup> groups = group_ports(c);
  for (const auto& [name, spec] : stim.assignments) {
    bool found = std::any_of(c.top_inputs.begin(), c.top_inputs.end(), [&](const PortBinding& p) { return p.name == name; });
    if (!found) throw ContractError("stimulus names \"" + name + "\", which is not a top input");
  }
  for (const auto& p : c.top_inputs) {
    if (!stim.assignments.contains(p.name)) throw ContractError("top input \"" + p.name + "\" has no stimulus");
  }
  std::set<std::string> taken;
  for (const auto& g : groups) taken.insert(g.name);
  std::string uut = "uut";
  while (taken.contains(uut)) uut += "_";

  std::ostringstream os;
  os << header("testbench for " + top + "; run for " + std::to_string(stim.horizon_ns) + " ns");
  os << kContext << "\n";
  os << "entity " << top << "_tb is\nend entity " << top << "_tb;\n\n";
  os << "architecture sim of " << top << "_tb is\n";
  for (const auto& g : groups) os << "  signal " << g.name << " : " << group_type(g) << ";\n";
  os << "begin\n";
  os << "  " << uut << ": entity work." << top << "\n    port map (";
  for (std::size_t i = 0; i < groups.size(); ++i) {
    os << (i ? ",\n              " : "") << groups[i].name << " => " << groups[i].name;
  }
  os << ");\n";
  for (const auto& g : groups) {
    if (!g.input) continue;
    for (std::size_t i = 0; i < g.bits.size(); ++i) {
      const std::string sig = bit_ref(g, i);
      const SignalSpec& spec = stim.assignments.at(g.bits[i]->name);
      os << "\n  -- " << g.bits[i]->name << "\n  process\n  begin\n";
      if (spec.kind == SignalKind::Clock) {
        TimeNs period = clock_period_ns(spec);
        TimeNs high = clock_high_ns(spec);
        os << "    " << sig << " <= '0';\n";
        if (spec.phase_ns > 0) os << "    wait for " << time_literal(spec.phase_ns) << ";\n";
        if (high == 0 || high >= period) {
          os << "    " << sig << " <= '" << (high == 0 ? '0' : '1') << "';\n    wait;\n";
        } else {
          os << "    loop\n      " << sig << " <= '0';\n      wait for " << time_literal(period - high) << ";\n      "
             << sig << " <= '1';\n      wait for " << time_literal(high) << ";\n    end loop;\n";
        }
      } else {
        ChangeList changes = expand(spec, stim.horizon_ns);
        TimeNs now = 0;
        for (const auto& ch : changes) {
          if (ch.time_ns > now) os << "    wait for " << time_literal(ch.time_ns - now) << ";\n";
          now = ch.time_ns;
          os << "    " << sig << " <= " << char_literal(ch.value) << ";\n";
        }
        os << "    wait;\n";
      }
      os << "  end process;\n";
    }
  }
  os << "end architecture sim;\n";
  return {top + "_tb.vhd", os.str(), UnitKind::Testbench};
}

}  // namespace dclab::vhdl
