#include "dclab/trace.hpp"

#include <algorithm>
#include <map>
#include <sstream>

#include "dclab/error.hpp"

namespace dclab {

const TraceSignal* Trace::find(std::string_view label) const {
  for (const auto& s : signals) {
    if (s.label == label) return &s;
  }
  return nullptr;
}

LogicValue sample(const Trace& trace, std::string_view signal, TimeNs t_ns) {
  const TraceSignal* s = trace.find(signal);
  if (s == nullptr) throw ContractError("no signal \"" + std::string(signal) + "\" in trace");
  if (t_ns > trace.horizon_ns) {
    throw ContractError("sample time " + std::to_string(t_ns) + " ns is past the horizon " +
                        std::to_string(trace.horizon_ns) + " ns");
  }
  auto it = std::upper_bound(s->changes.begin(), s->changes.end(), t_ns,
                             [](TimeNs t, const Change& c) { return t < c.time_ns; });
  if (it == s->changes.begin()) return LogicValue::X;
  return std::prev(it)->value;
}

namespace {

std::string vcd_id(std::size_t n) {
  std::string id;
  do {
    id.push_back(static_cast<char>('!' + n % 94));
    n /= 94;
  } while (n != 0);
  return id;
}

std::string vcd_name(const std::string& label) {
  std::string out = label.empty() ? "unnamed" : label;
  for (char& c : out) {
    if (c <= ' ' || c > '~') c = '_';
  }
  return out;
}

}  // namespace

std::string export_vcd(const Trace& trace) {
  std::ostringstream out;
  out << "$version dclab 1.0 $end\n";
  out << "$timescale 1ns $end\n";
  out << "$scope module top $end\n";
  for (std::size_t i = 0; i < trace.signals.size(); ++i) {
    out << "$var wire 1 " << vcd_id(i) << ' ' << vcd_name(trace.signals[i].label) << " $end\n";
  }
  out << "$upscope $end\n$enddefinitions $end\n";

  std::map<TimeNs, std::vector<std::pair<std::size_t, LogicValue>>> timeline;
  for (std::size_t i = 0; i < trace.signals.size(); ++i) {
    for (const auto& c : trace.signals[i].changes) timeline[c.time_ns].emplace_back(i, c.value);
  }
  bool first = true;
  TimeNs last = 0;
  for (const auto& [t, changes] : timeline) {
    out << '#' << t << '\n';
    if (first && t == 0) out << "$dumpvars\n";
    for (const auto& [i, v] : changes) out << to_char(v) << vcd_id(i) << '\n';
    if (first && t == 0) out << "$end\n";
    first = false;
    last = t;
  }
  if (trace.horizon_ns > last || timeline.empty()) out << '#' << trace.horizon_ns << '\n';
  return out.str();
}

void SimLog::add(LogLevel level, TimeNs t, std::string code, std::string message) {
  entries.push_back({level, t, std::move(code), std::move(message)});
}

bool SimLog::has(std::string_view code) const { return count(code) > 0; }

std::size_t SimLog::count(std::string_view code) const {
  return static_cast<std::size_t>(
      std::count_if(entries.begin(), entries.end(), [code](const LogEntry& e) { return e.code == code; }));
}

std::string SimLog::to_text() const {
  std::string out;
  for (const auto& e : entries) {
    switch (e.level) {
      case LogLevel::Info: out += "INFO "; break;
      case LogLevel::Warning: out += "WARNING "; break;
      case LogLevel::Error: out += "ERROR "; break;
    }
    out += std::to_string(e.time_ns) + " " + e.code + " " + e.message + "\n";
  }
  return out;
}

}  // namespace dclab
