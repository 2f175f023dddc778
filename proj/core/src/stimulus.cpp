#include "dclab/stimulus.hpp"

#include <cmath>

#include "dclab/error.hpp"
#include "json_util.hpp"

namespace dclab {

using detail::Json;
using detail::ObjectReader;

SignalSpec SignalSpec::constant(LogicValue v) {
  SignalSpec s;
  s.kind = SignalKind::Constant;
  s.value = v;
  return s;
}

SignalSpec SignalSpec::clock(double freq_hz, double duty, TimeNs phase_ns) {
  SignalSpec s;
  s.kind = SignalKind::Clock;
  s.freq_hz = freq_hz;
  s.duty = duty;
  s.phase_ns = phase_ns;
  return s;
}

SignalSpec SignalSpec::pattern(ChangeList edges) {
  SignalSpec s;
  s.kind = SignalKind::Pattern;
  s.edges = std::move(edges);
  return s;
}

TimeNs clock_period_ns(const SignalSpec& clock) {
  return static_cast<TimeNs>(std::llround(1e9 / clock.freq_hz));
}

TimeNs clock_high_ns(const SignalSpec& clock) {
  return static_cast<TimeNs>(std::llround(clock.duty * static_cast<double>(clock_period_ns(clock))));
}

void SignalSpec::check() const {
  switch (kind) {
    case SignalKind::Constant: return;
    case SignalKind::Clock: {
      if (!(freq_hz > 0.0) || !std::isfinite(freq_hz)) throw FormatError("freq_hz must be positive", "/freq_hz");
      if (1e9 / freq_hz > 9.0e18) throw FormatError("freq_hz too small", "/freq_hz");
      if (!(duty > 0.0 && duty < 1.0)) throw FormatError("duty must lie in (0, 1)", "/duty");
      TimeNs period = clock_period_ns(*this);
      if (period < 2) throw FormatError("clock period must be at least 2 ns", "/freq_hz");
      TimeNs high = clock_high_ns(*this);
      if (high < 1 || high >= period) {
        throw FormatError("duty * period must leave at least 1 ns high and 1 ns low", "/duty");
      }
      return;
    }
    case SignalKind::Pattern: {
      if (edges.empty() || edges.front().time_ns != 0) {
        throw FormatError("pattern must start at time 0", "/edges");
      }
      for (std::size_t i = 1; i < edges.size(); ++i) {
        if (edges[i].time_ns <= edges[i - 1].time_ns) {
          throw FormatError("pattern times must strictly increase", "/edges/" + std::to_string(i));
        }
      }
      return;
    }
  }
}

namespace {

void push_change(ChangeList& out, TimeNs t, LogicValue v) {
  if (!out.empty()) {
    if (out.back().value == v) return;
    if (out.back().time_ns == t) {
      out.back().value = v;
      if (out.size() >= 2 && out[out.size() - 2].value == v) out.pop_back();
      return;
    }
  }
  out.push_back({t, v});
}

}  // namespace

ChangeList expand(const SignalSpec& spec, TimeNs horizon_ns) {
  if (horizon_ns == 0) throw ContractError("expand: horizon must be positive");
  spec.check();
  ChangeList out;
  switch (spec.kind) {
    case SignalKind::Constant:
      out.push_back({0, spec.value});
      break;
    case SignalKind::Clock: {
      const TimeNs period = clock_period_ns(spec);
      const TimeNs high = clock_high_ns(spec);
      const TimeNs low = period - high;
      out.push_back({0, LogicValue::Zero});
      for (TimeNs start = spec.phase_ns;; start += period) {
        TimeNs rise = start + low;
        if (rise >= horizon_ns) break;
        push_change(out, rise, LogicValue::One);
        TimeNs fall = start + period;
        if (fall >= horizon_ns) break;
        push_change(out, fall, LogicValue::Zero);
      }
      break;
    }
    case SignalKind::Pattern:
      for (const Change& c : spec.edges) {
        if (c.time_ns >= horizon_ns) break;
        push_change(out, c.time_ns, c.value);
      }
      break;
  }
  return out;
}

namespace {

std::string_view kind_name(SignalKind k) {
  switch (k) {
    case SignalKind::Constant: return "CONSTANT";
    case SignalKind::Clock: return "CLOCK";
    case SignalKind::Pattern: return "PATTERN";
  }
  return "CONSTANT";
}

Json number_json(double v) {
  if (std::floor(v) == v && std::fabs(v) < 9.0e15) return Json(static_cast<std::int64_t>(v));
  return Json(v);
}

Json spec_to_json(const SignalSpec& s) {
  Json j = Json::object();
  j["kind"] = kind_name(s.kind);
  switch (s.kind) {
    case SignalKind::Constant:
      j["value"] = to_string(s.value);
      break;
    case SignalKind::Clock:
      j["freq_hz"] = number_json(s.freq_hz);
      j["duty"] = number_json(s.duty);
      j["phase_ns"] = s.phase_ns;
      break;
    case SignalKind::Pattern: {
      Json edges = Json::array();
      for (const Change& c : s.edges) edges.push_back(Json::array({c.time_ns, to_string(c.value)}));
      j["edges"] = std::move(edges);
      break;
    }
  }
  return j;
}

SignalSpec spec_from_json(const Json& j, const std::string& path) {
  ObjectReader r(j, path);
  std::string kind = r.string("kind");
  SignalSpec s;
  if (kind == "CONSTANT") {
    s = SignalSpec::constant(detail::expect_logic(r.required("value"), r.path("value")));
  } else if (kind == "CLOCK") {
    double freq = r.number("freq_hz");
    if (!(freq > 0.0)) throw FormatError("freq_hz must be positive", r.path("freq_hz"));
    double duty = 0.5;
    if (const Json* d = r.optional("duty")) duty = detail::expect_number(*d, r.path("duty"));
    std::int64_t phase = 0;
    if (const Json* p = r.optional("phase_ns")) phase = detail::expect_integer(*p, r.path("phase_ns"));
    if (phase < 0) throw FormatError("phase_ns must be non-negative", r.path("phase_ns"));
    s = SignalSpec::clock(freq, duty, static_cast<TimeNs>(phase));
  } else if (kind == "PATTERN") {
    const Json& edges = r.array("edges");
    ChangeList list;
    for (std::size_t i = 0; i < edges.size(); ++i) {
      std::string ep = detail::child_path(r.path("edges"), i);
      const Json& e = edges[i];
      if (!e.is_array() || e.size() != 2) throw FormatError("expected [time_ns, value]", ep);
      std::int64_t t = detail::expect_integer(e[0], ep + "/0");
      if (t < 0) throw FormatError("time must be non-negative", ep + "/0");
      list.push_back({static_cast<TimeNs>(t), detail::expect_logic(e[1], ep + "/1")});
    }
    s = SignalSpec::pattern(std::move(list));
  } else {
    throw FormatError("unknown signal kind \"" + kind + "\"", r.path("kind"));
  }
  r.finish();
  try {
    s.check();
  } catch (const FormatError& e) {
    throw FormatError(e.reason(), path + e.path());
  }
  return s;
}

}  // namespace

namespace detail {

Json stimulus_to_json(const StimulusSet& s) {
  Json j = Json::object();
  j["format_version"] = 1;
  j["horizon_ns"] = s.horizon_ns;
  Json a = Json::object();
  for (const auto& [name, spec] : s.assignments) a[name] = spec_to_json(spec);
  j["assignments"] = std::move(a);
  return j;
}

StimulusSet stimulus_from_json(const Json& doc, const std::string& path) {
  ObjectReader r(doc, path);
  std::int64_t version = r.integer("format_version");
  if (version != 1) {
    throw FormatError("unsupported format_version " + std::to_string(version), r.path("format_version"));
  }
  StimulusSet s;
  std::int64_t horizon = r.integer("horizon_ns");
  if (horizon <= 0) throw FormatError("horizon_ns must be positive", r.path("horizon_ns"));
  s.horizon_ns = static_cast<TimeNs>(horizon);
  const Json& a = r.object("assignments");
  for (auto it = a.begin(); it != a.end(); ++it) {
    s.assignments.emplace(it.key(), spec_from_json(it.value(), detail::child_path(r.path("assignments"), it.key())));
  }
  r.finish();
  return s;
}

}  // namespace detail

std::string serialize_stimulus(const StimulusSet& s) { return detail::stimulus_to_json(s).dump(2) + "\n"; }

StimulusSet deserialize_stimulus(std::string_view bytes) {
  return detail::stimulus_from_json(detail::parse_json(bytes), "");
}

}  // namespace dclab
