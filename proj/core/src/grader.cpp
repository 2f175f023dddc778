#include "dclab/grader.hpp"

#include <algorithm>
#include <set>
#include <sstream>

#include "dclab/error.hpp"
#include "json_util.hpp"

namespace dclab {

using detail::Json;
using detail::ObjectReader;
using detail::OrderedJson;

std::string_view to_string(Verdict v) noexcept { return v == Verdict::Pass ? "PASS" : "FAIL"; }

void TestPoint::check() const {
  if (id.empty()) throw ContractError("test point has an empty id");
  if (observed.empty()) throw ContractError("test point " + id + " observes no outputs");
  if (sample_times_ns.empty()) throw ContractError("test point " + id + " has no sample times");
  for (std::size_t i = 0; i < sample_times_ns.size(); ++i) {
    if (i > 0 && sample_times_ns[i] <= sample_times_ns[i - 1]) {
      throw ContractError("test point " + id + ": sample times must increase strictly");
    }
    if (sample_times_ns[i] > stimulus.horizon_ns) {
      throw ContractError("test point " + id + ": sample time " + std::to_string(sample_times_ns[i]) +
                          " ns is past the horizon");
    }
  }
}

int score_percent(std::size_t passed, std::size_t total) {
  if (total == 0) return 0;
  return static_cast<int>((200 * passed + total) / (2 * total));
}

std::vector<TimeNs> default_sample_times(const StimulusSet& stim, TimeNs settle_ns) {
  std::set<TimeNs> times;
  for (const auto& [name, spec] : stim.assignments) {
    for (const Change& c : expand(spec, stim.horizon_ns)) {
      if (c.time_ns > settle_ns) times.insert(c.time_ns - 1);
    }
  }
  times.insert(stim.horizon_ns - 1);
  return {times.begin(), times.end()};
}

namespace {

SimConfig config_for(const TestPoint& tp, const GradeOptions& opt) {
  SimConfig cfg;
  cfg.horizon_ns = tp.stimulus.horizon_ns;
  cfg.max_deltas_per_instant = opt.max_deltas_per_instant;
  cfg.watch = WatchMode::Ports;
  return cfg;
}

std::string fault_text(const SimFault& f) {
  return f.code + " at " + std::to_string(f.time_ns) + " ns: " + f.message;
}

/// Reference trace of one test point, or ReferenceError.
Trace run_reference(const CompiledDesign& ref, const TestPoint& tp, const GradeOptions& opt) {
  for (const auto& s : tp.observed) {
    if (!ref.has_output(s)) throw ReferenceError("test point " + tp.id + ": reference has no output \"" + s + "\"");
  }
  SimResult r;
  try {
    r = ref.simulate(tp.stimulus, config_for(tp, opt));
  } catch (const ContractError& e) {
    throw ReferenceError("test point " + tp.id + ": " + e.what());
  }
  if (r.fault) throw ReferenceError("test point " + tp.id + ": reference stopped with " + fault_text(*r.fault));
  return std::move(r.trace);
}

std::vector<std::string> lines(const std::string& text) {
  std::vector<std::string> out;
  std::istringstream in(text);
  for (std::string line; std::getline(in, line);) {
    if (!line.empty()) out.push_back(line);
  }
  return out;
}

void check_list(const std::vector<TestPoint>& tps) {
  if (tps.empty()) throw ContractError("grading needs at least one test point");
  std::set<std::string> ids;
  for (const auto& tp : tps) {
    tp.check();
    if (!ids.insert(tp.id).second) throw ContractError("duplicate test point id " + tp.id);
  }
}

}  // namespace

GradeReport grade(const Design& submission, const CompiledDesign& reference, const std::vector<TestPoint>& tps,
                  const ComponentRegistry& registry, const GradeOptions& opt) {
  check_list(tps);
  GradeReport report;
  report.total = tps.size();

  std::optional<CompiledDesign> sub;
  std::string compile_error;
  try {
    sub = CompiledDesign::compile(submission, registry);
  } catch (const ContractError& e) {
    compile_error = e.what();
    report.diagnostics = lines(compile_error);
  }

  for (const auto& tp : tps) {
    Trace expected = run_reference(reference, tp, opt);
    TestPointResult res{tp.id, Verdict::Fail, std::nullopt, ""};
    if (!sub) {
      res.note = "design does not compile";
      report.per_test_point.push_back(std::move(res));
      continue;
    }
    auto missing = std::find_if(tp.observed.begin(), tp.observed.end(),
                                [&](const std::string& s) { return !sub->has_output(s); });
    if (missing != tp.observed.end()) {
      res.note = "design has no output \"" + *missing + "\"";
      report.per_test_point.push_back(std::move(res));
      continue;
    }
    SimResult actual;
    try {
      actual = sub->simulate(tp.stimulus, config_for(tp, opt));
    } catch (const ContractError& e) {
      res.note = e.what();
      report.per_test_point.push_back(std::move(res));
      continue;
    }
    if (actual.fault) {
      res.note = "simulation stopped with " + fault_text(*actual.fault);
      report.per_test_point.push_back(std::move(res));
      continue;
    }
    for (TimeNs t : tp.sample_times_ns) {
      for (const auto& s : tp.observed) {
        LogicValue e = sample(expected, reference.label(s), t);
        if (e == LogicValue::X) continue;
        LogicValue a = sample(actual.trace, sub->label(s), t);
        if (a != e) {
          res.first_mismatch = Mismatch{s, t, e, a};
          break;
        }
      }
      if (res.first_mismatch) break;
    }
    if (!res.first_mismatch) {
      res.verdict = Verdict::Pass;
      ++report.passed;
    }
    report.per_test_point.push_back(std::move(res));
  }
  report.score = score_percent(report.passed, report.total);
  return report;
}

GradeReport grade(const Design& submission, const Design& reference, const std::vector<TestPoint>& tps,
                  const ComponentRegistry& registry, const GradeOptions& opt) {
  std::optional<CompiledDesign> ref;
  try {
    ref = CompiledDesign::compile(reference, registry);
  } catch (const ContractError& e) {
    throw ReferenceError(std::string("reference: ") + e.what());
  }
  return grade(submission, *ref, tps, registry, opt);
}

void check_reference(const Design& reference, const std::vector<TestPoint>& tps, const ComponentRegistry& registry,
                     const GradeOptions& opt) {
  check_list(tps);
  std::optional<CompiledDesign> ref;
  try {
    ref = CompiledDesign::compile(reference, registry);
  } catch (const ContractError& e) {
    throw ReferenceError(std::string("reference: ") + e.what());
  }
  for (const auto& tp : tps) run_reference(*ref, tp, opt);
}

// --- file formats ------------------------------------------------------------------

std::vector<TestPoint> deserialize_test_points(std::string_view bytes) {
  Json doc = detail::parse_json(bytes);
  ObjectReader r(doc, "");
  std::int64_t version = r.integer("format_version");
  if (version != 1) throw FormatError("unsupported format_version " + std::to_string(version), "/format_version");
  const Json& list = r.array("test_points");
  std::vector<TestPoint> out;
  for (std::size_t i = 0; i < list.size(); ++i) {
    std::string path = detail::child_path("/test_points", i);
    ObjectReader t(list[i], path);
    TestPoint tp;
    tp.id = t.string("id");
    tp.stimulus = detail::stimulus_from_json(t.object("stimulus"), t.path("stimulus"));
    const Json& observed = t.array("observed");
    for (std::size_t k = 0; k < observed.size(); ++k) {
      tp.observed.push_back(detail::expect_string(observed[k], detail::child_path(t.path("observed"), k)));
    }
    const Json* times = t.optional("sample_times_ns");
    const Json* settle = t.optional("settle_ns");
    if (times != nullptr && settle != nullptr) {
      throw FormatError("give either sample_times_ns or settle_ns, not both", t.path("settle_ns"));
    }
    if (times != nullptr) {
      const Json& arr = detail::expect_array(*times, t.path("sample_times_ns"));
      for (std::size_t k = 0; k < arr.size(); ++k) {
        std::int64_t v = detail::expect_integer(arr[k], detail::child_path(t.path("sample_times_ns"), k));
        if (v < 0) throw FormatError("sample time must not be negative", detail::child_path(t.path("sample_times_ns"), k));
        tp.sample_times_ns.push_back(static_cast<TimeNs>(v));
      }
    } else {
      std::int64_t s = settle != nullptr ? detail::expect_integer(*settle, t.path("settle_ns")) : 0;
      if (s < 0) throw FormatError("settle_ns must not be negative", t.path("settle_ns"));
      tp.sample_times_ns = default_sample_times(tp.stimulus, static_cast<TimeNs>(s));
    }
    t.finish();
    try {
      tp.check();
    } catch (const ContractError& e) {
      throw FormatError(e.what(), path);
    }
    out.push_back(std::move(tp));
  }
  r.finish();
  return out;
}

std::string serialize_test_points(const std::vector<TestPoint>& tps) {
  OrderedJson doc;
  doc["format_version"] = 1;
  OrderedJson list = OrderedJson::array();
  for (const auto& tp : tps) {
    OrderedJson j;
    j["id"] = tp.id;
    j["stimulus"] = OrderedJson::parse(detail::stimulus_to_json(tp.stimulus).dump());
    j["observed"] = tp.observed;
    j["sample_times_ns"] = tp.sample_times_ns;
    list.push_back(std::move(j));
  }
  doc["test_points"] = std::move(list);
  return doc.dump(2) + "\n";
}

std::string grade_report_json(const GradeReport& r) {
  OrderedJson doc;
  OrderedJson list = OrderedJson::array();
  for (const auto& tp : r.per_test_point) {
    OrderedJson j;
    j["id"] = tp.id;
    j["verdict"] = to_string(tp.verdict);
    if (tp.first_mismatch) {
      const auto& m = *tp.first_mismatch;
      j["first_mismatch"] = {{"signal", m.signal},
                             {"time_ns", m.time_ns},
                             {"expected", to_string(m.expected)},
                             {"actual", to_string(m.actual)}};
    } else {
      j["first_mismatch"] = nullptr;
    }
    if (!tp.note.empty()) j["note"] = tp.note;
    list.push_back(std::move(j));
  }
  doc["per_test_point"] = std::move(list);
  doc["passed"] = r.passed;
  doc["total"] = r.total;
  doc["score"] = r.score;
  doc["diagnostics"] = r.diagnostics;
  return doc.dump(2) + "\n";
}

GradeReport parse_grade_report(std::string_view bytes) {
  Json doc = detail::parse_json(bytes);
  ObjectReader r(doc, "");
  GradeReport out;
  const Json& list = r.array("per_test_point");
  for (std::size_t i = 0; i < list.size(); ++i) {
    ObjectReader t(list[i], detail::child_path("/per_test_point", i));
    TestPointResult res;
    res.id = t.string("id");
    std::string verdict = t.string("verdict");
    if (verdict != "PASS" && verdict != "FAIL") throw FormatError("verdict must be PASS or FAIL", t.path("verdict"));
    res.verdict = verdict == "PASS" ? Verdict::Pass : Verdict::Fail;
    const Json& m = t.required("first_mismatch");
    if (!m.is_null()) {
      ObjectReader mr(m, t.path("first_mismatch"));
      Mismatch mm;
      mm.signal = mr.string("signal");
      mm.time_ns = static_cast<TimeNs>(mr.integer("time_ns"));
      mm.expected = detail::expect_logic(mr.required("expected"), mr.path("expected"));
      mm.actual = detail::expect_logic(mr.required("actual"), mr.path("actual"));
      mr.finish();
      res.first_mismatch = mm;
    }
    if (const Json* note = t.optional("note")) res.note = detail::expect_string(*note, t.path("note"));
    t.finish();
    out.per_test_point.push_back(std::move(res));
  }
  out.passed = static_cast<std::size_t>(r.integer("passed"));
  out.total = static_cast<std::size_t>(r.integer("total"));
  out.score = static_cast<int>(r.integer("score"));
  const Json& diags = r.array("diagnostics");
  for (std::size_t i = 0; i < diags.size(); ++i) {
    out.diagnostics.push_back(detail::expect_string(diags[i], detail::child_path("/diagnostics", i)));
  }
  r.finish();
  return out;
}

}  // namespace dclab
