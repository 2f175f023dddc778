#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "dclab/design.hpp"
#include "dclab/error.hpp"
#include "dclab/stimulus.hpp"

namespace dclab {

struct TestPoint {
  std::string id;
  StimulusSet stimulus;
  std::vector<std::string> observed;      // top output names
  std::vector<TimeNs> sample_times_ns;    // strictly increasing, each <= horizon

  /// Throws ContractError when an invariant fails.
  void check() const;
};

struct Mismatch {
  std::string signal;
  TimeNs time_ns = 0;
  LogicValue expected = LogicValue::X;
  LogicValue actual = LogicValue::X;

  friend bool operator==(const Mismatch&, const Mismatch&) = default;
};

enum class Verdict { Pass, Fail };

struct TestPointResult {
  std::string id;
  Verdict verdict = Verdict::Fail;
  std::optional<Mismatch> first_mismatch;
  std::string note;  // why a FAIL has no mismatch (fault, missing port, ...)

  friend bool operator==(const TestPointResult&, const TestPointResult&) = default;
};

struct GradeReport {
  std::vector<TestPointResult> per_test_point;
  std::size_t passed = 0;
  std::size_t total = 0;
  int score = 0;  // round-half-up(100 * passed / total)
  std::vector<std::string> diagnostics;

  friend bool operator==(const GradeReport&, const GradeReport&) = default;
};

/// The reference design failed to compile or simulate: an instructor
/// configuration problem, not a student failure.
class ReferenceError : public Error {
 public:
  using Error::Error;
};

struct GradeOptions {
  std::uint32_t max_deltas_per_instant = 1000;
};

/// round(100 * passed / total), halves rounded up.
int score_percent(std::size_t passed, std::size_t total);

/// Simulates both designs under every test point and compares the observed
/// outputs at the sample times. X in the reference matches anything.
/// Throws ContractError for an empty or malformed test point list and
/// ReferenceError when the reference misbehaves.
GradeReport grade(const Design& submission, const Design& reference, const std::vector<TestPoint>& tps,
                  const ComponentRegistry& registry, const GradeOptions& opt = {});

/// Grades against an already compiled reference (the service keeps one per
/// assignment).
GradeReport grade(const Design& submission, const CompiledDesign& reference, const std::vector<TestPoint>& tps,
                  const ComponentRegistry& registry, const GradeOptions& opt = {});

/// Runs the reference alone and throws ReferenceError naming the first test
/// point it cannot serve (missing output, fault, compile error).
void check_reference(const Design& reference, const std::vector<TestPoint>& tps, const ComponentRegistry& registry,
                     const GradeOptions& opt = {});

/// One sample 1 ns before every input change later than `settle_ns`, plus
/// one at horizon - 1; sorted, deduplicated.
std::vector<TimeNs> default_sample_times(const StimulusSet& stim, TimeNs settle_ns);

// --- file formats ------------------------------------------------------------------

/// {"format_version": 1, "test_points": [{"id", "stimulus", "observed",
/// "sample_times_ns" | "settle_ns"}]}. Without sample_times_ns the times come
/// from default_sample_times. Throws FormatError.
std::vector<TestPoint> deserialize_test_points(std::string_view bytes);
std::string serialize_test_points(const std::vector<TestPoint>& tps);

/// Deterministic JSON (2-space indent).
std::string grade_report_json(const GradeReport& r);
GradeReport parse_grade_report(std::string_view bytes);

std::string_view to_string(Verdict v) noexcept;

}  // namespace dclab
