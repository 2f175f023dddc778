#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "dclab/design.hpp"
#include "dclab/error.hpp"
#include "dclab/grader.hpp"
#include "dclab/service/config.hpp"

namespace dclab::service {

using Id = std::int64_t;
/// Milliseconds since the Unix epoch, UTC.
using Millis = std::int64_t;

enum class Role { Student, Instructor };
enum class Column { Attention, Homework, Playground, Example };
enum class RequiredRepr { Netlist, Vhdl, Either };

std::string_view to_string(Role r) noexcept;
std::string_view to_string(Column c) noexcept;
std::string_view to_string(RequiredRepr r) noexcept;

/// Failure reported to API clients as {code, message} with an HTTP status.
class ServiceError : public Error {
 public:
  ServiceError(int status, std::string code, const std::string& message)
      : Error(message), status_(status), code_(std::move(code)) {}

  int status() const noexcept { return status_; }
  const std::string& code() const noexcept { return code_; }

 private:
  int status_;
  std::string code_;
};

struct User {
  Id id = 0;
  std::string name;
  Role role = Role::Student;
};

struct Project {
  Id id = 0;
  Id owner = 0;
  Column column = Column::Playground;
  Repr repr = Repr::Netlist;
  std::string title;
  std::string design;    // design payload JSON, empty for a fresh project
  std::string stimulus;  // stimulus JSON, empty when unset
  Millis created_at = 0;
  Millis updated_at = 0;
  std::optional<Id> assignment_id;
  bool visible = false;  // EXAMPLE projects only
};

struct Assignment {
  Id id = 0;
  std::string title;
  Id author = 0;
  Id reference_project = 0;
  std::string reference_design;  // snapshot taken when the assignment is posted
  std::vector<TestPoint> test_points;
  RequiredRepr required = RequiredRepr::Either;
  Millis deadline = 0;
  Millis posted_at = 0;
  std::vector<Id> roster;
};

struct Submission {
  Id id = 0;
  Id project_id = 0;
  Id submitter = 0;
  Millis submitted_at = 0;
  std::string design;
  std::string status;  // GRADED, SIMULATED, REJECTED (payload unusable)
  std::optional<GradeReport> report;
  std::optional<std::string> trace_blob;  // sha256 of the VCD
  std::string log_blob;                   // sha256 of the log text
};

struct Notice {
  Id id = 0;
  Id author = 0;
  std::string author_name;
  std::string title;
  std::string body;
  Millis posted_at = 0;
};

struct HomeView {
  std::vector<Notice> attention;
  std::vector<Project> homework;
  std::vector<Project> playground;
  std::vector<Project> example;
};

struct StatisticsRecord {
  Id student = 0;
  std::string name;
  std::size_t submission_count = 0;
  std::vector<Millis> submission_times;
  std::vector<int> submission_scores;
  int final_score = 0;  // best score submitted at or before the deadline

  friend bool operator==(const StatisticsRecord&, const StatisticsRecord&) = default;
};

struct CohortStats {
  Id assignment = 0;
  std::vector<StatisticsRecord> students;
  std::size_t roster_size = 0;
  std::size_t submitted_count = 0;
  std::size_t solved_count = 0;
  /// submissions up to and including the first full score -> number of solvers
  std::map<std::size_t, std::size_t> tries_before_success;
  std::array<std::size_t, 24> hourly{};  // course-local hour of day
  std::size_t total_submissions = 0;
  std::string timezone;

  friend bool operator==(const CohortStats&, const CohortStats&) = default;
};

/// Aggregates from per-student records; shared by the service and its tests.
CohortStats summarize(Id assignment, std::vector<StatisticsRecord> records, int utc_offset_minutes,
                      std::string timezone);

/// final_score rule: max score among submissions at or before the deadline, 0
/// if there are none.
int final_score(const std::vector<Millis>& times, const std::vector<int>& scores, Millis deadline);

/// Result of an ad-hoc simulation.
struct SimulationView {
  SimResult result;
  std::string vcd;
};

class Store;
class BlobStore;

/// The management module: accounts, the four home columns, notices,
/// homework, submissions, statistics.
class Service {
 public:
  using Clock = std::function<Millis()>;

  Service(ServiceConfig cfg, const ComponentRegistry& registry, Clock clock = {});
  ~Service();
  Service(const Service&) = delete;
  Service& operator=(const Service&) = delete;

  const ServiceConfig& config() const noexcept { return cfg_; }
  Millis now() const { return clock_(); }

  // accounts
  /// `caller` may be null only while the store has no users (bootstrap).
  User create_user(const User* caller, const std::string& name, Role role, const std::string& password);
  /// Fresh bearer token; throws UNAUTHORIZED.
  std::string login(const std::string& name, const std::string& password);
  User authenticate(const std::string& token);
  std::vector<User> list_users(const User& caller);
  std::size_t user_count();

  // home page
  HomeView home(const User& caller);
  Notice post_notice(const User& caller, const std::string& title, const std::string& body);

  // projects
  Project create_project(const User& caller, Column column, const std::string& title, Repr repr,
                         const std::string& design, const std::string& stimulus);
  Project get_project(const User& caller, Id id);
  Project update_project(const User& caller, Id id, const std::optional<std::string>& title,
                         const std::optional<std::string>& design, const std::optional<std::string>& stimulus);
  Project set_example_visibility(const User& caller, Id id, bool visible);

  // homework
  Id post_assignment(const User& caller, const std::string& title, Id reference_project,
                     const std::vector<TestPoint>& tps, RequiredRepr required, Millis deadline,
                     const std::vector<Id>& roster);
  Assignment get_assignment(const User& caller, Id id);
  CohortStats assignment_stats(const User& caller, Id id);

  // submissions
  /// `design` empty: submit the project's current design. `stimulus` only
  /// matters for playground projects (default: the project's stimulus).
  Submission submit(const User& caller, Id project, const std::string& design, const std::string& stimulus);
  std::vector<Submission> submission_history(const User& caller, Id project);
  Submission get_submission(const User& caller, Id id);
  std::optional<std::string> submission_trace(const User& caller, Id id);
  std::string submission_log(const User& caller, Id id);

  /// Ad-hoc run backing the interactive editor; nothing is stored.
  SimulationView simulate(const User& caller, const std::string& design, const std::string& stimulus,
                          WatchMode watch);

  /// Test hook: called after each roster project is written inside the
  /// post_assignment transaction; throwing aborts the whole fan-out.
  void set_fanout_hook(std::function<void(std::size_t written)> hook) { fanout_hook_ = std::move(hook); }

  /// Statistics recomputed in C++ from the raw submission rows, independent of
  /// the SQL aggregation behind assignment_stats (rebuild check).
  CohortStats rebuild_stats(Id assignment);

 private:
  Project require_project(Id id);
  void require_instructor(const User& caller, const char* what) const;
  CohortStats compute_stats(const Assignment& a);
  std::string put_blob(const std::string& data);

  ServiceConfig cfg_;
  const ComponentRegistry& registry_;
  Clock clock_;
  int utc_offset_ = 0;
  std::unique_ptr<Store> store_;
  std::unique_ptr<BlobStore> blobs_;
  std::mutex mutex_;
  std::function<void(std::size_t)> fanout_hook_;
};

// --- payloads ------------------------------------------------------------------------

/// {"repr": "NETLIST", "netlist": {...}} or
/// {"repr": "VHDL", "files": [{"name", "text"}], "top": "..."?}.
/// Throws FormatError.
Design parse_design_payload(const std::string& json);
std::string design_payload(const Design& d);

/// ISO 8601 with milliseconds and "Z".
std::string format_time(Millis t);
/// Accepts "YYYY-MM-DDTHH:MM[:SS[.fff]]" followed by "Z" or "+hh:mm".
/// Throws FormatError.
Millis parse_time(const std::string& s);

}  // namespace dclab::service
