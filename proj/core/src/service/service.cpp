#include "dclab/service/service.hpp"

#include <algorithm>
#include <array>
#include <chrono>
#include <cstdio>
#include <map>
#include <set>

#include <openssl/evp.h>
#include <openssl/rand.h>

#include "../json_util.hpp"
#include "store.hpp"

namespace dclab::service {

using detail::Json;
using detail::ObjectReader;

std::string_view to_string(Role r) noexcept { return r == Role::Instructor ? "INSTRUCTOR" : "STUDENT"; }

std::string_view to_string(Column c) noexcept {
  switch (c) {
    case Column::Attention: return "ATTENTION";
    case Column::Homework: return "HOMEWORK";
    case Column::Playground: return "PLAYGROUND";
    case Column::Example: return "EXAMPLE";
  }
  return "PLAYGROUND";
}

std::string_view to_string(RequiredRepr r) noexcept {
  switch (r) {
    case RequiredRepr::Netlist: return "NETLIST";
    case RequiredRepr::Vhdl: return "VHDL";
    case RequiredRepr::Either: return "EITHER";
  }
  return "EITHER";
}

namespace {

Role role_from(const std::string& s) { return s == "INSTRUCTOR" ? Role::Instructor : Role::Student; }

Column column_from(const std::string& s) {
  if (s == "ATTENTION") return Column::Attention;
  if (s == "HOMEWORK") return Column::Homework;
  if (s == "EXAMPLE") return Column::Example;
  return Column::Playground;
}

RequiredRepr required_from(const std::string& s) {
  if (s == "NETLIST") return RequiredRepr::Netlist;
  if (s == "VHDL") return RequiredRepr::Vhdl;
  return RequiredRepr::Either;
}

Repr repr_from(const std::string& s) { return s == "VHDL" ? Repr::Vhdl : Repr::Netlist; }

[[noreturn]] void forbidden(const std::string& msg) { throw ServiceError(403, "FORBIDDEN", msg); }
[[noreturn]] void not_found(const std::string& what) { throw ServiceError(404, "NOT_FOUND", what + " not found"); }
[[noreturn]] void bad_request(const std::string& code, const std::string& msg) {
  throw ServiceError(400, code, msg);
}

std::string hex(const unsigned char* p, std::size_t n) {
  static const char* digits = "0123456789abcdef";
  std::string out;
  out.reserve(n * 2);
  for (std::size_t i = 0; i < n; ++i) {
    out += digits[p[i] >> 4];
    out += digits[p[i] & 15];
  }
  return out;
}

std::string random_hex(std::size_t bytes) {
  std::vector<unsigned char> buf(bytes);
  if (RAND_bytes(buf.data(), static_cast<int>(buf.size())) != 1) throw Error("no randomness available");
  return hex(buf.data(), buf.size());
}

constexpr int kPbkdf2Iterations = 60000;

std::string password_hash(const std::string& password, const std::string& salt) {
  std::array<unsigned char, 32> out{};
  if (PKCS5_PBKDF2_HMAC(password.data(), static_cast<int>(password.size()),
                        reinterpret_cast<const unsigned char*>(salt.data()), static_cast<int>(salt.size()),
                        kPbkdf2Iterations, EVP_sha256(), static_cast<int>(out.size()), out.data()) != 1) {
    throw Error("password hashing failed");
  }
  return hex(out.data(), out.size());
}

bool constant_time_equal(const std::string& a, const std::string& b) {
  if (a.size() != b.size()) return false;
  unsigned char diff = 0;
  for (std::size_t i = 0; i < a.size(); ++i) diff |= static_cast<unsigned char>(a[i] ^ b[i]);
  return diff == 0;
}

Millis system_now() {
  using namespace std::chrono;
  return duration_cast<milliseconds>(system_clock::now().time_since_epoch()).count();
}

// Civil date <-> day count (proleptic Gregorian, days since 1970-01-01).
std::int64_t days_from_civil(std::int64_t y, unsigned m, unsigned d) {
  y -= m <= 2;
  const std::int64_t era = (y >= 0 ? y : y - 399) / 400;
  const auto yoe = static_cast<unsigned>(y - era * 400);
  const unsigned doy = (153 * (m > 2 ? m - 3 : m + 9) + 2) / 5 + d - 1;
  const unsigned doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
  return era * 146097 + static_cast<std::int64_t>(doe) - 719468;
}

void civil_from_days(std::int64_t z, std::int64_t& y, unsigned& m, unsigned& d) {
  z += 719468;
  const std::int64_t era = (z >= 0 ? z : z - 146096) / 146097;
  const auto doe = static_cast<unsigned>(z - era * 146097);
  const unsigned yoe = (doe - doe / 1460 + doe / 36524 - doe / 146096) / 365;
  y = static_cast<std::int64_t>(yoe) + era * 400;
  const unsigned doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
  const unsigned mp = (5 * doy + 2) / 153;
  d = doy - (153 * mp + 2) / 5 + 1;
  m = mp < 10 ? mp + 3 : mp - 9;
  y += m <= 2;
}

std::int64_t floor_div(std::int64_t a, std::int64_t b) {
  std::int64_t q = a / b;
  if ((a % b != 0) && ((a < 0) != (b < 0))) --q;
  return q;
}

std::size_t local_hour(Millis t, int utc_offset_minutes) {
  std::int64_t local = t + static_cast<std::int64_t>(utc_offset_minutes) * 60'000;
  std::int64_t ms_of_day = local - floor_div(local, 86'400'000) * 86'400'000;
  return static_cast<std::size_t>(ms_of_day / 3'600'000);
}

}  // namespace

std::string format_time(Millis t) {
  std::int64_t days = floor_div(t, 86'400'000);
  std::int64_t rem = t - days * 86'400'000;
  std::int64_t y = 0;
  unsigned m = 0;
  unsigned d = 0;
  civil_from_days(days, y, m, d);
  char buf[64];
  std::snprintf(buf, sizeof buf, "%04lld-%02u-%02uT%02lld:%02lld:%02lld.%03lldZ", static_cast<long long>(y), m, d,
                static_cast<long long>(rem / 3'600'000), static_cast<long long>(rem / 60'000 % 60),
                static_cast<long long>(rem / 1000 % 60), static_cast<long long>(rem % 1000));
  return buf;
}

Millis parse_time(const std::string& s) {
  auto bad = [&]() -> FormatError { return FormatError("bad timestamp \"" + s + "\"", ""); };
  std::size_t pos = 0;
  auto digits = [&](std::size_t n) {
    if (pos + n > s.size()) throw bad();
    std::int64_t v = 0;
    for (std::size_t i = 0; i < n; ++i) {
      char c = s[pos + i];
      if (c < '0' || c > '9') throw bad();
      v = v * 10 + (c - '0');
    }
    pos += n;
    return v;
  };
  auto expect = [&](char c) {
    if (pos >= s.size() || s[pos] != c) throw bad();
    ++pos;
  };
  std::int64_t y = digits(4);
  expect('-');
  std::int64_t mo = digits(2);
  expect('-');
  std::int64_t d = digits(2);
  expect('T');
  std::int64_t h = digits(2);
  expect(':');
  std::int64_t mi = digits(2);
  std::int64_t sec = 0;
  std::int64_t ms = 0;
  if (pos < s.size() && s[pos] == ':') {
    ++pos;
    sec = digits(2);
    if (pos < s.size() && s[pos] == '.') {
      ++pos;
      std::size_t start = pos;
      std::int64_t frac = 0;
      while (pos < s.size() && s[pos] >= '0' && s[pos] <= '9') {
        if (pos - start < 3) frac = frac * 10 + (s[pos] - '0');
        ++pos;
      }
      if (pos == start) throw bad();
      for (std::size_t i = pos - start; i < 3; ++i) frac *= 10;
      ms = frac;
    }
  }
  if (mo < 1 || mo > 12 || d < 1 || d > 31 || h > 23 || mi > 59 || sec > 60) throw bad();
  std::int64_t offset_min = 0;
  if (pos < s.size() && s[pos] == 'Z') {
    ++pos;
  } else if (pos < s.size() && (s[pos] == '+' || s[pos] == '-')) {
    int sign = s[pos] == '-' ? -1 : 1;
    ++pos;
    std::int64_t oh = digits(2);
    expect(':');
    std::int64_t om = digits(2);
    offset_min = sign * (oh * 60 + om);
  } else {
    throw bad();
  }
  if (pos != s.size()) throw bad();
  std::int64_t days = days_from_civil(y, static_cast<unsigned>(mo), static_cast<unsigned>(d));
  return ((days * 24 + h) * 60 + mi - offset_min) * 60'000 + sec * 1000 + ms;
}

// --- payloads ------------------------------------------------------------------------

Design parse_design_payload(const std::string& json) {
  Json doc = detail::parse_json(json);
  ObjectReader r(doc, "");
  std::string repr = r.string("repr");
  if (repr == "NETLIST") {
    const Json& netlist = r.object("netlist");
    r.finish();
    try {
      return deserialize_circuit(netlist.dump());
    } catch (const FormatError& e) {
      throw FormatError(e.reason(), "/netlist" + e.path());
    }
  }
  if (repr == "VHDL") {
    VhdlSource src;
    const Json& files = r.array("files");
    for (std::size_t i = 0; i < files.size(); ++i) {
      std::string path = detail::child_path("/files", i);
      ObjectReader f(files[i], path);
      vhdl::VhdlUnit u;
      u.source_name = f.string("name");
      u.text = f.string("text");
      f.finish();
      src.units.push_back(std::move(u));
    }
    if (src.units.empty()) throw FormatError("a VHDL design needs at least one file", "/files");
    if (const Json* top = r.optional("top")) src.top = detail::expect_string(*top, "/top");
    r.finish();
    return src;
  }
  throw FormatError("repr must be NETLIST or VHDL", "/repr");
}

std::string design_payload(const Design& d) {
  detail::OrderedJson j;
  j["repr"] = std::string(to_string(repr_of(d)));
  if (const auto* c = std::get_if<Circuit>(&d)) {
    j["netlist"] = detail::OrderedJson::parse(serialize_circuit(*c));
  } else {
    const auto& src = std::get<VhdlSource>(d);
    j["files"] = detail::OrderedJson::array();
    for (const auto& u : src.units) {
      j["files"].push_back({{"name", u.source_name}, {"text", u.text}});
    }
    if (!src.top.empty()) j["top"] = src.top;
  }
  return j.dump();
}

// --- statistics ----------------------------------------------------------------------

int final_score(const std::vector<Millis>& times, const std::vector<int>& scores, Millis deadline) {
  int best = 0;
  for (std::size_t i = 0; i < times.size() && i < scores.size(); ++i) {
    if (times[i] <= deadline) best = std::max(best, scores[i]);
  }
  return best;
}

CohortStats summarize(Id assignment, std::vector<StatisticsRecord> records, int utc_offset_minutes,
                      std::string timezone) {
  CohortStats out;
  out.assignment = assignment;
  out.roster_size = records.size();
  out.timezone = std::move(timezone);
  for (const auto& r : records) {
    out.total_submissions += r.submission_count;
    if (r.submission_count > 0) ++out.submitted_count;
    for (Millis t : r.submission_times) ++out.hourly[local_hour(t, utc_offset_minutes)];
    auto first_full = std::find(r.submission_scores.begin(), r.submission_scores.end(), 100);
    if (first_full != r.submission_scores.end()) {
      ++out.solved_count;
      ++out.tries_before_success[static_cast<std::size_t>(first_full - r.submission_scores.begin()) + 1];
    }
  }
  out.students = std::move(records);
  return out;
}

// --- service -------------------------------------------------------------------------

Service::Service(ServiceConfig cfg, const ComponentRegistry& registry, Clock clock)
    : cfg_(std::move(cfg)), registry_(registry), clock_(clock ? std::move(clock) : Clock(system_now)) {
  utc_offset_ = parse_utc_offset(cfg_.timezone);
  store_ = std::make_unique<Store>(cfg_.store_path);
  blobs_ = std::make_unique<BlobStore>(*store_, cfg_.blob_dir);
  if (!cfg_.admin_name.empty() && user_count() == 0) {
    if (cfg_.admin_password.empty()) throw Error("admin_name is set but admin_password is empty");
    create_user(nullptr, cfg_.admin_name, Role::Instructor, cfg_.admin_password);
  }
}

Service::~Service() = default;

void Service::require_instructor(const User& caller, const char* what) const {
  if (caller.role != Role::Instructor) forbidden(std::string("only instructors may ") + what);
}

std::size_t Service::user_count() {
  std::lock_guard lock(mutex_);
  Stmt s = store_->prepare("SELECT COUNT(*) FROM users");
  s.step();
  return static_cast<std::size_t>(s.integer(0));
}

User Service::create_user(const User* caller, const std::string& name, Role role, const std::string& password) {
  if (name.empty() || name.size() > 64 ||
      name.find_first_not_of("abcdefghijklmnopqrstuvwxyzABCDEFGHIJKLMNOPQRSTUVWXYZ0123456789_.-") !=
          std::string::npos) {
    bad_request("BAD_NAME", "user names use letters, digits, '_', '.', '-' (1 to 64 characters)");
  }
  if (password.size() < 6) bad_request("WEAK_PASSWORD", "passwords need at least 6 characters");
  std::string salt = random_hex(16);
  std::string hash = password_hash(password, salt);
  std::lock_guard lock(mutex_);
  if (caller == nullptr) {
    Stmt s = store_->prepare("SELECT COUNT(*) FROM users");
    s.step();
    if (s.integer(0) != 0) forbidden("accounts are created by instructors");
  } else {
    require_instructor(*caller, "create accounts");
  }
  {
    Stmt s = store_->prepare("SELECT 1 FROM users WHERE name = ?");
    s.bind(1, name);
    if (s.step()) throw ServiceError(409, "NAME_TAKEN", "user \"" + name + "\" already exists");
  }
  store_->prepare("INSERT INTO users(name, role, salt, pw_hash) VALUES (?, ?, ?, ?)")
      .bind(1, name)
      .bind(2, std::string(to_string(role)))
      .bind(3, salt)
      .bind(4, hash)
      .run();
  return User{store_->last_id(), name, role};
}

std::string Service::login(const std::string& name, const std::string& password) {
  std::string salt;
  std::string stored;
  Id id = 0;
  {
    std::lock_guard lock(mutex_);
    Stmt s = store_->prepare("SELECT id, salt, pw_hash FROM users WHERE name = ?");
    s.bind(1, name);
    if (s.step()) {
      id = s.integer(0);
      salt = s.text(1);
      stored = s.text(2);
    }
  }
  // Hash even for unknown names so timing does not reveal which exist.
  std::string computed = password_hash(password, salt.empty() ? std::string("0") : salt);
  if (id == 0 || !constant_time_equal(computed, stored)) {
    throw ServiceError(401, "UNAUTHORIZED", "unknown user or wrong password");
  }
  std::string token = random_hex(32);
  std::lock_guard lock(mutex_);
  store_->prepare("INSERT INTO sessions(token_hash, user_id, created_at) VALUES (?, ?, ?)")
      .bind(1, sha256_hex(token))
      .bind(2, id)
      .bind(3, now())
      .run();
  return token;
}

User Service::authenticate(const std::string& token) {
  std::lock_guard lock(mutex_);
  Stmt s = store_->prepare(
      "SELECT u.id, u.name, u.role FROM sessions s JOIN users u ON u.id = s.user_id WHERE s.token_hash = ?");
  s.bind(1, sha256_hex(token));
  if (!s.step()) throw ServiceError(401, "UNAUTHORIZED", "missing or invalid token");
  return User{s.integer(0), s.text(1), role_from(s.text(2))};
}

std::vector<User> Service::list_users(const User& caller) {
  require_instructor(caller, "list accounts");
  std::lock_guard lock(mutex_);
  Stmt s = store_->prepare("SELECT id, name, role FROM users ORDER BY id");
  std::vector<User> out;
  while (s.step()) out.push_back(User{s.integer(0), s.text(1), role_from(s.text(2))});
  return out;
}

namespace {

constexpr const char* kProjectColumns =
    "id, owner, col, repr, title, design, stimulus, created_at, updated_at, assignment_id, visible";

Project read_project(const Stmt& s) {
  Project p;
  p.id = s.integer(0);
  p.owner = s.integer(1);
  p.column = column_from(s.text(2));
  p.repr = repr_from(s.text(3));
  p.title = s.text(4);
  p.design = s.text(5);
  p.stimulus = s.text(6);
  p.created_at = s.integer(7);
  p.updated_at = s.integer(8);
  p.assignment_id = s.opt_integer(9);
  p.visible = s.integer(10) != 0;
  return p;
}

std::vector<Project> query_projects(Store& store, const std::string& where, const std::vector<std::int64_t>& args) {
  Stmt s = store.prepare(std::string("SELECT ") + kProjectColumns + " FROM projects " + where + " ORDER BY id");
  for (std::size_t i = 0; i < args.size(); ++i) s.bind(static_cast<int>(i) + 1, args[i]);
  std::vector<Project> out;
  while (s.step()) out.push_back(read_project(s));
  return out;
}

constexpr const char* kSubmissionColumns =
    "id, project_id, submitter, submitted_at, design, status, report, trace_blob, log_blob";

Submission read_submission(const Stmt& s) {
  Submission sub;
  sub.id = s.integer(0);
  sub.project_id = s.integer(1);
  sub.submitter = s.integer(2);
  sub.submitted_at = s.integer(3);
  sub.design = s.text(4);
  sub.status = s.text(5);
  if (auto r = s.opt_text(6)) sub.report = parse_grade_report(*r);
  sub.trace_blob = s.opt_text(7);
  sub.log_blob = s.text(8);
  return sub;
}

// Checks a design payload at the API boundary. Returns the parsed design.
Design checked_design(const std::string& payload) {
  try {
    return parse_design_payload(payload);
  } catch (const FormatError& e) {
    bad_request("BAD_DESIGN", std::string("design payload: ") + e.what());
  }
}

StimulusSet checked_stimulus(const std::string& payload) {
  try {
    return deserialize_stimulus(payload);
  } catch (const FormatError& e) {
    bad_request("BAD_STIMULUS", std::string("stimulus: ") + e.what());
  }
}

}  // namespace

Project Service::require_project(Id id) {
  auto found = query_projects(*store_, "WHERE id = ?", {id});
  if (found.empty()) not_found("project " + std::to_string(id));
  return found.front();
}

HomeView Service::home(const User& caller) {
  std::lock_guard lock(mutex_);
  HomeView v;
  Stmt s = store_->prepare(
      "SELECT n.id, n.author, u.name, n.title, n.body, n.posted_at FROM notices n JOIN users u ON u.id = n.author "
      "ORDER BY n.posted_at DESC, n.id DESC");
  while (s.step()) {
    v.attention.push_back(Notice{s.integer(0), s.integer(1), s.text(2), s.text(3), s.text(4), s.integer(5)});
  }
  v.homework = query_projects(*store_, "WHERE owner = ? AND col = 'HOMEWORK'", {caller.id});
  v.playground = query_projects(*store_, "WHERE owner = ? AND col = 'PLAYGROUND'", {caller.id});
  v.example = caller.role == Role::Instructor ? query_projects(*store_, "WHERE col = 'EXAMPLE'", {})
                                              : query_projects(*store_, "WHERE col = 'EXAMPLE' AND visible = 1", {});
  return v;
}

Notice Service::post_notice(const User& caller, const std::string& title, const std::string& body) {
  require_instructor(caller, "post notices");
  if (title.empty()) bad_request("BAD_NOTICE", "a notice needs a title");
  std::lock_guard lock(mutex_);
  Millis t = now();
  store_->prepare("INSERT INTO notices(author, title, body, posted_at) VALUES (?, ?, ?, ?)")
      .bind(1, caller.id)
      .bind(2, title)
      .bind(3, body)
      .bind(4, t)
      .run();
  return Notice{store_->last_id(), caller.id, caller.name, title, body, t};
}

Project Service::create_project(const User& caller, Column column, const std::string& title, Repr repr,
                                const std::string& design, const std::string& stimulus) {
  if (column == Column::Homework) forbidden("homework projects are created when an assignment is posted");
  if (column == Column::Attention) bad_request("BAD_COLUMN", "the attention column holds notices, not projects");
  if (column == Column::Example) require_instructor(caller, "create example projects");
  if (title.empty()) bad_request("BAD_TITLE", "a project needs a title");
  if (!design.empty() && repr_of(checked_design(design)) != repr) {
    bad_request("REPR_MISMATCH", "design payload does not match the project representation");
  }
  if (!stimulus.empty()) checked_stimulus(stimulus);
  std::lock_guard lock(mutex_);
  Millis t = now();
  store_->prepare(
            "INSERT INTO projects(owner, col, repr, title, design, stimulus, created_at, updated_at, visible) "
            "VALUES (?, ?, ?, ?, ?, ?, ?, ?, 0)")
      .bind(1, caller.id)
      .bind(2, std::string(to_string(column)))
      .bind(3, std::string(to_string(repr)))
      .bind(4, title)
      .bind(5, design)
      .bind(6, stimulus)
      .bind(7, t)
      .bind(8, t)
      .run();
  return require_project(store_->last_id());
}

Project Service::get_project(const User& caller, Id id) {
  std::lock_guard lock(mutex_);
  Project p = require_project(id);
  if (p.owner == caller.id || caller.role == Role::Instructor) return p;
  if (p.column == Column::Example && p.visible) return p;
  forbidden("you cannot open this project");
}

Project Service::update_project(const User& caller, Id id, const std::optional<std::string>& title,
                                const std::optional<std::string>& design,
                                const std::optional<std::string>& stimulus) {
  std::optional<Design> parsed;
  if (design && !design->empty()) parsed = checked_design(*design);
  if (stimulus && !stimulus->empty()) checked_stimulus(*stimulus);
  if (title && title->empty()) bad_request("BAD_TITLE", "a project needs a title");
  std::lock_guard lock(mutex_);
  Project p = require_project(id);
  if (p.column == Column::Example) {
    if (caller.role != Role::Instructor) forbidden("you do not have permissions to modify an example project");
  } else if (p.owner != caller.id) {
    forbidden("only the owner may modify this project");
  }
  Repr repr = p.repr;
  if (parsed && repr_of(*parsed) != p.repr) {
    bool may_switch = false;
    if (p.column == Column::Homework && p.assignment_id) {
      Stmt s = store_->prepare("SELECT required_repr FROM assignments WHERE id = ?");
      s.bind(1, *p.assignment_id);
      may_switch = s.step() && required_from(s.text(0)) == RequiredRepr::Either;
    }
    if (!may_switch) bad_request("REPR_MISMATCH", "design payload does not match the project representation");
    repr = repr_of(*parsed);
  }
  store_->prepare(
            "UPDATE projects SET title = COALESCE(?, title), design = COALESCE(?, design), "
            "stimulus = COALESCE(?, stimulus), repr = ?, updated_at = ? WHERE id = ?")
      .bind(1, title)
      .bind(2, design)
      .bind(3, stimulus)
      .bind(4, std::string(to_string(repr)))
      .bind(5, now())
      .bind(6, id)
      .run();
  return require_project(id);
}

Project Service::set_example_visibility(const User& caller, Id id, bool visible) {
  require_instructor(caller, "change example visibility");
  std::lock_guard lock(mutex_);
  Project p = require_project(id);
  if (p.column != Column::Example) bad_request("NOT_EXAMPLE", "project " + std::to_string(id) + " is not an example");
  store_->prepare("UPDATE projects SET visible = ?, updated_at = ? WHERE id = ?")
      .bind(1, std::int64_t{visible ? 1 : 0})
      .bind(2, now())
      .bind(3, id)
      .run();
  return require_project(id);
}

Id Service::post_assignment(const User& caller, const std::string& title, Id reference_project,
                            const std::vector<TestPoint>& tps, RequiredRepr required, Millis deadline,
                            const std::vector<Id>& roster) {
  require_instructor(caller, "post assignments");
  if (title.empty()) bad_request("BAD_TITLE", "an assignment needs a title");
  if (tps.empty()) bad_request("BAD_TEST_POINTS", "an assignment needs at least one test point");
  std::string reference_payload;
  {
    std::lock_guard lock(mutex_);
    Project ref = require_project(reference_project);
    if (ref.column != Column::Example) {
      bad_request("NOT_EXAMPLE", "the reference must be an example project");
    }
    if (ref.design.empty()) bad_request("BAD_REFERENCE", "the reference project has no design");
    reference_payload = ref.design;
    std::set<Id> seen;
    for (Id student : roster) {
      if (!seen.insert(student).second) bad_request("BAD_ROSTER", "student " + std::to_string(student) + " listed twice");
      Stmt s = store_->prepare("SELECT role FROM users WHERE id = ?");
      s.bind(1, student);
      if (!s.step()) bad_request("BAD_ROSTER", "no user with id " + std::to_string(student));
      if (role_from(s.text(0)) != Role::Student) {
        bad_request("BAD_ROSTER", "user " + std::to_string(student) + " is not a student");
      }
    }
  }
  for (const auto& tp : tps) {
    try {
      tp.check();
    } catch (const ContractError& e) {
      bad_request("BAD_TEST_POINTS", e.what());
    }
    if (tp.stimulus.horizon_ns > cfg_.max_horizon_ns) {
      bad_request("HORIZON_TOO_LONG", "test point \"" + tp.id + "\" exceeds the maximum simulation horizon");
    }
  }
  Design reference = checked_design(reference_payload);
  try {
    check_reference(reference, tps, registry_, GradeOptions{cfg_.max_deltas_per_instant});
  } catch (const ReferenceError& e) {
    throw ServiceError(422, "REFERENCE_FAILS", e.what());
  } catch (const ContractError& e) {
    bad_request("BAD_TEST_POINTS", e.what());
  }

  std::string tp_json = serialize_test_points(tps);
  std::string first_stimulus = serialize_stimulus(tps.front().stimulus);
  Repr project_repr = required == RequiredRepr::Vhdl ? Repr::Vhdl : Repr::Netlist;

  std::lock_guard lock(mutex_);
  Millis t = now();
  Store::Transaction tx(*store_);
  store_->prepare(
            "INSERT INTO assignments(title, author, reference_project, reference_design, test_points, "
            "required_repr, deadline, posted_at) VALUES (?, ?, ?, ?, ?, ?, ?, ?)")
      .bind(1, title)
      .bind(2, caller.id)
      .bind(3, reference_project)
      .bind(4, reference_payload)
      .bind(5, tp_json)
      .bind(6, std::string(to_string(required)))
      .bind(7, deadline)
      .bind(8, t)
      .run();
  Id id = store_->last_id();
  std::size_t written = 0;
  for (Id student : roster) {
    store_->prepare("INSERT INTO roster(assignment_id, student_id) VALUES (?, ?)").bind(1, id).bind(2, student).run();
    store_->prepare(
              "INSERT INTO projects(owner, col, repr, title, design, stimulus, created_at, updated_at, "
              "assignment_id, visible) VALUES (?, 'HOMEWORK', ?, ?, '', ?, ?, ?, ?, 0)")
        .bind(1, student)
        .bind(2, std::string(to_string(project_repr)))
        .bind(3, title)
        .bind(4, first_stimulus)
        .bind(5, t)
        .bind(6, t)
        .bind(7, id)
        .run();
    ++written;
    if (fanout_hook_) fanout_hook_(written);
  }
  tx.commit();
  return id;
}

namespace {

Assignment read_assignment(Store& store, Id id) {
  Stmt s = store.prepare(
      "SELECT id, title, author, reference_project, reference_design, test_points, required_repr, deadline, "
      "posted_at FROM assignments WHERE id = ?");
  s.bind(1, id);
  if (!s.step()) not_found("assignment " + std::to_string(id));
  Assignment a;
  a.id = s.integer(0);
  a.title = s.text(1);
  a.author = s.integer(2);
  a.reference_project = s.integer(3);
  a.reference_design = s.text(4);
  a.test_points = deserialize_test_points(s.text(5));
  a.required = required_from(s.text(6));
  a.deadline = s.integer(7);
  a.posted_at = s.integer(8);
  Stmt r = store.prepare("SELECT student_id FROM roster WHERE assignment_id = ? ORDER BY student_id");
  r.bind(1, id);
  while (r.step()) a.roster.push_back(r.integer(0));
  return a;
}

}  // namespace

Assignment Service::get_assignment(const User& caller, Id id) {
  std::lock_guard lock(mutex_);
  Assignment a = read_assignment(*store_, id);
  if (caller.role != Role::Instructor &&
      std::find(a.roster.begin(), a.roster.end(), caller.id) == a.roster.end()) {
    forbidden("you are not enrolled in this assignment");
  }
  return a;
}

std::string Service::put_blob(const std::string& data) { return blobs_->put(data); }

namespace {

GradeReport rejected_report(const std::vector<TestPoint>& tps, const std::string& why) {
  GradeReport r;
  for (const auto& tp : tps) {
    r.per_test_point.push_back(TestPointResult{tp.id, Verdict::Fail, std::nullopt, "submission rejected"});
  }
  r.total = tps.size();
  r.score = 0;
  r.diagnostics.push_back(why);
  return r;
}

bool repr_allowed(RequiredRepr required, Repr r) {
  if (required == RequiredRepr::Either) return true;
  return (required == RequiredRepr::Vhdl) == (r == Repr::Vhdl);
}

}  // namespace

Submission Service::submit(const User& caller, Id project_id, const std::string& design, const std::string& stimulus) {
  Project p;
  std::optional<Assignment> assignment;
  {
    std::lock_guard lock(mutex_);
    p = require_project(project_id);
    if (p.owner != caller.id) forbidden("only the owner may submit this project");
    if (p.column != Column::Homework && p.column != Column::Playground) {
      bad_request("NOT_SUBMITTABLE", "only homework and playground projects take submissions");
    }
    if (p.column == Column::Homework) assignment = read_assignment(*store_, *p.assignment_id);
  }
  std::string payload = design.empty() ? p.design : design;

  Submission sub;
  sub.project_id = project_id;
  sub.submitter = caller.id;
  sub.design = payload;
  std::string log;
  std::optional<std::string> vcd;
  std::optional<Design> parsed;
  std::string reject_reason;

  if (payload.empty()) {
    reject_reason = "empty design payload";
  } else {
    try {
      parsed = parse_design_payload(payload);
    } catch (const FormatError& e) {
      reject_reason = std::string("malformed design payload: ") + e.what();
    }
  }
  if (parsed && assignment && !repr_allowed(assignment->required, repr_of(*parsed))) {
    reject_reason = "this assignment requires " + std::string(to_string(assignment->required)) + ", got " +
                    std::string(to_string(repr_of(*parsed)));
    parsed.reset();
  } else if (parsed && !assignment && repr_of(*parsed) != p.repr) {
    reject_reason = "design payload does not match the project representation";
    parsed.reset();
  }

  if (!parsed) {
    sub.status = "REJECTED";
    if (assignment) sub.report = rejected_report(assignment->test_points, reject_reason);
    log = "ERROR 0 REJECTED " + reject_reason + "\n";
  } else if (assignment) {
    sub.status = "GRADED";
    std::shared_ptr<const CompiledDesign> reference;
    try {
      reference = std::make_shared<const CompiledDesign>(
          CompiledDesign::compile(parse_design_payload(assignment->reference_design), registry_));
    } catch (const ContractError& e) {
      throw ServiceError(500, "REFERENCE_ERROR", e.what());
    }
    try {
      sub.report = grade(*parsed, *reference, assignment->test_points, registry_,
                         GradeOptions{cfg_.max_deltas_per_instant});
    } catch (const ReferenceError& e) {
      throw ServiceError(500, "REFERENCE_ERROR", e.what());
    }
    for (const auto& d : sub.report->diagnostics) log += "DIAG " + d + "\n";
    // The waveform artifact is the run under the first test point.
    try {
      CompiledDesign compiled = CompiledDesign::compile(*parsed, registry_);
      log += "INFO 0 COMPILED design compiled\n";
      for (const auto& w : compiled.warnings()) log += "WARNING 0 COMPILE " + w + "\n";
      const TestPoint& tp = assignment->test_points.front();
      SimConfig cfg;
      cfg.horizon_ns = tp.stimulus.horizon_ns;
      cfg.max_deltas_per_instant = cfg_.max_deltas_per_instant;
      cfg.watch = WatchMode::Ports;
      SimResult r = compiled.simulate(tp.stimulus, cfg);
      vcd = export_vcd(r.trace);
      log += r.log.to_text();
    } catch (const ContractError& e) {
      log += std::string("ERROR 0 COMPILE ") + e.what() + "\n";
    }
    for (const auto& tp : sub.report->per_test_point) {
      log += "INFO 0 TEST_POINT " + tp.id + " " + std::string(to_string(tp.verdict)) +
             (tp.note.empty() ? "" : " (" + tp.note + ")") + "\n";
    }
  } else {
    sub.status = "SIMULATED";
    std::string stim_payload = stimulus.empty() ? p.stimulus : stimulus;
    try {
      if (stim_payload.empty()) throw ContractError("the project has no stimulus");
      StimulusSet stim = deserialize_stimulus(stim_payload);
      if (stim.horizon_ns > cfg_.max_horizon_ns) {
        throw ContractError("horizon " + std::to_string(stim.horizon_ns) + " ns exceeds the limit of " +
                            std::to_string(cfg_.max_horizon_ns) + " ns");
      }
      CompiledDesign compiled = CompiledDesign::compile(*parsed, registry_);
      log += "INFO 0 COMPILED design compiled\n";
      SimConfig cfg;
      cfg.horizon_ns = stim.horizon_ns;
      cfg.max_deltas_per_instant = cfg_.max_deltas_per_instant;
      cfg.watch = WatchMode::AllNets;
      SimResult r = compiled.simulate(stim, cfg);
      vcd = export_vcd(r.trace);
      log += r.log.to_text();
    } catch (const FormatError& e) {
      log += std::string("ERROR 0 BAD_STIMULUS ") + e.what() + "\n";
    } catch (const ContractError& e) {
      log += std::string("ERROR 0 COMPILE ") + e.what() + "\n";
    }
  }

  std::lock_guard lock(mutex_);
  if (vcd) sub.trace_blob = put_blob(*vcd);
  sub.log_blob = put_blob(log);
  sub.submitted_at = now();
  Store::Transaction tx(*store_);
  std::optional<std::string> report_json;
  std::optional<std::int64_t> score;
  if (sub.report) {
    report_json = grade_report_json(*sub.report);
    score = sub.report->score;
  }
  store_->prepare(
            "INSERT INTO submissions(project_id, submitter, submitted_at, design, status, score, report, "
            "trace_blob, log_blob) VALUES (?, ?, ?, ?, ?, ?, ?, ?, ?)")
      .bind(1, sub.project_id)
      .bind(2, sub.submitter)
      .bind(3, sub.submitted_at)
      .bind(4, sub.design)
      .bind(5, sub.status)
      .bind(6, score)
      .bind(7, report_json)
      .bind(8, sub.trace_blob)
      .bind(9, sub.log_blob)
      .run();
  sub.id = store_->last_id();
  if (parsed && !design.empty()) {
    store_->prepare("UPDATE projects SET design = ?, repr = ?, updated_at = ? WHERE id = ?")
        .bind(1, design)
        .bind(2, std::string(to_string(repr_of(*parsed))))
        .bind(3, sub.submitted_at)
        .bind(4, project_id)
        .run();
  }
  tx.commit();
  return sub;
}

std::vector<Submission> Service::submission_history(const User& caller, Id project_id) {
  std::lock_guard lock(mutex_);
  Project p = require_project(project_id);
  if (p.owner != caller.id && caller.role != Role::Instructor) forbidden("you cannot see this project's history");
  Stmt s = store_->prepare(std::string("SELECT ") + kSubmissionColumns +
                           " FROM submissions WHERE project_id = ? ORDER BY submitted_at, id");
  s.bind(1, project_id);
  std::vector<Submission> out;
  while (s.step()) out.push_back(read_submission(s));
  return out;
}

Submission Service::get_submission(const User& caller, Id id) {
  std::lock_guard lock(mutex_);
  Stmt s = store_->prepare(std::string("SELECT ") + kSubmissionColumns + " FROM submissions WHERE id = ?");
  s.bind(1, id);
  if (!s.step()) not_found("submission " + std::to_string(id));
  Submission sub = read_submission(s);
  if (sub.submitter != caller.id && caller.role != Role::Instructor) forbidden("you cannot see this submission");
  return sub;
}

std::optional<std::string> Service::submission_trace(const User& caller, Id id) {
  Submission sub = get_submission(caller, id);
  if (!sub.trace_blob) return std::nullopt;
  std::lock_guard lock(mutex_);
  auto data = blobs_->get(*sub.trace_blob);
  if (!data) throw ServiceError(500, "BLOB_MISSING", "trace artifact " + *sub.trace_blob + " is missing");
  return data;
}

std::string Service::submission_log(const User& caller, Id id) {
  Submission sub = get_submission(caller, id);
  std::lock_guard lock(mutex_);
  auto data = blobs_->get(sub.log_blob);
  if (!data) throw ServiceError(500, "BLOB_MISSING", "log artifact " + sub.log_blob + " is missing");
  return *data;
}

SimulationView Service::simulate(const User&, const std::string& design, const std::string& stimulus,
                                 WatchMode watch) {
  Design d = checked_design(design);
  StimulusSet stim = checked_stimulus(stimulus);
  if (stim.horizon_ns > cfg_.max_horizon_ns) {
    bad_request("HORIZON_TOO_LONG", "horizon " + std::to_string(stim.horizon_ns) + " ns exceeds the limit of " +
                                        std::to_string(cfg_.max_horizon_ns) + " ns");
  }
  SimConfig cfg;
  cfg.horizon_ns = stim.horizon_ns;
  cfg.max_deltas_per_instant = cfg_.max_deltas_per_instant;
  cfg.watch = watch;
  SimulationView v;
  try {
    v.result = CompiledDesign::compile(d, registry_).simulate(stim, cfg);
  } catch (const ContractError& e) {
    throw ServiceError(422, "COMPILE_ERROR", e.what());
  }
  v.vcd = export_vcd(v.result.trace);
  return v;
}

// Served statistics: aggregated in SQL.
CohortStats Service::assignment_stats(const User& caller, Id id) {
  require_instructor(caller, "see assignment statistics");
  std::lock_guard lock(mutex_);
  Assignment a = read_assignment(*store_, id);
  CohortStats out;
  out.assignment = id;
  out.timezone = cfg_.timezone;

  Stmt rec = store_->prepare(R"sql(
    SELECT r.student_id, u.name,
           COUNT(s.id),
           COALESCE(MAX(CASE WHEN s.submitted_at <= ?2 THEN s.score END), 0)
    FROM roster r
    JOIN users u ON u.id = r.student_id
    LEFT JOIN projects p ON p.assignment_id = r.assignment_id AND p.owner = r.student_id
    LEFT JOIN submissions s ON s.project_id = p.id
    WHERE r.assignment_id = ?1
    GROUP BY r.student_id, u.name
    ORDER BY r.student_id)sql");
  rec.bind(1, id).bind(2, a.deadline);
  std::map<Id, std::size_t> index;
  while (rec.step()) {
    StatisticsRecord r;
    r.student = rec.integer(0);
    r.name = rec.text(1);
    r.submission_count = static_cast<std::size_t>(rec.integer(2));
    r.final_score = static_cast<int>(rec.integer(3));
    index[r.student] = out.students.size();
    out.students.push_back(std::move(r));
  }
  Stmt rows = store_->prepare(R"sql(
    SELECT p.owner, s.submitted_at, COALESCE(s.score, 0)
    FROM submissions s JOIN projects p ON p.id = s.project_id
    WHERE p.assignment_id = ?
    ORDER BY p.owner, s.submitted_at, s.id)sql");
  rows.bind(1, id);
  while (rows.step()) {
    auto it = index.find(rows.integer(0));
    if (it == index.end()) continue;
    auto& r = out.students[it->second];
    r.submission_times.push_back(rows.integer(1));
    r.submission_scores.push_back(static_cast<int>(rows.integer(2)));
  }
  out.roster_size = out.students.size();

  Stmt agg = store_->prepare(R"sql(
    SELECT COUNT(DISTINCT p.owner),
           COUNT(DISTINCT CASE WHEN s.score = 100 THEN p.owner END),
           COUNT(s.id)
    FROM submissions s JOIN projects p ON p.id = s.project_id
    JOIN roster r ON r.assignment_id = p.assignment_id AND r.student_id = p.owner
    WHERE p.assignment_id = ?)sql");
  agg.bind(1, id);
  agg.step();
  out.submitted_count = static_cast<std::size_t>(agg.integer(0));
  out.solved_count = static_cast<std::size_t>(agg.integer(1));
  out.total_submissions = static_cast<std::size_t>(agg.integer(2));

  Stmt tries = store_->prepare(R"sql(
    SELECT tries, COUNT(*) FROM (
      SELECT (SELECT COUNT(*) FROM submissions s2
              WHERE s2.project_id = s.project_id
                AND (s2.submitted_at < s.submitted_at OR (s2.submitted_at = s.submitted_at AND s2.id <= s.id))) AS tries
      FROM submissions s JOIN projects p ON p.id = s.project_id
      JOIN roster r ON r.assignment_id = p.assignment_id AND r.student_id = p.owner
      WHERE p.assignment_id = ?1 AND s.score = 100
        AND NOT EXISTS (SELECT 1 FROM submissions s3
                        WHERE s3.project_id = s.project_id AND s3.score = 100
                          AND (s3.submitted_at < s.submitted_at OR (s3.submitted_at = s.submitted_at AND s3.id < s.id))))
    GROUP BY tries ORDER BY tries)sql");
  tries.bind(1, id);
  while (tries.step()) {
    out.tries_before_success[static_cast<std::size_t>(tries.integer(0))] = static_cast<std::size_t>(tries.integer(1));
  }

  // Hour of day in course-local time; the shift keeps the dividend positive.
  Stmt hours = store_->prepare(R"sql(
    SELECT ((s.submitted_at + ?2 * 60000 + 864000000000000) % 86400000) / 3600000 AS hour, COUNT(*)
    FROM submissions s JOIN projects p ON p.id = s.project_id
    JOIN roster r ON r.assignment_id = p.assignment_id AND r.student_id = p.owner
    WHERE p.assignment_id = ?1
    GROUP BY hour)sql");
  hours.bind(1, id).bind(2, std::int64_t{utc_offset_});
  while (hours.step()) out.hourly[static_cast<std::size_t>(hours.integer(0))] = static_cast<std::size_t>(hours.integer(1));
  return out;
}

CohortStats Service::compute_stats(const Assignment& a) {
  std::vector<StatisticsRecord> records;
  for (Id student : a.roster) {
    StatisticsRecord r;
    r.student = student;
    {
      Stmt s = store_->prepare("SELECT name FROM users WHERE id = ?");
      s.bind(1, student);
      if (s.step()) r.name = s.text(0);
    }
    auto projects = query_projects(*store_, "WHERE assignment_id = ? AND owner = ?", {a.id, student});
    std::vector<std::tuple<Millis, Id, int>> subs;
    for (const auto& p : projects) {
      Stmt s = store_->prepare(std::string("SELECT ") + kSubmissionColumns + " FROM submissions WHERE project_id = ?");
      s.bind(1, p.id);
      while (s.step()) {
        Submission sub = read_submission(s);
        subs.emplace_back(sub.submitted_at, sub.id, sub.report ? sub.report->score : 0);
      }
    }
    std::sort(subs.begin(), subs.end());
    for (const auto& [t, sid, score] : subs) {
      r.submission_times.push_back(t);
      r.submission_scores.push_back(score);
    }
    r.submission_count = subs.size();
    r.final_score = final_score(r.submission_times, r.submission_scores, a.deadline);
    records.push_back(std::move(r));
  }
  return summarize(a.id, std::move(records), utc_offset_, cfg_.timezone);
}

CohortStats Service::rebuild_stats(Id assignment) {
  std::lock_guard lock(mutex_);
  return compute_stats(read_assignment(*store_, assignment));
}

}  // namespace dclab::service
