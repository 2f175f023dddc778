#include "dclab/service/http.hpp"

#include <charconv>
#include <vector>

#include "../json_util.hpp"

namespace dclab::service {

using detail::Json;
using detail::ObjectReader;
using detail::OrderedJson;

namespace {

OrderedJson parse_or_null(const std::string& s) {
  if (s.empty()) return nullptr;
  return OrderedJson::parse(s);
}

OrderedJson user_value(const User& u) {
  return OrderedJson{{"id", u.id}, {"name", u.name}, {"role", std::string(to_string(u.role))}};
}

OrderedJson project_value(const Project& p, bool with_payload) {
  OrderedJson j;
  j["id"] = p.id;
  j["owner"] = p.owner;
  j["column"] = std::string(to_string(p.column));
  j["repr"] = std::string(to_string(p.repr));
  j["title"] = p.title;
  j["created_at"] = format_time(p.created_at);
  j["updated_at"] = format_time(p.updated_at);
  j["assignment_id"] = p.assignment_id ? OrderedJson(*p.assignment_id) : OrderedJson(nullptr);
  if (p.column == Column::Example) j["visible"] = p.visible;
  if (with_payload) {
    j["design"] = parse_or_null(p.design);
    j["stimulus"] = parse_or_null(p.stimulus);
  }
  return j;
}

OrderedJson submission_value(const Submission& s) {
  OrderedJson j;
  j["id"] = s.id;
  j["project_id"] = s.project_id;
  j["submitter"] = s.submitter;
  j["submitted_at"] = format_time(s.submitted_at);
  j["status"] = s.status;
  j["score"] = s.report ? OrderedJson(s.report->score) : OrderedJson(nullptr);
  j["report"] = s.report ? OrderedJson::parse(grade_report_json(*s.report)) : OrderedJson(nullptr);
  j["trace"] = s.trace_blob ? OrderedJson("/api/submissions/" + std::to_string(s.id) + "/trace.vcd")
                            : OrderedJson(nullptr);
  j["trace_blob"] = s.trace_blob ? OrderedJson(*s.trace_blob) : OrderedJson(nullptr);
  j["log"] = "/api/submissions/" + std::to_string(s.id) + "/log";
  j["log_blob"] = s.log_blob;
  j["design"] = parse_or_null(s.design);
  return j;
}

OrderedJson notice_value(const Notice& n) {
  return OrderedJson{{"id", n.id},       {"author", n.author_name}, {"author_id", n.author},
                     {"title", n.title}, {"body", n.body},          {"posted_at", format_time(n.posted_at)}};
}

OrderedJson log_value(const SimLog& log) {
  OrderedJson out = OrderedJson::array();
  static const char* levels[] = {"INFO", "WARNING", "ERROR"};
  for (const auto& e : log.entries) {
    out.push_back({{"level", levels[static_cast<int>(e.level)]},
                   {"time_ns", e.time_ns},
                   {"code", e.code},
                   {"message", e.message}});
  }
  return out;
}

OrderedJson trace_value(const Trace& t) {
  OrderedJson signals = OrderedJson::array();
  for (const auto& s : t.signals) {
    OrderedJson changes = OrderedJson::array();
    for (const auto& c : s.changes) changes.push_back({c.time_ns, to_string(c.value)});
    signals.push_back({{"label", s.label}, {"id", s.id}, {"changes", std::move(changes)}});
  }
  return OrderedJson{{"horizon_ns", t.horizon_ns}, {"signals", std::move(signals)}};
}

std::string dump(const OrderedJson& j) { return j.dump(2) + "\n"; }

HttpResponse json_response(int status, const OrderedJson& j) { return HttpResponse{status, "application/json", dump(j)}; }

HttpResponse error_response(int status, const std::string& code, const std::string& message) {
  return json_response(status, OrderedJson{{"code", code}, {"message", message}});
}

std::vector<std::string> split_path(const std::string& path) {
  std::vector<std::string> out;
  std::size_t i = 0;
  while (i < path.size()) {
    if (path[i] == '/') {
      ++i;
      continue;
    }
    std::size_t j = path.find('/', i);
    if (j == std::string::npos) j = path.size();
    out.push_back(path.substr(i, j - i));
    i = j;
  }
  return out;
}

Id parse_id(const std::string& s) {
  Id v = 0;
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || p != s.data() + s.size() || v <= 0) {
    throw ServiceError(404, "NOT_FOUND", "no such resource id \"" + s + "\"");
  }
  return v;
}

Json parse_body(const std::string& body) {
  if (body.empty()) return Json::object();
  Json j = detail::parse_json(body);
  if (!j.is_object()) throw FormatError("request body must be a JSON object", "");
  return j;
}

// Design and stimulus travel as nested JSON objects; the service stores their text.
std::optional<std::string> nested(ObjectReader& r, std::string_view key) {
  const Json* v = r.optional(key);
  if (v == nullptr || v->is_null()) return std::nullopt;
  if (!v->is_object()) throw FormatError("expected an object", r.path(key));
  return v->dump();
}

Column column_named(const std::string& s, const std::string& path) {
  if (s == "PLAYGROUND") return Column::Playground;
  if (s == "EXAMPLE") return Column::Example;
  if (s == "HOMEWORK") return Column::Homework;
  if (s == "ATTENTION") return Column::Attention;
  throw FormatError("column must be ATTENTION, HOMEWORK, PLAYGROUND or EXAMPLE", path);
}

Repr repr_named(const std::string& s, const std::string& path) {
  if (s == "NETLIST") return Repr::Netlist;
  if (s == "VHDL") return Repr::Vhdl;
  throw FormatError("repr must be NETLIST or VHDL", path);
}

RequiredRepr required_named(const std::string& s, const std::string& path) {
  if (s == "NETLIST") return RequiredRepr::Netlist;
  if (s == "VHDL") return RequiredRepr::Vhdl;
  if (s == "EITHER") return RequiredRepr::Either;
  throw FormatError("required must be NETLIST, VHDL or EITHER", path);
}

Role role_named(const std::string& s, const std::string& path) {
  if (s == "STUDENT") return Role::Student;
  if (s == "INSTRUCTOR") return Role::Instructor;
  throw FormatError("role must be STUDENT or INSTRUCTOR", path);
}

WatchMode watch_named(const std::string& s, const std::string& path) {
  if (s == "PORTS") return WatchMode::Ports;
  if (s == "ALL_NETS") return WatchMode::AllNets;
  throw FormatError("watch must be PORTS or ALL_NETS", path);
}

}  // namespace

std::string user_json(const User& u) { return dump(user_value(u)); }
std::string project_json(const Project& p) { return dump(project_value(p, true)); }
std::string submission_json(const Submission& s) { return dump(submission_value(s)); }

std::string stats_json(const CohortStats& s) {
  OrderedJson j;
  j["assignment"] = s.assignment;
  j["roster_size"] = s.roster_size;
  j["submitted_count"] = s.submitted_count;
  j["submitted_ratio"] = {{"numerator", s.submitted_count},
                          {"denominator", s.roster_size},
                          {"value", s.roster_size == 0 ? 0.0
                                                       : static_cast<double>(s.submitted_count) /
                                                             static_cast<double>(s.roster_size)}};
  j["solved_count"] = s.solved_count;
  OrderedJson tries = OrderedJson::object();
  for (const auto& [k, v] : s.tries_before_success) tries[std::to_string(k)] = v;
  j["tries_before_success"] = std::move(tries);
  j["hourly"] = s.hourly;
  j["total_submissions"] = s.total_submissions;
  j["timezone"] = s.timezone;
  OrderedJson students = OrderedJson::array();
  for (const auto& r : s.students) {
    OrderedJson times = OrderedJson::array();
    for (Millis t : r.submission_times) times.push_back(format_time(t));
    students.push_back({{"student", r.student},
                        {"name", r.name},
                        {"submission_count", r.submission_count},
                        {"submission_times", std::move(times)},
                        {"submission_scores", r.submission_scores},
                        {"final_score", r.final_score}});
  }
  j["students"] = std::move(students);
  return dump(j);
}

std::string home_json(const HomeView& h) {
  OrderedJson j;
  OrderedJson attention = OrderedJson::array();
  for (const auto& n : h.attention) attention.push_back(notice_value(n));
  j["attention"] = std::move(attention);
  auto column = [](const std::vector<Project>& ps) {
    OrderedJson a = OrderedJson::array();
    for (const auto& p : ps) a.push_back(project_value(p, false));
    return a;
  };
  j["homework"] = column(h.homework);
  j["playground"] = column(h.playground);
  j["example"] = column(h.example);
  return dump(j);
}

std::string simulation_json(const SimulationView& v) {
  OrderedJson j;
  j["trace"] = trace_value(v.result.trace);
  j["log"] = log_value(v.result.log);
  if (v.result.fault) {
    const auto& f = *v.result.fault;
    j["fault"] = {{"code", f.code}, {"time_ns", f.time_ns}, {"nets", f.nets}, {"message", f.message}};
  } else {
    j["fault"] = nullptr;
  }
  j["vcd"] = v.vcd;
  return dump(j);
}

HttpResponse Router::handle(const HttpRequest& req) {
  try {
    auto parts = split_path(req.path);
    if (parts.size() < 2 || parts[0] != "api") throw ServiceError(404, "NOT_FOUND", "no route for " + req.path);
    const std::string& m = req.method;
    const std::string& head = parts[1];

    if (head == "login" && parts.size() == 2) {
      if (m != "POST") throw ServiceError(405, "METHOD_NOT_ALLOWED", m + " " + req.path);
      Json body = parse_body(req.body);
      ObjectReader r(body, "");
      std::string name = r.string("name");
      std::string password = r.string("password");
      r.finish();
      std::string token = service_.login(name, password);
      User u = service_.authenticate(token);
      return json_response(200, OrderedJson{{"token", token}, {"user", user_value(u)}});
    }

    std::string token = req.authorization;
    if (token.rfind("Bearer ", 0) == 0) token = token.substr(7);
    if (token.empty()) throw ServiceError(401, "UNAUTHORIZED", "missing bearer token");
    User caller = service_.authenticate(token);

    auto method_not_allowed = [&]() -> ServiceError {
      return ServiceError(405, "METHOD_NOT_ALLOWED", m + " " + req.path);
    };

    if (head == "home" && parts.size() == 2) {
      if (m != "GET") throw method_not_allowed();
      return HttpResponse{200, "application/json", home_json(service_.home(caller))};
    }

    if (head == "users" && parts.size() == 2) {
      if (m == "GET") {
        OrderedJson a = OrderedJson::array();
        for (const auto& u : service_.list_users(caller)) a.push_back(user_value(u));
        return json_response(200, OrderedJson{{"users", std::move(a)}});
      }
      if (m != "POST") throw method_not_allowed();
      Json body = parse_body(req.body);
      ObjectReader r(body, "");
      std::string name = r.string("name");
      Role role = role_named(r.string("role"), "/role");
      std::string password = r.string("password");
      r.finish();
      return json_response(201, user_value(service_.create_user(&caller, name, role, password)));
    }

    if (head == "notices" && parts.size() == 2) {
      if (m != "POST") throw method_not_allowed();
      Json body = parse_body(req.body);
      ObjectReader r(body, "");
      std::string title = r.string("title");
      std::string text;
      if (const Json* b = r.optional("body")) text = detail::expect_string(*b, "/body");
      r.finish();
      return json_response(201, notice_value(service_.post_notice(caller, title, text)));
    }

    if (head == "simulate" && parts.size() == 2) {
      if (m != "POST") throw method_not_allowed();
      Json body = parse_body(req.body);
      ObjectReader r(body, "");
      auto design = nested(r, "design");
      auto stimulus = nested(r, "stimulus");
      WatchMode watch = WatchMode::AllNets;
      if (const Json* w = r.optional("watch")) watch = watch_named(detail::expect_string(*w, "/watch"), "/watch");
      r.finish();
      if (!design) throw FormatError("missing field", "/design");
      if (!stimulus) throw FormatError("missing field", "/stimulus");
      return HttpResponse{200, "application/json", simulation_json(service_.simulate(caller, *design, *stimulus, watch))};
    }

    if (head == "projects") {
      if (parts.size() == 2) {
        if (m != "POST") throw method_not_allowed();
        Json body = parse_body(req.body);
        ObjectReader r(body, "");
        Column column = Column::Playground;
        if (const Json* c = r.optional("column")) column = column_named(detail::expect_string(*c, "/column"), "/column");
        std::string title = r.string("title");
        Repr repr = repr_named(r.string("repr"), "/repr");
        auto design = nested(r, "design");
        auto stimulus = nested(r, "stimulus");
        r.finish();
        Project p = service_.create_project(caller, column, title, repr, design.value_or(""), stimulus.value_or(""));
        return json_response(201, project_value(p, true));
      }
      Id id = parse_id(parts[2]);
      if (parts.size() == 3) {
        if (m == "GET") return json_response(200, project_value(service_.get_project(caller, id), true));
        if (m != "PUT") throw method_not_allowed();
        Json body = parse_body(req.body);
        ObjectReader r(body, "");
        std::optional<std::string> title;
        if (const Json* t = r.optional("title")) title = detail::expect_string(*t, "/title");
        auto design = nested(r, "design");
        auto stimulus = nested(r, "stimulus");
        r.finish();
        return json_response(200, project_value(service_.update_project(caller, id, title, design, stimulus), true));
      }
      if (parts.size() == 4 && parts[3] == "submissions") {
        if (m == "GET") {
          OrderedJson a = OrderedJson::array();
          for (const auto& s : service_.submission_history(caller, id)) a.push_back(submission_value(s));
          return json_response(200, OrderedJson{{"submissions", std::move(a)}});
        }
        if (m != "POST") throw method_not_allowed();
        // The design stays raw text here: a malformed payload is recorded, not refused.
        Json body = parse_body(req.body);
        ObjectReader r(body, "");
        std::string design;
        if (const Json* d = r.optional("design"); d != nullptr && !d->is_null()) design = d->dump();
        auto stimulus = nested(r, "stimulus");
        r.finish();
        return json_response(201, submission_value(service_.submit(caller, id, design, stimulus.value_or(""))));
      }
    }

    if (head == "submissions" && parts.size() >= 3) {
      Id id = parse_id(parts[2]);
      if (m != "GET") throw method_not_allowed();
      if (parts.size() == 3) return json_response(200, submission_value(service_.get_submission(caller, id)));
      if (parts.size() == 4 && parts[3] == "trace.vcd") {
        auto vcd = service_.submission_trace(caller, id);
        if (!vcd) throw ServiceError(404, "NO_TRACE", "submission " + parts[2] + " has no waveform (it did not compile)");
        return HttpResponse{200, "text/plain; charset=utf-8", *vcd};
      }
      if (parts.size() == 4 && parts[3] == "log") {
        return HttpResponse{200, "text/plain; charset=utf-8", service_.submission_log(caller, id)};
      }
    }

    if (head == "assignments") {
      if (parts.size() == 2) {
        if (m != "POST") throw method_not_allowed();
        Json body = parse_body(req.body);
        ObjectReader r(body, "");
        std::string title = r.string("title");
        Id reference = r.integer("reference_project");
        const Json& tp_doc = r.object("test_points");
        std::vector<TestPoint> tps;
        try {
          tps = deserialize_test_points(tp_doc.dump());
        } catch (const FormatError& e) {
          throw FormatError(e.reason(), "/test_points" + e.path());
        }
        RequiredRepr required = RequiredRepr::Either;
        if (const Json* q = r.optional("required")) {
          required = required_named(detail::expect_string(*q, "/required"), "/required");
        }
        const Json& dl = r.required("deadline");
        Millis deadline = dl.is_string() ? parse_time(dl.get<std::string>()) : detail::expect_integer(dl, "/deadline");
        std::vector<Id> roster;
        if (const Json* ro = r.optional("roster")) {
          const Json& list = detail::expect_array(*ro, "/roster");
          for (std::size_t i = 0; i < list.size(); ++i) roster.push_back(detail::expect_integer(list[i], detail::child_path("/roster", i)));
        }
        r.finish();
        Id id = service_.post_assignment(caller, title, reference, tps, required, deadline, roster);
        return json_response(201, OrderedJson{{"id", id}, {"projects_created", roster.size()}});
      }
      Id id = parse_id(parts[2]);
      if (m != "GET") throw method_not_allowed();
      if (parts.size() == 3) {
        Assignment a = service_.get_assignment(caller, id);
        OrderedJson j;
        j["id"] = a.id;
        j["title"] = a.title;
        j["author"] = a.author;
        j["reference_project"] = a.reference_project;
        j["required"] = std::string(to_string(a.required));
        j["deadline"] = format_time(a.deadline);
        j["posted_at"] = format_time(a.posted_at);
        j["test_points"] = OrderedJson::parse(serialize_test_points(a.test_points));
        j["roster"] = a.roster;
        return json_response(200, j);
      }
      if (parts.size() == 4 && parts[3] == "stats") {
        return HttpResponse{200, "application/json", stats_json(service_.assignment_stats(caller, id))};
      }
    }

    if (head == "examples" && parts.size() == 4 && parts[3] == "visibility") {
      if (m != "POST") throw method_not_allowed();
      Id id = parse_id(parts[2]);
      Json body = parse_body(req.body);
      ObjectReader r(body, "");
      const Json& v = r.required("visible");
      if (!v.is_boolean()) throw FormatError("expected true or false", "/visible");
      r.finish();
      return json_response(200, project_value(service_.set_example_visibility(caller, id, v.get<bool>()), false));
    }

    throw ServiceError(404, "NOT_FOUND", "no route for " + req.method + " " + req.path);
  } catch (const ServiceError& e) {
    return error_response(e.status(), e.code(), e.what());
  } catch (const FormatError& e) {
    return error_response(400, "BAD_REQUEST", e.what());
  } catch (const ContractError& e) {
    return error_response(400, "BAD_REQUEST", e.what());
  } catch (const std::exception& e) {
    return error_response(500, "INTERNAL", e.what());
  }
}

}  // namespace dclab::service
