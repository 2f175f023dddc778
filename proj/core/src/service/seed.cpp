#include "dclab/service/seed.hpp"

#include <cstdio>
#include <vector>

#include "../demo_data.hpp"
#include "../json_util.hpp"

namespace dclab::service {

std::string demo_file(const std::string& name) {
  for (const auto& [key, text] : detail::builtin_demo_files()) {
    if (key == name) return std::string(text);
  }
  throw Error("no demo file " + name);
}

namespace {

std::string netlist_payload(const std::string& file) {
  detail::OrderedJson j;
  j["repr"] = "NETLIST";
  j["netlist"] = detail::OrderedJson::parse(demo_file(file));
  return j.dump();
}

std::string vhdl_payload(const std::string& file, const std::string& top) {
  detail::OrderedJson j;
  j["repr"] = "VHDL";
  j["files"] = detail::OrderedJson::array({{{"name", file}, {"text", demo_file(file)}}});
  if (!top.empty()) j["top"] = top;
  return j.dump();
}

// C correct netlist, V behavioural VHDL, W mod-100 netlist, B VHDL with a syntax error.
const char* const kPlan[] = {
    "C", "V", "WBWWBWC", "WC", "BC", "WWC", "WC", "BWC", "WWWC", "C", "W", "WW", "B", "WBW", "W", "BW", "WW",
};

constexpr std::size_t kStudents = 31;

}  // namespace

SeedReport seed_demo(Service& service, const ManualClock& clock, const std::string& password) {
  const Millis posted = parse_time("2024-03-04T08:00:00Z");
  const Millis deadline = parse_time("2024-03-11T23:59:00Z");
  const Millis first_day = parse_time("2024-03-05T00:00:00Z");

  clock.set(posted - 3'600'000);
  User teacher;
  if (service.user_count() == 0) {
    teacher = service.create_user(nullptr, "teacher", Role::Instructor, password);
  } else {
    const auto& cfg = service.config();
    if (cfg.admin_name.empty() || service.user_count() != 1) {
      throw ServiceError(409, "STORE_NOT_EMPTY", "seed-demo needs an empty store");
    }
    User admin = service.authenticate(service.login(cfg.admin_name, cfg.admin_password));
    teacher = service.create_user(&admin, "teacher", Role::Instructor, password);
  }

  std::vector<User> students;
  for (std::size_t i = 1; i <= kStudents; ++i) {
    char name[16];
    std::snprintf(name, sizeof name, "student%02zu", i);
    students.push_back(service.create_user(&teacher, name, Role::Student, password));
  }

  Project reference = service.create_project(teacher, Column::Example, "Mod-60 counter", Repr::Netlist,
                                             netlist_payload("counter_mod60.json"), demo_file("counter_stimulus.json"));
  service.set_example_visibility(teacher, reference.id, true);

  clock.set(posted);
  service.post_notice(teacher, "Counter homework posted",
                      "Build a counter that counts from 0 to 59 in decimal. Due Monday 11 March, 23:59.");
  std::vector<Id> roster;
  for (const auto& s : students) roster.push_back(s.id);
  Id assignment = service.post_assignment(teacher, "Mod-60 counter", reference.id,
                                          deserialize_test_points(demo_file("counter_testpoints.json")),
                                          RequiredRepr::Either, deadline, roster);

  const std::string correct = netlist_payload("counter_mod60.json");
  const std::string behavioural = vhdl_payload("counter60.vhd", "counter60");
  const std::string wrong = netlist_payload("counter_mod100.json");
  const std::string broken = vhdl_payload("broken.vhd", "");

  SeedReport report;
  report.assignment = assignment;
  report.reference_project = reference.id;
  report.instructor = teacher.name;
  report.students = students.size();
  std::size_t k = 0;
  for (const char* plan : kPlan) {
    const User& student = students[k];
    Id project = 0;
    for (const auto& p : service.home(student).homework) {
      if (p.assignment_id == assignment) project = p.id;
    }
    // Spread the cohort over several days and most hours of the day.
    Millis t = first_day + static_cast<Millis>(k) * 313 * 60'000;
    for (const char* c = plan; *c != '\0'; ++c) {
      clock.set(t);
      const std::string& payload = *c == 'C' ? correct : *c == 'V' ? behavioural : *c == 'W' ? wrong : broken;
      service.submit(student, project, payload, "");
      ++report.submissions;
      t += 47 * 60'000;
    }
    ++k;
  }
  return report;
}

}  // namespace dclab::service
