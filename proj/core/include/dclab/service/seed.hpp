#pragma once

#include <atomic>
#include <memory>
#include <string>

#include "dclab/service/service.hpp"

namespace dclab::service {

/// A settable clock for replaying history with fixed timestamps.
class ManualClock {
 public:
  ManualClock() : now_(std::make_shared<std::atomic<Millis>>(0)) {}

  Millis operator()() const { return now_->load(); }
  void set(Millis t) const { now_->store(t); }

 private:
  std::shared_ptr<std::atomic<Millis>> now_;
};

struct SeedReport {
  Id assignment = 0;
  Id reference_project = 0;
  std::string instructor;
  std::size_t students = 0;
  std::size_t submissions = 0;
};

/// Loads the demo cohort: instructor "teacher", student01..student31, the
/// mod-60 counter example, one counter assignment and 38 submissions from 17
/// students (10 of them eventually correct). All accounts share `password`.
/// The service must have been built on `clock`; its store must hold no users
/// other than the configured admin. Throws ServiceError otherwise.
SeedReport seed_demo(Service& service, const ManualClock& clock, const std::string& password = "dclab-demo");

/// Embedded copy of a demo file (counter_mod60.json, counter60.vhd, ...).
std::string demo_file(const std::string& name);

}  // namespace dclab::service
