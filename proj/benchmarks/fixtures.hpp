#pragma once

#include <fstream>
#include <sstream>
#include <string>

#include "dclab/grader.hpp"
#include "dclab/netlist.hpp"
#include "dclab/stimulus.hpp"

namespace bench {

inline std::string read(const std::string& rel) {
  std::ifstream in(std::string(DCLAB_FIXTURE_DIR) + "/" + rel, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline dclab::Circuit circuit(const std::string& name) {
  return dclab::deserialize_circuit(read("circuits/" + name + ".json"));
}

inline dclab::StimulusSet stimulus(const std::string& name) {
  return dclab::deserialize_stimulus(read("stimuli/" + name + ".json"));
}

}  // namespace bench
