#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "dclab/design.hpp"
#include "dclab/grader.hpp"
#include "dclab/netlist.hpp"
#include "dclab/sim.hpp"
#include "dclab/stimulus.hpp"

namespace dclab::test {

/// Absolute path of a file under tests/fixtures.
std::string fixture_path(const std::string& rel);
std::string read_text(const std::string& path);
std::string fixture(const std::string& rel);

Circuit load_circuit(const std::string& name);      // circuits/<name>.json
StimulusSet load_stimulus(const std::string& name);  // stimuli/<name>.json
std::vector<TestPoint> load_test_points(const std::string& name);
VhdlSource load_vhdl(const std::string& file, const std::string& top = "");

/// Rows of truth_tables/<part>.json whose outputs disagree with the model,
/// counting one per output bit. Throws if the table is not exhaustive.
std::size_t truth_table_mismatches(const std::string& part);

struct CorpusEntry {
  std::string circuit;
  std::string stimulus;
};

/// Fault-free corpus circuits paired with their stimuli.
std::vector<CorpusEntry> corpus();

SimResult run(const Circuit& c, const StimulusSet& s, WatchMode watch = WatchMode::Ports);

/// Simulates `c` directly and through emit_vhdl + emit_testbench, then
/// compares every top port at default_sample_times(s, 0). Returns one line per
/// disagreement.
std::vector<std::string> vhdl_round_trip_mismatches(const Circuit& c, const StimulusSet& s);

// --- random combinational circuits -----------------------------------------------

enum class GateOp { Nand, Nor, Not, And, Or, Xor };

struct Gate {
  GateOp op;
  int a = 0;  // signal indices; inputs are 0..n_inputs-1
  int b = 0;
};

struct RandomCircuit {
  int n_inputs = 0;
  std::vector<Gate> gates;  // gate g drives signal n_inputs + g
  std::vector<int> outputs;
  Circuit circuit;
};

/// A DAG of catalog gates (74LS00/02/04/08/32/86) with `n_inputs` top inputs.
RandomCircuit random_circuit(std::uint64_t seed, int n_inputs, int n_gates);

/// Brute-force functional composition: output bits for input assignment
/// `bits` (bit i = input i).
std::vector<bool> evaluate(const RandomCircuit& rc, std::uint32_t bits);

/// Applies every input assignment for `period_ns` and compares the settled
/// outputs (sampled at the end of each slot) with evaluate(). Returns the
/// number of mismatching (assignment, output) pairs.
std::size_t oracle_mismatches(const RandomCircuit& rc, TimeNs period_ns = 1000);

}  // namespace dclab::test
