#include <benchmark/benchmark.h>

#include "dclab/vhdl/vhdl.hpp"
#include "fixtures.hpp"

using namespace dclab;
using namespace dclab::vhdl;

namespace {

void BM_EmitCounter(benchmark::State& state) {
  Circuit c = bench::circuit("counter_mod60");
  for (auto _ : state) benchmark::DoNotOptimize(emit_vhdl(c, ComponentRegistry::builtin()));
}
BENCHMARK(BM_EmitCounter)->Unit(benchmark::kMicrosecond);

void BM_ParseAndElaborateEmittedCounter(benchmark::State& state) {
  auto units = emit_vhdl(bench::circuit("counter_mod60"), ComponentRegistry::builtin());
  std::string top = top_entity_name(bench::circuit("counter_mod60"));
  for (auto _ : state) benchmark::DoNotOptimize(compile_vhdl(units, top, ComponentRegistry::builtin()));
}
BENCHMARK(BM_ParseAndElaborateEmittedCounter)->Unit(benchmark::kMillisecond);

void BM_SimulateBehaviouralCounter(benchmark::State& state) {
  std::vector<VhdlUnit> units{{"counter60.vhd", bench::read("vhdl/counter60.vhd"), UnitKind::EntityArch}};
  ElaboratedDesign d = compile_vhdl(units, "counter60", ComponentRegistry::builtin());
  StimulusSet s = bench::stimulus("counter");
  SimConfig cfg;
  cfg.horizon_ns = s.horizon_ns;
  cfg.watch = WatchMode::Ports;
  for (auto _ : state) benchmark::DoNotOptimize(simulate_elaborated(d, s, cfg));
}
BENCHMARK(BM_SimulateBehaviouralCounter)->Unit(benchmark::kMillisecond);

}  // namespace
