#include <benchmark/benchmark.h>

#include "dclab/sim.hpp"
#include "dclab/trace.hpp"
#include "fixtures.hpp"

using namespace dclab;

namespace {

void BM_CounterSixtyOneEdges(benchmark::State& state) {
  Circuit c = bench::circuit("counter_mod60");
  StimulusSet s = bench::stimulus("counter");
  SimConfig cfg;
  cfg.horizon_ns = s.horizon_ns;
  cfg.watch = state.range(0) ? WatchMode::AllNets : WatchMode::Ports;
  for (auto _ : state) benchmark::DoNotOptimize(simulate(c, s, cfg, ComponentRegistry::builtin()));
}
BENCHMARK(BM_CounterSixtyOneEdges)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

// Counter over many more clock periods: throughput of the event loop.
void BM_CounterLongRun(benchmark::State& state) {
  Circuit c = bench::circuit("counter_mod60");
  StimulusSet s;
  s.assignments["clk"] = SignalSpec::clock(1e6);
  s.horizon_ns = static_cast<TimeNs>(state.range(0)) * 1000;
  SimConfig cfg;
  cfg.horizon_ns = s.horizon_ns;
  cfg.watch = WatchMode::Ports;
  for (auto _ : state) benchmark::DoNotOptimize(simulate(c, s, cfg, ComponentRegistry::builtin()));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_CounterLongRun)->Arg(1000)->Arg(10000)->Unit(benchmark::kMillisecond);

void BM_Adder283Exhaustive(benchmark::State& state) {
  Circuit c = bench::circuit("adder283");
  StimulusSet s = bench::stimulus("adder283");
  SimConfig cfg;
  cfg.horizon_ns = s.horizon_ns;
  for (auto _ : state) benchmark::DoNotOptimize(simulate(c, s, cfg, ComponentRegistry::builtin()));
}
BENCHMARK(BM_Adder283Exhaustive)->Unit(benchmark::kMicrosecond);

void BM_ExportVcd(benchmark::State& state) {
  Circuit c = bench::circuit("counter_mod60");
  StimulusSet s = bench::stimulus("counter");
  SimConfig cfg;
  cfg.horizon_ns = s.horizon_ns;
  Trace t = simulate(c, s, cfg, ComponentRegistry::builtin()).trace;
  for (auto _ : state) benchmark::DoNotOptimize(export_vcd(t));
}
BENCHMARK(BM_ExportVcd)->Unit(benchmark::kMicrosecond);

void BM_Validate(benchmark::State& state) {
  Circuit c = bench::circuit("counter_mod60");
  for (auto _ : state) benchmark::DoNotOptimize(validate_circuit(c, ComponentRegistry::builtin()));
}
BENCHMARK(BM_Validate)->Unit(benchmark::kMicrosecond);

}  // namespace
