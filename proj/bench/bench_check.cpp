// SPDX-License-Identifier: Apache-2.0
// Compiled parallel checker, compiled serial and the serial reference on fixture hosts.
// All variants share one exhaustive limit so they cover the same instances.
#include <benchmark/benchmark.h>

#include "pcat/io.hpp"

using namespace pcat;

namespace {

constexpr std::int64_t kLimit = 3'000'000;
const char* const kHosts[] = {"powerset.pc", "luk5.pc", "chain3.pc"};

PropPtr host(const std::string& name) {
  static Workspace ws;
  return ws.propcat(std::string(PCAT_FIXTURES) + "/" + name);
}

template <bool Reference, bool Parallel>
void BM_check(benchmark::State& st) {
  PropPtr P = host(kHosts[st.range(0)]);
  CheckOptions o;
  o.exhaustive_limit = kLimit;
  o.parallel = Parallel;
  std::int64_t checked = 0;
  for (auto _ : st) {
    FaReport r = Reference ? check_fa_reference(*P, o) : check_fa(*P, o);
    checked = 0;
    for (const auto& s : r.stats) checked += s.checked;
    benchmark::DoNotOptimize(r.ok);
  }
  st.SetLabel(kHosts[st.range(0)]);
  st.counters["instances"] = static_cast<double>(checked);
  st.counters["rate"] = benchmark::Counter(static_cast<double>(checked), benchmark::Counter::kIsIterationInvariantRate);
}

}  // namespace

BENCHMARK(BM_check<false, true>)->Name("compiled_parallel")->DenseRange(0, 2)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_check<false, false>)->Name("compiled_serial")->DenseRange(0, 2)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_check<true, false>)->Name("reference")->DenseRange(0, 2)->Unit(benchmark::kMillisecond);
BENCHMARK_MAIN();
