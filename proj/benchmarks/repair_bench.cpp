// SPDX-License-Identifier: Apache-2.0
#include <benchmark/benchmark.h>

#include <string>

#include "sdoh/linearizer.hpp"

namespace {

std::string long_note(std::size_t sentences) {
  std::string s = "Social History:\n";
  for (std::size_t i = 0; i < sentences; ++i) s += "Mom reports the family is doing well at home. ";
  return s + "Dad smokes cigarettes outside.";
}

void BM_RepairExact(benchmark::State& state) {
  const std::string doc = long_note(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(sdoh::repair_span("SMOKES  cigarettes", doc));
}
BENCHMARK(BM_RepairExact)->Arg(10)->Arg(100);

void BM_RepairFuzzy(benchmark::State& state) {
  const std::string doc = long_note(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(sdoh::repair_span("smokes cigarets", doc));
}
BENCHMARK(BM_RepairFuzzy)->Arg(10)->Arg(100);

}  // namespace
