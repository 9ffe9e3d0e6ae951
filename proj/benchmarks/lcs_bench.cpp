#include <benchmark/benchmark.h>

#include <random>

#include "patch_triage/classifier.hpp"

namespace {

patch_triage::TokenSequence random_tokens(std::mt19937_64& rng, std::size_t n) {
  static const char* const kTokens[] = {"INS:if_statement", "INS:return_statement", "UPD:identifier:len",
                                        "DEL:call_expression", "MOV:expression_statement:compound_statement"};
  std::uniform_int_distribution<int> pick(0, 4);
  patch_triage::TokenSequence out(n);
  for (auto& t : out) t = kTokens[pick(rng)];
  return out;
}

void BM_LcsSimilarity(benchmark::State& state) {
  std::mt19937_64 rng(1);
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto a = random_tokens(rng, n), b = random_tokens(rng, n);
  for (auto _ : state) benchmark::DoNotOptimize(patch_triage::lcs_similarity(a, b));
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_LcsSimilarity)->RangeMultiplier(4)->Range(8, 2048)->Complexity(benchmark::oNSquared);

}  // namespace

BENCHMARK_MAIN();
