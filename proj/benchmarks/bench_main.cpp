#include <benchmark/benchmark.h>

#include <string>
#include <vector>

#include "esdiv/kernels.hpp"
#include "esdiv/metrics.hpp"
#include "esdiv/rng.hpp"
#include "esdiv/stats.hpp"

using namespace esdiv;

namespace {

std::string synthetic_program(int statements, int salt) {
  std::string src = "def f(xs):\n    total = 0\n";
  for (int i = 0; i < statements; ++i) {
    src += "    if xs[" + std::to_string(i % 7) + "] > " + std::to_string((i * salt) % 11) + ":\n";
    src += "        total += xs[" + std::to_string(i % 5) + "] * " + std::to_string(i) + "\n";
  }
  src += "    return total\n";
  return src;
}

void BM_Tokenize(benchmark::State& state) {
  const auto src = synthetic_program(static_cast<int>(state.range(0)), 3);
  for (auto _ : state) benchmark::DoNotOptimize(tokenize(src));
  state.SetBytesProcessed(static_cast<int64_t>(state.iterations() * src.size()));
}
BENCHMARK(BM_Tokenize)->Arg(10)->Arg(100)->Arg(1000);

void BM_LexicalPair(benchmark::State& state) {
  const auto a = tokenize(synthetic_program(static_cast<int>(state.range(0)), 3));
  const auto b = tokenize(synthetic_program(static_cast<int>(state.range(0)), 5));
  for (auto _ : state) benchmark::DoNotOptimize(pair_lexical_distance(a, b, 4, 5000));
}
BENCHMARK(BM_LexicalPair)->Arg(10)->Arg(100)->Arg(1000);

void BM_CanonicalizeAndFragments(benchmark::State& state) {
  const auto src = synthetic_program(static_cast<int>(state.range(0)), 3);
  for (auto _ : state) {
    auto ast = std::get<CanonicalAst>(canonicalize_ast(src));
    benchmark::DoNotOptimize(extract_fragments(ast));
  }
}
BENCHMARK(BM_CanonicalizeAndFragments)->Arg(10)->Arg(100)->Arg(1000);

void BM_SyntacticPair(benchmark::State& state) {
  const auto n = static_cast<int>(state.range(0));
  const auto a = extract_fragments(std::get<CanonicalAst>(canonicalize_ast(synthetic_program(n, 3))));
  const auto b = extract_fragments(std::get<CanonicalAst>(canonicalize_ast(synthetic_program(n, 5))));
  for (auto _ : state) benchmark::DoNotOptimize(pair_syntactic_distance(a, b));
}
BENCHMARK(BM_SyntacticPair)->Arg(10)->Arg(100)->Arg(1000);

void BM_DivPairExhaustive(benchmark::State& state) {
  Rng rng(1);
  std::vector<SetEntry> set;
  for (int64_t i = 0; i < state.range(0); ++i) {
    const auto c = rng.below(6);
    set.push_back(SetEntry{c != 0, "c" + std::to_string(c)});
  }
  for (auto _ : state) benchmark::DoNotOptimize(div_pair(set));
}
BENCHMARK(BM_DivPairExhaustive)->Arg(32)->Arg(256)->Arg(2048);

void BM_SamplePairs(benchmark::State& state) {
  for (auto _ : state) benchmark::DoNotOptimize(sample_pairs(64, static_cast<std::size_t>(state.range(0)), 9));
}
BENCHMARK(BM_SamplePairs)->Arg(32)->Arg(300);

void BM_Wilcoxon(benchmark::State& state) {
  Rng rng(2);
  PairedSample s;
  for (int64_t i = 0; i < state.range(0); ++i) {
    s.labels.push_back(std::to_string(i));
    s.a.push_back(rng.uniform());
    s.b.push_back(rng.uniform());
  }
  for (auto _ : state) benchmark::DoNotOptimize(wilcoxon_signed_rank(s));
}
BENCHMARK(BM_Wilcoxon)->Arg(12)->Arg(25)->Arg(200);

}  // namespace
BENCHMARK_MAIN();
