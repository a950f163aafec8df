#include <benchmark/benchmark.h>

#include "recsub/automata.hpp"
#include "recsub/coinductive.hpp"
#include "recsub/harness.hpp"
#include "recsub/tree.hpp"

using namespace recsub;

namespace {

GlobalEnv smallEnv() {
  GlobalEnv env;
  env.entries.push_back({"C", tyFun(tyFree("C"), tyFree("C"))});
  env.entries.push_back({"A", tyFun(tyFree("A"), tyFree("C"))});
  return env;
}

void BM_CoinductiveFamily(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  GlobalEnv env;
  Ty l = benchFamily(n);
  Ty r = benchFamilyMutated(n);
  for (auto _ : state) {
    Checker ch(env, 100000000);
    benchmark::DoNotOptimize(ch.check(l, r, Relation::Sub));
  }
  state.SetComplexityN(n);
}
BENCHMARK(BM_CoinductiveFamily)->Arg(50)->Arg(100)->Arg(200)->Complexity();

void BM_AutomataFamily(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  GlobalEnv env;
  TreeAutomaton l = automataof(benchFamily(n));
  TreeAutomaton r = automataof(benchFamilyMutated(n));
  for (auto _ : state)
    benchmark::DoNotOptimize(
        subtypeAutomata(env, l, r, Relation::Sub, 100000000));
  state.SetComplexityN(n);
}
BENCHMARK(BM_AutomataFamily)->Arg(50)->Arg(100)->Arg(200)->Complexity();

void BM_AutomatonConstruction(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  Ty t = benchFamily(n);
  for (auto _ : state) benchmark::DoNotOptimize(automataof(t));
  state.SetComplexityN(n);
}
BENCHMARK(BM_AutomatonConstruction)->Arg(50)->Arg(200)->Arg(800)->Complexity();

void BM_OracleUnrolling(benchmark::State& state) {
  const int depth = static_cast<int>(state.range(0));
  GlobalEnv env = smallEnv();
  Ty l = tyRec(tyFun(tyFree("A"), tyVar(0)));
  Ty r = tyFun(tyFree("A"), l);
  for (auto _ : state)
    benchmark::DoNotOptimize(
        oracleCheck(env, {}, l, r, Relation::Eq, depth));
  state.SetComplexityN(depth);
}
BENCHMARK(BM_OracleUnrolling)->Arg(16)->Arg(32)->Arg(64)->Complexity();

void BM_FuzzThroughput(benchmark::State& state) {
  std::uint64_t seed = 1;
  for (auto _ : state)
    benchmark::DoNotOptimize(runFuzz(seed++, 20, 10, 1000000, 32, false));
}
BENCHMARK(BM_FuzzThroughput);

}  // namespace

BENCHMARK_MAIN();
