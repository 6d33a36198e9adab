#include <benchmark/benchmark.h>

#include <random>

#include "thurston/curves.hpp"
#include "thurston/json_io.hpp"
#include "thurston/pullback.hpp"
#include "thurston/qdiff.hpp"

using namespace thurston;

namespace {

nlohmann::json load(const std::string& rel) { return json_io::read_file(std::string(THURSTON_FIXTURES) + "/" + rel); }

void BM_LeadingEigenvalue(benchmark::State& state) {
  const TransitionMatrix a({{0, 1, 0}, {0, 0, 1}, {Rational(1, 2), Rational(1, 3), Rational(1, 4)}});
  const Rational tol("1/1000000000000");
  for (auto _ : state) benchmark::DoNotOptimize(leading_eigenvalue(a, tol));
}
BENCHMARK(BM_LeadingEigenvalue);

void BM_L1Norm(benchmark::State& state) {
  const QuadDiff q = quad_diff_from_json(load("qd/even.json"));
  for (auto _ : state) benchmark::DoNotOptimize(l1_norm(q));
}
BENCHMARK(BM_L1Norm)->Unit(benchmark::kMillisecond);

void BM_PushForward(benchmark::State& state) {
  const RealizedMap g = json_io::map_from_json(load("maps/square.json"));
  const QuadDiff q = quad_diff_from_json(load("qd/even.json"));
  for (auto _ : state) benchmark::DoNotOptimize(push_forward(g, q));
}
BENCHMARK(BM_PushForward);

void BM_RealizeRabbit(benchmark::State& state) {
  const Portrait p = portrait_from_json(load("portraits/rabbit.json"));
  const Configuration c0 = configuration_from_json(load("init/rabbit.json"));
  for (auto _ : state) benchmark::DoNotOptimize(iterate(p, c0, {}));
}
BENCHMARK(BM_RealizeRabbit)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
