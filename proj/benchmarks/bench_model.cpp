#include <random>

#include <benchmark/benchmark.h>

#include "hierseg/hierarchy.hpp"
#include "hierseg/loss.hpp"
#include "hierseg/model.hpp"

namespace {

using namespace hierseg;

Tensor3 random_image(int size) {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  Tensor3 t(3, size, size);
  for (double& v : t.values()) v = u(rng);
  return t;
}

void BM_Forward(benchmark::State& state) {
  const auto net = DualBranchNet::initialized({}, 1);
  const auto image = random_image(static_cast<int>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(net.forward(image));
}
BENCHMARK(BM_Forward)->Arg(32)->Arg(64)->Arg(128);

void BM_ForwardBackward(benchmark::State& state) {
  const int size = static_cast<int>(state.range(0));
  const auto h = default_occlusal_hierarchy();
  const auto net = DualBranchNet::initialized({}, 1);
  const auto image = random_image(size);
  TargetField target(size, size);
  for (int y = 0; y < size; ++y)
    for (int x = 0; x < size; ++x) target.at(y, x) = (x * 3 / size) % 3;
  std::vector<double> grad(net.parameters().size());
  for (auto _ : state) {
    benchmark::DoNotOptimize(net.accumulate_gradient(image, target, h, {}, grad));
    benchmark::ClobberMemory();
  }
}
BENCHMARK(BM_ForwardBackward)->Arg(32)->Arg(64)->Arg(128);

}  // namespace
