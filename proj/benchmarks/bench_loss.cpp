#include <random>

#include <benchmark/benchmark.h>

#include "hierseg/hierarchy.hpp"
#include "hierseg/loss.hpp"

namespace {

using namespace hierseg;

struct Inputs {
  LogitField logits;
  TargetField target;
};

Inputs make_inputs(int size, int leaves) {
  std::mt19937_64 rng(3);
  std::normal_distribution<double> n(0.0, 2.0);
  std::uniform_int_distribution<int> cls(0, leaves - 1);
  Inputs in{LogitField(size, size, leaves), TargetField(size, size)};
  for (double& v : in.logits.values()) v = n(rng);
  for (int y = 0; y < size; ++y)
    for (int x = 0; x < size; ++x) in.target.at(y, x) = cls(rng);
  return in;
}

void BM_CombinedLoss(benchmark::State& state) {
  const auto h = default_occlusal_hierarchy();
  const auto in = make_inputs(static_cast<int>(state.range(0)), h.num_leaves());
  for (auto _ : state) benchmark::DoNotOptimize(combined_loss(in.logits, in.target, h));
  state.SetItemsProcessed(state.iterations() * state.range(0) * state.range(0));
}
BENCHMARK(BM_CombinedLoss)->Arg(64)->Arg(128)->Arg(256);

void BM_CombinedLossWithGrad(benchmark::State& state) {
  const auto h = default_occlusal_hierarchy();
  const auto in = make_inputs(static_cast<int>(state.range(0)), h.num_leaves());
  GradientField grad;
  for (auto _ : state) {
    benchmark::DoNotOptimize(combined_loss_with_grad(in.logits, in.target, h, {}, grad));
    benchmark::ClobberMemory();
  }
  state.SetItemsProcessed(state.iterations() * state.range(0) * state.range(0));
}
BENCHMARK(BM_CombinedLossWithGrad)->Arg(64)->Arg(128)->Arg(256);

}  // namespace
