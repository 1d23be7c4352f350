// OpenMP kernels against the serial reference on desk-scale shapes.
#include <benchmark/benchmark.h>

#include <random>

#include "camsic/kernels.hpp"

namespace {

camsic::Tensor random_tensor(camsic::Shape shape, unsigned seed) {
  std::mt19937 rng(seed);
  std::uniform_real_distribution<float> d(-1.0f, 1.0f);
  camsic::Tensor t(shape);
  for (auto& v : t.data()) v = d(rng);
  return t;
}

// Analysis layer 2: 32 channels, 64x64 input, 5x5 stride 2.
void BM_Conv2dOmp(benchmark::State& state) {
  const auto x = random_tensor({32, 64, 64}, 1), w = random_tensor({32, 32, 5, 5}, 2), b = random_tensor({32}, 3);
  for (auto _ : state) benchmark::DoNotOptimize(camsic::nn::conv2d(x, w, b, 2, 2));
}
void BM_Conv2dReference(benchmark::State& state) {
  const auto x = random_tensor({32, 64, 64}, 1), w = random_tensor({32, 32, 5, 5}, 2), b = random_tensor({32}, 3);
  for (auto _ : state) benchmark::DoNotOptimize(camsic::nn::reference::conv2d(x, w, b, 2, 2));
}

void BM_ConvTranspose2dOmp(benchmark::State& state) {
  const auto x = random_tensor({32, 16, 16}, 4), w = random_tensor({32, 32, 5, 5}, 5), b = random_tensor({32}, 6);
  for (auto _ : state) benchmark::DoNotOptimize(camsic::nn::conv_transpose2d(x, w, b, 2, 2, 1));
}
void BM_ConvTranspose2dReference(benchmark::State& state) {
  const auto x = random_tensor({32, 16, 16}, 4), w = random_tensor({32, 32, 5, 5}, 5), b = random_tensor({32}, 6);
  for (auto _ : state) benchmark::DoNotOptimize(camsic::nn::reference::conv_transpose2d(x, w, b, 2, 2, 1));
}

// Transformer MLP on a 16x16 token grid.
void BM_LinearOmp(benchmark::State& state) {
  const auto x = random_tensor({256, 64}, 7), w = random_tensor({128, 64}, 8), b = random_tensor({128}, 9);
  for (auto _ : state) benchmark::DoNotOptimize(camsic::nn::linear(x, w, b));
}
void BM_LinearReference(benchmark::State& state) {
  const auto x = random_tensor({256, 64}, 7), w = random_tensor({128, 64}, 8), b = random_tensor({128}, 9);
  for (auto _ : state) benchmark::DoNotOptimize(camsic::nn::reference::linear(x, w, b));
}

void BM_MatmulOmp(benchmark::State& state) {
  const auto a = random_tensor({128, 128}, 10), b = random_tensor({128, 128}, 11);
  for (auto _ : state) benchmark::DoNotOptimize(camsic::nn::matmul(a, b));
}
void BM_MatmulReference(benchmark::State& state) {
  const auto a = random_tensor({128, 128}, 10), b = random_tensor({128, 128}, 11);
  for (auto _ : state) benchmark::DoNotOptimize(camsic::nn::reference::matmul(a, b));
}

}  // namespace

BENCHMARK(BM_Conv2dOmp);
BENCHMARK(BM_Conv2dReference);
BENCHMARK(BM_ConvTranspose2dOmp);
BENCHMARK(BM_ConvTranspose2dReference);
BENCHMARK(BM_LinearOmp);
BENCHMARK(BM_LinearReference);
BENCHMARK(BM_MatmulOmp);
BENCHMARK(BM_MatmulReference);
BENCHMARK_MAIN();
