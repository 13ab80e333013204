// OpenMP kernels against their serial references on random matrices over Z/3^6.

#include "kisinlab/linalg.hpp"

#include <benchmark/benchmark.h>

#include <random>
#include <stdexcept>

using namespace kl;

namespace {

const ChainContext kCtx{3, 6};

ChainMatrix random_matrix(std::size_t r, std::size_t k, unsigned seed) {
  std::mt19937_64 rng(seed);
  ChainMatrix a(kCtx, r, k);
  const Word m = kCtx.modulus();
  for (std::size_t i = 0; i < r; ++i)
    for (std::size_t j = 0; j < k; ++j)
      a(i, j) = rng() % m;
  return a;
}

void BM_Howell(benchmark::State &state) {
  auto n = static_cast<std::size_t>(state.range(0));
  auto a = random_matrix(n, n, 1);
  for (auto _ : state)
    benchmark::DoNotOptimize(howell(a));
}

void BM_HowellSerial(benchmark::State &state) {
  auto n = static_cast<std::size_t>(state.range(0));
  auto a = random_matrix(n, n, 1);
  if (!(howell_serial(a) == howell(a)))
    throw std::logic_error("parallel and serial Howell forms differ");
  for (auto _ : state)
    benchmark::DoNotOptimize(howell_serial(a));
}

void BM_Multiply(benchmark::State &state) {
  auto n = static_cast<std::size_t>(state.range(0));
  auto a = random_matrix(n, n, 2), b = random_matrix(n, n, 3);
  for (auto _ : state)
    benchmark::DoNotOptimize(multiply(a, b));
}

void BM_MultiplySerial(benchmark::State &state) {
  auto n = static_cast<std::size_t>(state.range(0));
  auto a = random_matrix(n, n, 2), b = random_matrix(n, n, 3);
  if (!(multiply_serial(a, b) == multiply(a, b)))
    throw std::logic_error("parallel and serial products differ");
  for (auto _ : state)
    benchmark::DoNotOptimize(multiply_serial(a, b));
}

} // namespace

BENCHMARK(BM_Howell)->Arg(64)->Arg(128)->Arg(256)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_HowellSerial)->Arg(64)->Arg(128)->Arg(256)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_Multiply)->Arg(64)->Arg(128)->Arg(256)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_MultiplySerial)->Arg(64)->Arg(128)->Arg(256)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
