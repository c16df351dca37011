#include <benchmark/benchmark.h>

#include "quantcal/conformal/calibrate.hpp"
#include "quantcal/datasim/phantom.hpp"
#include "quantcal/numerics/ops.hpp"
#include "quantcal/pdfest/pdf.hpp"
#include "quantcal/qnet/model.hpp"
#include "quantcal/qnet/oracles.hpp"
#include "quantcal/training/pinball.hpp"

using namespace quantcal;

namespace {

Tensor random_tensor(const Shape& shape, std::uint64_t seed) {
  Rng rng(seed);
  std::normal_distribution<double> z;
  Tensor t(shape);
  for (auto& v : t.data()) v = z(rng);
  return t;
}

ArchConfig arch_for(std::int64_t width) {
  ArchConfig a;
  a.channels = {static_cast<std::size_t>(width), static_cast<std::size_t>(2 * width)};
  return a;
}

}  // namespace

void BM_Conv2d(benchmark::State& state) {
  const auto c = static_cast<std::size_t>(state.range(0));
  const Tensor x = random_tensor({c, 32, 32}, 1), k = random_tensor({c, c, 3, 3}, 2);
  for (auto _ : state) benchmark::DoNotOptimize(conv2d(x, k, 1));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(c * c * 9 * 32 * 32));
}
BENCHMARK(BM_Conv2d)->Arg(8)->Arg(16)->Arg(32);

void BM_Forward(benchmark::State& state) {
  const QuantileModel model(arch_for(state.range(0)), 1);
  const Tensor y = gen_phantom(1, 32, 32);
  for (auto _ : state) benchmark::DoNotOptimize(model.predict(y, 0.3));
}
BENCHMARK(BM_Forward)->Arg(8)->Arg(16)->Unit(benchmark::kMillisecond);

void BM_ForwardBackward(benchmark::State& state) {
  const QuantileModel model(arch_for(state.range(0)), 1);
  const Tensor y = gen_phantom(1, 32, 32), x = gen_phantom(2, 32, 32);
  for (auto _ : state) {
    Tape tape;
    const auto vars = model.attach(tape, true);
    tape.backward(pinball_loss(model.forward(tape, vars, y, 0.3), x, 0.3));
    benchmark::DoNotOptimize(tape.grad(vars.front()));
  }
}
BENCHMARK(BM_ForwardBackward)->Arg(8)->Arg(16)->Unit(benchmark::kMillisecond);

void BM_CalibrateOracle(benchmark::State& state) {
  PairedDataset calib;
  Rng rng(3);
  std::normal_distribution<double> z;
  for (int i = 0; i < 100; ++i) {
    Tensor y = gen_phantom(static_cast<std::uint64_t>(i), 32, 32), x = y;
    for (auto& v : x.data()) v += 0.1 * z(rng);
    calib.push_back({x, y, "gaussian", 0.1});
  }
  const GaussianQuantileOracle oracle(0.1);
  for (auto _ : state) benchmark::DoNotOptimize(calibrate(oracle, calib, 0.1));
}
BENCHMARK(BM_CalibrateOracle)->Unit(benchmark::kMillisecond);

void BM_PdfFromQuantiles(benchmark::State& state) {
  const GaussianQuantileOracle oracle(0.1);
  const auto sweep = monotonize(quantile_sweep(oracle, gen_phantom(4, 32, 32), default_q_grid()));
  for (auto _ : state) benchmark::DoNotOptimize(pdf_from_quantiles(sweep));
}
BENCHMARK(BM_PdfFromQuantiles)->Unit(benchmark::kMicrosecond);
BENCHMARK_MAIN();
