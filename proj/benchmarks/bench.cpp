#include <benchmark/benchmark.h>

#include "kffnn/dataset.hpp"
#include "kffnn/experiment.hpp"
#include "kffnn/ffnn.hpp"
#include "kffnn/knowledge.hpp"
#include "kffnn/lstm.hpp"
#include "kffnn/rnn.hpp"

using namespace kffnn;

namespace {

Dataset bench_data(std::size_t count) {
  GenerationMeta m;
  m.count = count;
  m.envelope = Envelope::fn1();
  m.noise_sigma = 0.1;
  m.seed = 1;
  return generate_synthetic(m);
}

TrainConfig bench_cfg(std::size_t epochs) {
  TrainConfig cfg;
  cfg.epochs = epochs;
  return cfg;
}

}  // namespace

static void BM_MatvecTransposed(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  Matrix m(n, n, 0.5);
  Vector v(n, 1.0);
  for (auto _ : state) benchmark::DoNotOptimize(matvec_transposed(m, v));
}
BENCHMARK(BM_MatvecTransposed)->Arg(21)->Arg(64);

static void BM_FfnnBackward(benchmark::State& state) {
  Rng rng(1);
  const auto model = FfnnModel::random(21, bench_cfg(1), rng);
  Vector x(21, 0.2);
  for (auto _ : state) benchmark::DoNotOptimize(ffnn_backward(model, x, 1.0));
}
BENCHMARK(BM_FfnnBackward);

static void BM_RnnBptt(benchmark::State& state) {
  Rng rng(1);
  const auto model = RnnModel::random(21, bench_cfg(1), rng);
  const std::vector<Vector> seq(static_cast<std::size_t>(state.range(0)), Vector(21, 0.2));
  for (auto _ : state) benchmark::DoNotOptimize(rnn_bptt(model, seq, 1.0));
}
BENCHMARK(BM_RnnBptt)->Arg(8)->Arg(12);

static void BM_LstmBackward(benchmark::State& state) {
  Rng rng(1);
  const auto dir = state.range(0) ? Direction::Bidirectional : Direction::Forward;
  const auto model = LstmModel::random(21, bench_cfg(1), dir, rng);
  const std::vector<Vector> seq(10, Vector(21, 0.2));
  for (auto _ : state) benchmark::DoNotOptimize(lstm_backward(model, seq, 1.0));
}
BENCHMARK(BM_LstmBackward)->Arg(0)->Arg(1);

static void BM_KffnnEpoch(benchmark::State& state) {
  const auto samples = infuse_dataset(bench_data(200), Envelope::fn1());
  for (auto _ : state) benchmark::DoNotOptimize(ffnn_train(samples, bench_cfg(1)));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(samples.size()));
}
BENCHMARK(BM_KffnnEpoch)->Unit(benchmark::kMillisecond);

static void BM_RnnEpoch(benchmark::State& state) {
  const auto seqs = to_sequences(bench_data(200));
  for (auto _ : state) benchmark::DoNotOptimize(rnn_train(seqs, bench_cfg(1)));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(seqs.size()));
}
BENCHMARK(BM_RnnEpoch)->Unit(benchmark::kMillisecond);

static void BM_Generate(benchmark::State& state) {
  for (auto _ : state) benchmark::DoNotOptimize(bench_data(1000));
}
BENCHMARK(BM_Generate)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
