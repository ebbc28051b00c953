#include <benchmark/benchmark.h>

#include <random>

#include "xmv/embedding.hpp"
#include "xmv/eval.hpp"
#include "xmv/head.hpp"
#include "xmv/mining.hpp"
#include "xmv/synth.hpp"

namespace {

using namespace xmv;

std::vector<Embedding> random_unit(std::size_t n, std::size_t dim, std::uint64_t seed) {
  std::mt19937_64 g(seed);
  std::normal_distribution<double> nd;
  std::vector<Embedding> out;
  out.reserve(n);
  std::vector<double> v(dim);
  for (std::size_t i = 0; i < n; ++i) {
    for (auto& x : v) x = nd(g);
    out.push_back(l2_normalize(v));
  }
  return out;
}

void BM_CrossModalScores(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto dim = static_cast<std::size_t>(state.range(1));
  const auto docs = random_unit(n, dim, 1);
  const auto selfies = random_unit(n, dim, 2);
  for (auto _ : state) {
    benchmark::DoNotOptimize(cross_modal_scores(docs, selfies, 0));
  }
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(n * n));
}
BENCHMARK(BM_CrossModalScores)->Args({600, 128})->Args({2642, 128})->Args({2642, 512})
    ->Unit(benchmark::kMillisecond);

void BM_TarAtFar(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  std::mt19937_64 g(3);
  std::normal_distribution<double> nd(0.0, 0.2);
  ScoreSet s;
  for (std::size_t i = 0; i < n; ++i) s.authentic.push_back(nd(g) + 0.5);
  for (std::size_t i = 0; i < n * (n - 1); ++i) s.impostor.push_back(nd(g));
  for (auto _ : state) {
    benchmark::DoNotOptimize(tar_at_far(s, 1e-4));
  }
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(s.impostor.size()));
}
BENCHMARK(BM_TarAtFar)->Arg(600)->Arg(2000)->Unit(benchmark::kMillisecond);

struct TrainingFixture {
  PairedDataset data;
  EmbeddingHead head;

  TrainingFixture() {
    SynthConfig sc;
    sc.n_train_subjects = 5000;
    sc.n_test_per_subset = 2;
    sc.seed = 4;
    data = generate(sc).train;
    head = EmbeddingHead::identity(data.dim());
  }
};

const TrainingFixture& fixture() {
  static const TrainingFixture f;
  return f;
}

void BM_MineSemiHard(benchmark::State& state) {
  const auto& f = fixture();
  Rng rng(5);
  const MiningBatch batch = sample_batch(f.data, static_cast<std::size_t>(state.range(0)), rng);
  const auto emb = forward_all(f.head, batch.features(f.data), 1);
  for (auto _ : state) {
    benchmark::DoNotOptimize(mine_semi_hard(batch, emb, 0.3, rng));
  }
}
BENCHMARK(BM_MineSemiHard)->Arg(240)->Arg(480)->Unit(benchmark::kMicrosecond);

// One full optimisation step: sample, embed, mine, gradient, update.
void BM_TrainStep(benchmark::State& state) {
  const auto& f = fixture();
  EmbeddingHead head = f.head;
  std::vector<double> velocity(head.num_params(), 0.0);
  Rng rng(6);
  std::vector<TripletFeatures> feats;
  for (auto _ : state) {
    const MiningBatch batch = sample_batch(f.data, 240, rng);
    const auto inputs = batch.features(f.data);
    const auto emb = forward_all(head, inputs, 1);
    const auto ts = mine_semi_hard(batch, emb, 0.3, rng);
    feats.clear();
    for (const auto& t : ts) feats.push_back({inputs[t.anchor], inputs[t.positive], inputs[t.negative]});
    if (!feats.empty()) {
      const LossGradient lg = loss_and_gradient(head, feats, 0.3);
      sgd_momentum_step(head.params(), lg.grad, velocity, 0.005, 0.9);
    }
  }
}
BENCHMARK(BM_TrainStep)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
