#include <benchmark/benchmark.h>

#include "dialectid/corpus.hpp"
#include "dialectid/encoder.hpp"
#include "dialectid/naive_bayes.hpp"
#include "dialectid/normalize.hpp"
#include "dialectid/rng.hpp"
#include "dialectid/tokenizer.hpp"

using namespace dialectid;

namespace {

Dataset corpus(std::size_t classes, std::size_t per_class, double surface_noise) {
  SyntheticSpec spec;
  spec.num_classes = classes;
  spec.default_count = per_class;
  spec.surface_noise = surface_noise;
  spec.seed = 1;
  return generate_synthetic(spec);
}

std::vector<Encoding> batch_of(const Vocab& v, const Dataset& ds, std::size_t n, std::size_t max_len) {
  std::vector<Encoding> out;
  for (std::size_t i = 0; i < n; ++i) out.push_back(encode(ds.examples[i % ds.size()].text, v, {max_len, true}));
  return trim_padding(out);
}

}  // namespace

static void BM_Normalize(benchmark::State& state) {
  const auto ds = corpus(10, 100, 0.5);
  const auto lex = AffixLexicon::defaults();
  const NormalizeConfig cfg;
  std::size_t bytes = 0;
  for (auto _ : state) {
    for (const auto& ex : ds.examples) {
      auto s = normalize(ex.text, cfg, lex);
      bytes += ex.text.size();
      benchmark::DoNotOptimize(s);
    }
  }
  state.SetBytesProcessed(static_cast<std::int64_t>(bytes));
}
BENCHMARK(BM_Normalize)->Unit(benchmark::kMillisecond);

static void BM_TrainBpe(benchmark::State& state) {
  const auto texts = corpus(21, 100, 0.0).texts();
  for (auto _ : state) {
    auto v = train_bpe(texts, static_cast<std::size_t>(state.range(0)), 2);
    benchmark::DoNotOptimize(v);
  }
}
BENCHMARK(BM_TrainBpe)->Arg(500)->Arg(1500)->Unit(benchmark::kMillisecond);

static void BM_Encode(benchmark::State& state) {
  const auto ds = corpus(21, 50, 0.0);
  const Vocab v = train_bpe(ds.texts(), 1500, 2);
  for (auto _ : state) {
    for (const auto& ex : ds.examples) {
      auto e = encode(ex.text, v, {});
      benchmark::DoNotOptimize(e);
    }
  }
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(ds.size()));
}
BENCHMARK(BM_Encode)->Unit(benchmark::kMillisecond);

static void BM_Forward(benchmark::State& state) {
  const auto ds = corpus(21, 20, 0.0);
  const Vocab v = train_bpe(ds.texts(), 1500, 2);
  const auto p = init_params<float>(EncoderConfig::desk(static_cast<int>(v.size())), 1);
  const auto batch = batch_of(v, ds, static_cast<std::size_t>(state.range(0)), 64);
  for (auto _ : state) {
    auto out = forward(p, batch, false);
    benchmark::DoNotOptimize(out.pooled.data());
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_Forward)->Arg(1)->Arg(32)->Unit(benchmark::kMicrosecond);

static void BM_ForwardBackward(benchmark::State& state) {
  const auto ds = corpus(21, 20, 0.0);
  const Vocab v = train_bpe(ds.texts(), 1500, 2);
  const auto p = init_params<float>(EncoderConfig::desk(static_cast<int>(v.size())), 1);
  const auto batch = batch_of(v, ds, 32, 64);
  for (auto _ : state) {
    auto out = forward(p, batch, true);
    const Matrix<float> up = Matrix<float>::Ones(out.hidden.rows(), out.hidden.cols());
    auto g = backward(p, *out.trace, up);
    benchmark::DoNotOptimize(g.token_embeddings.data());
  }
  state.SetItemsProcessed(state.iterations() * 32);
}
BENCHMARK(BM_ForwardBackward)->Unit(benchmark::kMillisecond);

static void BM_NaiveBayesPredict(benchmark::State& state) {
  const auto ds = corpus(21, 50, 0.0);
  std::vector<DialectLabel> classes(all_labels().begin(), all_labels().end());
  const NbModel m = train_nb(ds, classes, 1.0);
  for (auto _ : state) {
    for (const auto& ex : ds.examples) benchmark::DoNotOptimize(nb_predict(m, ex.text).label);
  }
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(ds.size()));
}
BENCHMARK(BM_NaiveBayesPredict);
BENCHMARK_MAIN();
