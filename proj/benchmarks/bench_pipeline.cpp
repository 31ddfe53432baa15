#include <benchmark/benchmark.h>

#include "issuemask/encoder.hpp"
#include "issuemask/preprocess.hpp"
#include "issuemask/rake.hpp"
#include "issuemask/rng.hpp"
#include "issuemask/synthetic.hpp"

using namespace issuemask;

namespace {

const LabeledCorpus& corpus() {
  static const LabeledCorpus c = [] {
    SyntheticConfig cfg;
    cfg.per_class = 100;
    cfg.seed = 1;
    return generate_synthetic_corpus(cfg);
  }();
  return c;
}

void BM_Preprocess(benchmark::State& state) {
  const Preprocessor pp;
  const auto& issues = corpus().issues;
  std::size_t i = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(pp.process(issues[i++ % issues.size()]));
  }
  state.SetItemsProcessed(static_cast<std::int64_t>(state.iterations()));
}
BENCHMARK(BM_Preprocess);

void BM_Rake(benchmark::State& state) {
  const Preprocessor pp;
  std::vector<RakeDocument> docs;
  for (const auto& issue : corpus().issues) {
    if (docs.size() == static_cast<std::size_t>(state.range(0))) break;
    const auto p = pp.process(issue);
    docs.push_back({p.tokens, p.phrase_breaks});
  }
  for (auto _ : state) benchmark::DoNotOptimize(rake_extract(docs, pp.stopwords()));
  state.SetItemsProcessed(static_cast<std::int64_t>(state.iterations()) * state.range(0));
}
BENCHMARK(BM_Rake)->Arg(50)->Arg(200);

void BM_EncoderForward(benchmark::State& state) {
  EncoderConfig cfg;
  cfg.vocab_size = 2000;
  cfg.hidden = 64;
  cfg.layers = 2;
  cfg.heads = 2;
  cfg.intermediate = 128;
  cfg.max_positions = 512;
  const Encoder<float> enc(cfg, 3);
  SeededRng rng(4);
  std::vector<std::int32_t> ids(static_cast<std::size_t>(state.range(0)));
  for (auto& id : ids) id = static_cast<std::int32_t>(rng.uniform_index(cfg.vocab_size));
  for (auto _ : state) benchmark::DoNotOptimize(enc.forward(ids, nullptr));
}
BENCHMARK(BM_EncoderForward)->Arg(64)->Arg(256);

}  // namespace
