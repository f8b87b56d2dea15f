#include <benchmark/benchmark.h>

#include "kway/miner.hpp"
#include "kway/rng.hpp"

namespace {

using namespace kway;

corpus::EncodedCorpus synthetic_corpus(std::int64_t tokens, corpus::WordId vocab,
                                       std::size_t doc_len) {
  Rng rng(1234);
  corpus::EncodedCorpus enc;
  std::vector<corpus::WordId> doc;
  for (std::int64_t t = 0; t < tokens; ++t) {
    doc.push_back(static_cast<corpus::WordId>(rng.uniform_index(vocab)));
    if (doc.size() == doc_len) {
      enc.documents.push_back(std::move(doc));
      doc = {};
    }
  }
  if (!doc.empty()) enc.documents.push_back(std::move(doc));
  enc.token_count = tokens;
  return enc;
}

void BM_MineAll(benchmark::State& state) {
  auto enc = synthetic_corpus(state.range(0), 200, 500);
  miner::MinerConfig cfg;
  cfg.support = 20;
  cfg.k_max = 3;
  cfg.window = corpus::WindowSpec{10, 1};
  for (auto _ : state) {
    auto tables = miner::mine_all(enc, cfg);
    benchmark::DoNotOptimize(tables);
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_MineAll)->Arg(20000)->Arg(100000)->Unit(benchmark::kMillisecond);

void BM_MineLevel1(benchmark::State& state) {
  auto enc = synthetic_corpus(state.range(0), 1000, 500);
  miner::MinerConfig cfg;
  cfg.support = 5;
  cfg.k_max = 1;
  cfg.window = corpus::WindowSpec{10, 1};
  for (auto _ : state) {
    auto table = miner::mine_level1(enc, cfg);
    benchmark::DoNotOptimize(table);
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_MineLevel1)->Arg(100000)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
