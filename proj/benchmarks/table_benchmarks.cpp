#include <benchmark/benchmark.h>

#include <algorithm>
#include <random>
#include <vector>

#include "flashhash/data_segment.hpp"
#include "flashhash/hashing.hpp"
#include "flashhash/table.hpp"

using namespace flashhash;

namespace {

TableConfig bench_config(Scheme scheme) {
  TableConfig c;
  c.scheme = scheme;
  c.data_blocks = 64;
  c.pages_per_block = 4;
  c.page_size = 1024;
  c.overflow_blocks = 4;
  return c;
}

// Wall-clock cost of the in-memory simulation per insert.
void BM_Insert(benchmark::State& state) {
  const auto scheme = static_cast<Scheme>(state.range(0));
  std::mt19937_64 rng(7);
  for (auto _ : state) {
    state.PauseTiming();
    CountingHashTable table(bench_config(scheme));
    std::vector<std::uint64_t> keys(4000);
    for (auto& k : keys) k = rng() >> 1;
    state.ResumeTiming();
    for (auto k : keys) table.insert(k);
    table.flush();
    benchmark::DoNotOptimize(table.metrics());
  }
  state.SetItemsProcessed(state.iterations() * 4000);
  state.SetLabel(to_string(scheme));
}
BENCHMARK(BM_Insert)
    ->Arg(static_cast<int>(Scheme::NB))
    ->Arg(static_cast<int>(Scheme::MB))
    ->Arg(static_cast<int>(Scheme::MDB))
    ->Arg(static_cast<int>(Scheme::MDB_L))
    ->Unit(benchmark::kMillisecond);

void BM_PrimaryHash(benchmark::State& state) {
  const auto params = HashParams::for_table(64, 4096);
  std::uint64_t key = 1;
  for (auto _ : state) {
    benchmark::DoNotOptimize(primary_hash(key, params));
    key += 0x9E3779B97F4A7C15ULL;
  }
}
BENCHMARK(BM_PrimaryHash);

// One block rebuild with a batch of deltas for that block.
void BM_MergeBlock(benchmark::State& state) {
  const auto batch = static_cast<std::size_t>(state.range(0));
  const std::uint32_t ppb = 4;
  const std::uint32_t page_size = 1024;
  const std::uint64_t r = std::uint64_t{ppb} * (page_size / kEntryBytes);
  const auto params = HashParams::for_table(2, r);
  std::mt19937_64 rng(11);
  std::vector<Entry> deltas;
  while (deltas.size() < batch) {
    const std::uint64_t k = rng() >> 1;
    if (secondary_hash(k, params) == 0) deltas.push_back(Entry{k, 1, false});
  }
  std::sort(deltas.begin(), deltas.end(),
            [](const Entry& a, const Entry& b) { return a.key < b.key; });
  deltas.erase(std::unique(deltas.begin(), deltas.end(),
                           [](const Entry& a, const Entry& b) { return a.key == b.key; }),
               deltas.end());
  for (auto _ : state) {
    state.PauseTiming();
    FlashGeometry geometry;
    geometry.blocks_total = 3;
    geometry.pages_per_block = ppb;
    geometry.page_size = page_size;
    FlashDevice device(geometry, mlc1_profile());
    DataSegment segment(device, params, DataSegmentLayout{0, 2, 2, 1});
    state.ResumeTiming();
    benchmark::DoNotOptimize(segment.apply_block_updates(0, deltas));
  }
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(deltas.size()));
}
BENCHMARK(BM_MergeBlock)->Arg(16)->Arg(64)->Arg(200);

}  // namespace

BENCHMARK_MAIN();
