#include <gtest/gtest.h>

#include <random>

#include "flashhash/errors.hpp"
#include "flashhash/table.hpp"
#include "support.hpp"

using namespace flashhash;
using flashhash::testing::MixedWorkload;
using flashhash::testing::OpKind;
using flashhash::testing::ReferenceCounter;
using flashhash::testing::tiny_config;

namespace {

// Distinct keys that land in distinct data blocks.
std::vector<std::uint64_t> keys_in_distinct_blocks(const CountingHashTable& t, std::size_t n) {
  std::vector<std::uint64_t> keys;
  std::vector<bool> used(t.hash_params().slots());
  for (std::uint64_t k = 1; keys.size() < n; ++k) {
    const auto b = secondary_hash(k, t.hash_params());
    if (used[b]) continue;
    used[b] = true;
    keys.push_back(k);
  }
  return keys;
}

// Budget of exactly `entries` RAM-buffer entries for tiny_config.
double pct_for_entries(const TableConfig& c, std::uint64_t entries) {
  return 100.0 * static_cast<double>(entries * RamBuffer::kEntryFootprint) /
         static_cast<double>(c.data_segment_bytes());
}

}  // namespace

class EveryScheme : public ::testing::TestWithParam<Scheme> {};

TEST_P(EveryScheme, RepeatedInsertsCount) {
  CountingHashTable t(tiny_config(GetParam()));
  for (int i = 0; i < 100; ++i) t.insert(42);
  EXPECT_EQ(t.query(42), 100);
  t.flush();
  EXPECT_EQ(t.query(42), 100);
}

TEST_P(EveryScheme, DecrementAfterInserts) {
  CountingHashTable t(tiny_config(GetParam()));
  for (int i = 0; i < 3; ++i) t.insert(9);
  t.decrement(9);
  EXPECT_EQ(t.query(9), 2);
  t.flush();
  EXPECT_EQ(t.query(9), 2);
}

TEST_P(EveryScheme, DecrementOfAbsentKeyLeavesItAbsent) {
  CountingHashTable t(tiny_config(GetParam()));
  t.decrement(5);
  EXPECT_FALSE(t.query(5).has_value());
  t.flush();
  EXPECT_FALSE(t.query(5).has_value());
  EXPECT_EQ(t.data_segment().live_entries(), 0u);
}

TEST_P(EveryScheme, RemoveAfterFlush) {
  CountingHashTable t(tiny_config(GetParam()));
  for (int i = 0; i < 5; ++i) t.insert(11);
  t.flush();
  EXPECT_EQ(t.data_segment().lookup(11).count, 5);
  t.remove(11);
  t.flush();
  EXPECT_FALSE(t.query(11).has_value());
  EXPECT_FALSE(t.data_segment().lookup(11).count.has_value());
}

TEST_P(EveryScheme, RemoveOfNeverInsertedKey) {
  CountingHashTable t(tiny_config(GetParam()));
  EXPECT_NO_THROW(t.remove(123));
  EXPECT_FALSE(t.query(123).has_value());
  t.flush();
  EXPECT_FALSE(t.query(123).has_value());
}

TEST_P(EveryScheme, RemoveThenInsert) {
  CountingHashTable t(tiny_config(GetParam()));
  for (int i = 0; i < 4; ++i) t.insert(8);
  t.flush();
  t.remove(8);
  t.insert(8);
  t.insert(8);
  EXPECT_EQ(t.query(8), 2);
  t.flush();
  EXPECT_EQ(t.query(8), 2);
}

TEST_P(EveryScheme, ReservedKeysRejected) {
  CountingHashTable t(tiny_config(GetParam()));
  EXPECT_THROW(t.insert(kEmptyKey), KeyIsSentinel);
  EXPECT_THROW(t.remove(kLocatorKey), KeyIsSentinel);
  EXPECT_FALSE(t.query(kEmptyKey).has_value());
}

TEST_P(EveryScheme, FlushOfEmptyTableDoesNoIo) {
  CountingHashTable t(tiny_config(GetParam()));
  t.flush();
  const auto m = t.metrics();
  EXPECT_EQ(m.device.page_reads + m.device.page_writes + m.device.erases, 0u);
  EXPECT_EQ(m.merges, 0u);
}

TEST_P(EveryScheme, SecondFlushIsNoOp) {
  CountingHashTable t(tiny_config(GetParam()));
  t.insert(3);
  t.flush();
  EXPECT_EQ(t.query(3), 1);
  EXPECT_TRUE(t.ram_buffer().empty());
  if (t.change_segment()) EXPECT_TRUE(t.change_segment()->empty());
  const auto once = t.metrics();
  t.flush();
  const auto twice = t.metrics();
  EXPECT_EQ(once.device, twice.device);
  EXPECT_EQ(once.merges, twice.merges);
  EXPECT_EQ(once.stages, twice.stages);
}

TEST_P(EveryScheme, FreshTableMetricsAreZero) {
  CountingHashTable t(tiny_config(GetParam()));
  const auto m = t.metrics();
  EXPECT_EQ(m.merges + m.stages + m.block_merges + m.block_ops(), 0u);
  EXPECT_DOUBLE_EQ(m.device.simulated_time_us, 0);
}

TEST_P(EveryScheme, RandomWorkloadMatchesReference) {
  auto cfg = tiny_config(GetParam());
  cfg.data_blocks = 16;
  cfg.overflow_blocks = 2;
  CountingHashTable t(cfg);
  ReferenceCounter ref;
  MixedWorkload work(77, 150, false);
  for (int i = 0; i < 6000; ++i) {
    const auto op = work.next(ref);
    switch (op.kind) {
      case OpKind::insert:
        t.insert(op.key);
        ref.insert(op.key);
        break;
      case OpKind::decrement:
        t.decrement(op.key);
        ref.decrement(op.key);
        break;
      case OpKind::remove:
        t.remove(op.key);
        ref.remove(op.key);
        break;
      case OpKind::query:
        ASSERT_EQ(t.query(op.key), ref.query(op.key)) << "op " << i;
        break;
    }
  }
  t.flush();
  for (std::uint64_t rank = 0; rank < 150; ++rank) {
    const auto key = MixedWorkload::key_of(rank);
    ASSERT_EQ(t.query(key), ref.query(key));
  }
  EXPECT_EQ(t.data_segment().live_entries(), ref.counts().size());
}

INSTANTIATE_TEST_SUITE_P(Table, EveryScheme, ::testing::ValuesIn(kAllSchemes),
                         [](const auto& info) {
                           std::string name = to_string(info.param);
                           std::erase(name, '-');
                           return name;
                         });

TEST(Table, NoBufferInsertCostsOneErase) {
  CountingHashTable t(tiny_config(Scheme::NB));
  t.insert(1);
  EXPECT_EQ(t.metrics().device.erases, 1u);
  EXPECT_EQ(t.data_segment().lookup(1).count, 1);
}

TEST(Table, MemoryBufferDrainsOncePerOverflow) {
  auto cfg = tiny_config(Scheme::MB);
  cfg.ram_budget_pct = pct_for_entries(cfg, 2);
  CountingHashTable t(cfg);
  EXPECT_EQ(t.ram_buffer().budget_bytes(), 2 * RamBuffer::kEntryFootprint);
  const auto keys = keys_in_distinct_blocks(t, 3);
  t.insert(keys[0]);
  t.insert(keys[1]);
  EXPECT_EQ(t.metrics().merges, 0u);
  t.insert(keys[2]);
  const auto m = t.metrics();
  EXPECT_EQ(m.merges, 1u);
  EXPECT_LE(m.block_merges, 3u);
  EXPECT_TRUE(t.ram_buffer().empty());
}

TEST(Table, MemoryBufferFlushOfTwoSlotsIsOneMerge) {
  CountingHashTable t(tiny_config(Scheme::MB));
  const auto keys = keys_in_distinct_blocks(t, 2);
  t.insert(keys[0]);
  t.insert(keys[1]);
  t.flush();
  const auto m = t.metrics();
  EXPECT_EQ(m.merges, 1u);
  EXPECT_EQ(m.block_merges, 2u);
  EXPECT_EQ(m.device.block_writes, 2u);
  EXPECT_EQ(m.device.erases, 2u);
}

TEST(Table, DecrementThenInsertLeavesNothingBuffered) {
  CountingHashTable t(tiny_config(Scheme::MB));
  t.decrement(4);
  t.insert(4);
  EXPECT_FALSE(t.ram_buffer().lookup(4).has_value());
  EXPECT_TRUE(t.ram_buffer().empty());
}

class StagedSchemes : public ::testing::TestWithParam<Scheme> {};

TEST_P(StagedSchemes, QuerySumsAllTiers) {
  auto cfg = tiny_config(GetParam());
  cfg.ram_budget_pct = pct_for_entries(cfg, 2);
  CountingHashTable t(cfg);
  const auto keys = keys_in_distinct_blocks(t, 3);
  const std::uint64_t k = keys[0];
  for (int i = 0; i < 7; ++i) t.insert(k);
  t.flush();
  t.insert(k);
  t.insert(k);
  t.insert(keys[1]);
  t.insert(keys[2]);  // third entry: drain and stage
  ASSERT_TRUE(t.ram_buffer().empty());
  EXPECT_EQ(t.change_segment()->lookup(k).sum, 2);
  t.decrement(k);
  EXPECT_EQ(t.ram_buffer().lookup(k), (Entry{k, -1, false}));
  EXPECT_EQ(t.data_segment().lookup(k).count, 7);
  EXPECT_EQ(t.query(k), 8);
}

TEST_P(StagedSchemes, StagedRemoveDiscardsDataCount) {
  auto cfg = tiny_config(GetParam());
  cfg.ram_budget_pct = pct_for_entries(cfg, 2);
  CountingHashTable t(cfg);
  const auto keys = keys_in_distinct_blocks(t, 3);
  const std::uint64_t k = keys[0];
  for (int i = 0; i < 7; ++i) t.insert(k);
  t.flush();
  t.remove(k);
  t.insert(keys[1]);
  t.insert(keys[2]);
  ASSERT_TRUE(t.change_segment()->lookup(k).removed);
  for (int i = 0; i < 4; ++i) t.insert(k);
  EXPECT_EQ(t.query(k), 4);
  t.flush();
  EXPECT_EQ(t.query(k), 4);
}

TEST_P(StagedSchemes, StageCountEqualsDrains) {
  auto cfg = tiny_config(GetParam());
  CountingHashTable staged(cfg);
  cfg.scheme = Scheme::MB;
  CountingHashTable mb(cfg);
  for (std::uint64_t i = 0; i < 600; ++i) {
    const std::uint64_t k = (i % 60 + 1) * 7919;
    staged.insert(k);
    mb.insert(k);
  }
  EXPECT_GT(mb.metrics().merges, 2u);
  EXPECT_EQ(staged.metrics().stages, mb.metrics().merges);
}

INSTANTIATE_TEST_SUITE_P(Table, StagedSchemes, ::testing::Values(Scheme::MDB, Scheme::MDB_L),
                         [](const auto& info) {
                           return info.param == Scheme::MDB ? "MDB" : "MDBL";
                         });

TEST(Table, LinearLogFillingOnceIsOneMerge) {
  auto cfg = tiny_config(Scheme::MDB_L);  // log of 2 blocks x 2 pages x 8 entries
  CountingHashTable t(cfg);
  auto* log = dynamic_cast<LinearChangeSegment*>(t.change_segment());
  ASSERT_NE(log, nullptr);
  ASSERT_EQ(log->capacity_pages(), 4u);
  std::uint64_t key = 1;
  while (t.metrics().merges == 0) t.insert(key++ * 104729);
  EXPECT_EQ(t.metrics().merges, 1u);
  EXPECT_EQ(log->head(), 0u);
}

TEST(Table, PartitionedMergesPerChangeBlock) {
  CountingHashTable t(tiny_config(Scheme::MDB));
  for (std::uint64_t i = 0; i < 400; ++i) t.insert((i % 60 + 1) * 31);
  const auto before = t.metrics();
  const auto pending = t.change_segment()->pending_units().size();
  t.flush();
  const auto after = t.metrics();
  // The flush drains the buffer once, then merges each pending change block.
  EXPECT_GE(after.merges - before.merges, pending);
  EXPECT_TRUE(t.change_segment()->empty());
}

TEST(TableConfig, ValidationAndSizes) {
  TableConfig c;
  EXPECT_NO_THROW(c.validate());
  EXPECT_EQ(c.change_blocks(), 8u);
  EXPECT_EQ(c.device_geometry().blocks_total, 64u + 1u + 8u);
  EXPECT_EQ(c.data_segment_bytes(), 64ull * 16 * 4096);
  EXPECT_EQ(c.ram_budget_bytes(), 64ull * 16 * 4096 / 20);
  c.scheme = Scheme::MB;
  EXPECT_EQ(c.change_blocks(), 0u);
  c.change_segment_pct = 0;  // ignored by MB
  EXPECT_NO_THROW(c.validate());
  c.ram_budget_pct = 0;
  EXPECT_THROW(c.validate(), InvalidParams);
  c.scheme = Scheme::NB;  // ignores both percentages
  EXPECT_NO_THROW(c.validate());
  c = TableConfig{};
  c.change_segment_pct = 101;
  EXPECT_THROW(c.validate(), InvalidParams);
  c = TableConfig{};
  c.data_blocks = 1;
  EXPECT_THROW(c.validate(), InvalidParams);
  c = TableConfig{};
  c.change_segment_pct = 1;  // rounds up to one block
  EXPECT_EQ(c.change_blocks(), 1u);
}

TEST(Scheme, NamesRoundTrip) {
  for (Scheme s : kAllSchemes) EXPECT_EQ(scheme_from_string(to_string(s)), s);
  EXPECT_EQ(scheme_from_string("mdb_l"), Scheme::MDB_L);
  EXPECT_THROW(scheme_from_string("LSM"), ConfigError);
}

TEST(TableHeader, RoundTripAndLayout) {
  CountingHashTable t(tiny_config(Scheme::MDB));
  const auto bytes = t.header().serialize();
  ASSERT_EQ(bytes.size(), TableHeader::kSize);
  EXPECT_EQ(bytes[0], 'F');
  EXPECT_EQ(bytes[1], 'C');
  EXPECT_EQ(bytes[2], 'H');
  EXPECT_EQ(bytes[3], 'T');
  EXPECT_EQ(bytes[6], 2);
  const auto parsed = TableHeader::parse(bytes);
  EXPECT_EQ(parsed, t.header());
  EXPECT_EQ(parsed.q, t.hash_params().q());
  EXPECT_EQ(parsed.change_blocks, 2u);
}

TEST(TableHeader, RejectsCorruption) {
  CountingHashTable t(tiny_config(Scheme::MB));
  auto bytes = t.header().serialize();
  EXPECT_THROW(TableHeader::parse(std::span(bytes).first(10)), ConfigError);
  auto bad = bytes;
  bad[0] = 'X';
  EXPECT_THROW(TableHeader::parse(bad), ConfigError);
  bad = bytes;
  bad[4] = 9;
  EXPECT_THROW(TableHeader::parse(bad), ConfigError);
  bad = bytes;
  bad[6] = 7;
  EXPECT_THROW(TableHeader::parse(bad), ConfigError);
}

TEST(MetricsCsv, RowLayout) {
  TableConfig c = tiny_config(Scheme::NB);
  TableMetrics m;
  m.device.block_reads = 3;
  m.device.block_writes = 3;
  m.device.page_reads = 6 + 5;
  m.device.page_writes = 6;
  m.device.erases = 3;
  m.device.simulated_time_us = 1234.56;
  EXPECT_EQ(metrics_csv_row(c, m), "NB,,,6,5,0,0,3,1234.6");
  c.scheme = Scheme::MB;
  EXPECT_EQ(metrics_csv_row(c, m).substr(0, 6), "MB,10,");
  c.scheme = Scheme::MDB_L;
  EXPECT_EQ(metrics_csv_row(c, m).substr(0, 12), "MDB-L,10,25,");
  EXPECT_EQ(std::string(kMetricsCsvHeader),
            "scheme,ram_pct,change_pct,block_ops,page_ops,merges,stages,erases,sim_time_us");
}
