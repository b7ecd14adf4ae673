#pragma once

#include <cstdint>
#include <iosfwd>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "flashhash/change_segment.hpp"
#include "flashhash/data_segment.hpp"
#include "flashhash/flash_device.hpp"
#include "flashhash/hashing.hpp"
#include "flashhash/ram_buffer.hpp"

namespace flashhash {

// NB: no buffer, every update rewrites its block immediately.
// MB: RAM buffer only. MDB: RAM buffer + partitioned change segment.
// MDB_L: RAM buffer + linear change-segment log.
enum class Scheme : std::uint8_t { NB = 0, MB = 1, MDB = 2, MDB_L = 3 };

const char* to_string(Scheme scheme);
Scheme scheme_from_string(const std::string& name);  // throws ConfigError
inline constexpr Scheme kAllSchemes[] = {Scheme::NB, Scheme::MB, Scheme::MDB, Scheme::MDB_L};

struct TableConfig {
  Scheme scheme = Scheme::MDB_L;
  std::uint32_t data_blocks = 64;
  std::uint32_t pages_per_block = 16;
  std::uint32_t page_size = 4096;  // 256 sixteen-byte entries per page
  // Seed for drawing the hash multiplier and offset; unset uses the fixed
  // defaults.
  std::optional<std::uint64_t> hash_seed;
  // Sizes as a percentage of the data segment, in (0, 100].
  double ram_budget_pct = 5.0;
  double change_segment_pct = 12.5;
  std::uint32_t overflow_blocks = 1;
  DeviceProfile profile = mlc1_profile();

  // Throws InvalidParams.
  void validate() const;

  FlashGeometry device_geometry() const;
  std::uint32_t change_blocks() const;
  std::uint64_t data_segment_bytes() const;
  std::uint64_t ram_budget_bytes() const;
};

// Fixed little-endian header written at table creation:
//
//   offset size field
//        0    4 magic "FCHT"
//        4    2 version (1)
//        6    1 scheme (0 NB, 1 MB, 2 MDB, 3 MDB-L)
//        7    1 reserved (0)
//        8    4 blocks_total
//       12    4 pages_per_block
//       16    4 page_size
//       20    4 entry_size
//       24    4 data_blocks
//       28    4 overflow_blocks
//       32    4 change_blocks
//       36    4 reserved (0)
//       40    8 a
//       48    8 b
//       56    8 q
//       64    8 r
struct TableHeader {
  static constexpr std::uint32_t kMagic = 0x54484346;  // "FCHT" read as little endian
  static constexpr std::uint16_t kVersion = 1;
  static constexpr std::size_t kSize = 72;

  Scheme scheme = Scheme::MB;
  FlashGeometry geometry;
  std::uint32_t data_blocks = 0;
  std::uint32_t overflow_blocks = 0;
  std::uint32_t change_blocks = 0;
  std::uint64_t a = 0;
  std::uint64_t b = 0;
  std::uint64_t q = 0;
  std::uint64_t r = 0;

  std::vector<std::uint8_t> serialize() const;
  static TableHeader parse(std::span<const std::uint8_t> bytes);  // throws ConfigError

  bool operator==(const TableHeader&) const = default;
};

struct TableMetrics {
  MetricsSnapshot device;
  std::uint64_t merges = 0;  // MB: drains; MDB: change-block merges; MDB-L: log merges
  std::uint64_t stages = 0;
  std::uint64_t block_merges = 0;  // data blocks rewritten by merges
  // Device block operations (block reads + block writes).
  std::uint64_t block_ops() const { return device.block_reads + device.block_writes; }
  // Page operations not issued as part of a block operation.
  std::uint64_t page_ops(std::uint32_t pages_per_block) const;
};

// Counting hash table on a simulated SSD. Single writer; movable.
class CountingHashTable {
 public:
  explicit CountingHashTable(const TableConfig& config);

  void insert(std::uint64_t key) { update(key, +1); }
  void decrement(std::uint64_t key) { update(key, -1); }
  void remove(std::uint64_t key);

  // Net count across the data segment, change segment and RAM buffer, in that
  // (oldest to newest) order; a remove marker discards the older tiers.
  // Returns nullopt when the net count is <= 0.
  std::optional<std::int64_t> query(std::uint64_t key);

  // Pushes every pending delta into the data segment.
  void flush();

  TableMetrics metrics() const;
  const TableConfig& config() const { return config_; }
  const TableHeader& header() const { return header_; }
  const HashParams& hash_params() const { return params_; }

  FlashDevice& device() { return *device_; }
  DataSegment& data_segment() { return *data_; }
  RamBuffer& ram_buffer() { return *buffer_; }
  ChangeSegment* change_segment() { return change_.get(); }

 private:
  void update(std::uint64_t key, std::int64_t delta);
  void apply_immediately(const Entry& delta);
  void on_buffer_full();
  void merge_batch(const MergeBatch& batch);
  void merge_change_units(const std::vector<std::uint32_t>& units);
  static void check_key(std::uint64_t key);

  TableConfig config_;
  HashParams params_;
  TableHeader header_;
  std::unique_ptr<FlashDevice> device_;
  std::unique_ptr<DataSegment> data_;
  std::unique_ptr<RamBuffer> buffer_;
  std::unique_ptr<ChangeSegment> change_;
  std::uint64_t merges_ = 0;
  std::uint64_t stages_ = 0;
  std::uint64_t block_merges_ = 0;
};

// CSV column order for one run.
inline constexpr const char* kMetricsCsvHeader =
    "scheme,ram_pct,change_pct,block_ops,page_ops,merges,stages,erases,sim_time_us";

// One row in kMetricsCsvHeader order, no trailing newline.
std::string metrics_csv_row(const TableConfig& config, const TableMetrics& metrics);

}  // namespace flashhash
