#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace flashhash {

// Physical layout of the simulated NAND device.
//
// Every page stores page_bytes() = spare_size + page_size bytes: a small
// out-of-band area that table code uses as its page header, and a data area
// holding entries_per_page() entries of entry_size bytes.
struct FlashGeometry {
  std::uint32_t blocks_total = 0;
  std::uint32_t pages_per_block = 0;
  std::uint32_t page_size = 0;
  std::uint32_t entry_size = 16;
  std::uint32_t spare_size = 8;

  std::uint32_t entries_per_page() const { return entry_size == 0 ? 0 : page_size / entry_size; }
  std::uint32_t page_bytes() const { return page_size + spare_size; }
  std::uint64_t pages_total() const {
    return static_cast<std::uint64_t>(blocks_total) * pages_per_block;
  }

  // Throws InvalidParams when an invariant does not hold.
  void validate() const;

  bool operator==(const FlashGeometry&) const = default;
};

struct PageAddress {
  std::uint32_t block = 0;
  std::uint32_t page = 0;

  bool operator==(const PageAddress&) const = default;
};

// Latency and endurance characteristics of one device model.
struct DeviceProfile {
  std::string name;
  double page_read_us = 0;
  double page_write_us = 0;
  double block_erase_us = 1500;
  // Multiplier applied to page writes classified semi-random.
  double seq_write_bonus = 0.5;
  std::uint64_t erase_limit = 10000;

  void validate() const;

  bool operator==(const DeviceProfile&) const = default;
};

// Shipped profiles. Page read/write latencies are the vendor figures for two
// MLC drives and one SLC drive; erase latency is a typical datasheet value.
DeviceProfile mlc1_profile();
DeviceProfile mlc2_profile();
DeviceProfile slc_profile();

// Looks up a shipped profile by name ("MLC-1", "MLC-2", "SLC"), case
// insensitive. Throws ConfigError for unknown names.
DeviceProfile profile_by_name(const std::string& name);

enum class WriteClass : std::uint8_t { semi_random, random };

struct MetricsSnapshot {
  std::uint64_t page_reads = 0;
  std::uint64_t page_writes = 0;
  std::uint64_t block_reads = 0;
  std::uint64_t block_writes = 0;
  std::uint64_t erases = 0;
  std::vector<std::uint64_t> erases_per_block;
  double simulated_time_us = 0;
  std::uint64_t semi_random_writes = 0;
  std::uint64_t random_writes = 0;
  // Raised once any block has been erased more often than the profile's
  // erase_limit. Wear is reported, never enforced.
  bool wear_limit_exceeded = false;
  std::uint64_t worn_blocks = 0;

  bool operator==(const MetricsSnapshot&) const = default;
};

// block_read / block_write are zero-cost markers emitted after the page
// operations of read_block / program_block so a replay can rebuild the block
// counters.
enum class TraceOp : std::uint8_t { read, write, erase, block_read, block_write };

struct TraceRecord {
  TraceOp op = TraceOp::read;
  std::uint32_t block = 0;
  std::uint32_t page = 0;  // 0 for erases and block markers
  std::optional<WriteClass> write_class;
  double time_us = 0;  // latency charged for this operation

  bool operator==(const TraceRecord&) const = default;
};

// Deterministic simulated NAND SSD.
//
// Reads and writes are page granular, erases are block granular, and a page
// can be programmed only once between erases of its block. Each write is
// classified semi-random when its page id is strictly greater than the last
// page id programmed in the same block since that block's last erase.
//
// Single owner: the device may be moved between threads but is never shared.
class FlashDevice {
 public:
  FlashDevice(FlashGeometry geometry, DeviceProfile profile);

  const FlashGeometry& geometry() const { return geometry_; }
  const DeviceProfile& profile() const { return profile_; }

  // Returns page_bytes() bytes; erased pages read as zeros.
  std::vector<std::uint8_t> read_page(PageAddress addr);

  // Payloads shorter than page_bytes() are zero padded.
  WriteClass write_page(PageAddress addr, std::span<const std::uint8_t> payload);

  void erase_block(std::uint32_t block);

  // Reads every page of the block. Charged as pages_per_block page reads and
  // one block read.
  std::vector<std::vector<std::uint8_t>> read_block(std::uint32_t block);

  // Programs pages 0..pages.size()-1 of an erased block in ascending order.
  // Charged as one page write per page and one block write.
  void program_block(std::uint32_t block, std::span<const std::vector<std::uint8_t>> pages);

  // Free metadata queries (the FTL knows page state without a flash access).
  bool is_erased(PageAddress addr) const;
  bool block_is_erased(std::uint32_t block) const;

  MetricsSnapshot snapshot() const;

  void enable_trace(bool on) { tracing_ = on; }
  const std::vector<TraceRecord>& trace() const { return trace_; }
  // CSV lines `op,block,page,class,time_us` with a header row.
  void write_trace_csv(std::ostream& out) const;

 private:
  void check_block(std::uint32_t block) const;
  void check_page(PageAddress addr) const;
  std::size_t page_index(PageAddress addr) const;
  friend FlashDevice replay_trace(const FlashGeometry&, const DeviceProfile&,
                                  std::span<const TraceRecord>);

  void record(TraceOp op, std::uint32_t block, std::uint32_t page,
              std::optional<WriteClass> cls, double time_us);

  FlashGeometry geometry_;
  DeviceProfile profile_;
  std::vector<std::uint8_t> data_;
  std::vector<std::uint8_t> written_;
  std::vector<std::int64_t> last_written_page_;
  MetricsSnapshot metrics_;
  bool tracing_ = false;
  std::vector<TraceRecord> trace_;
};

// Rebuilds a device by re-issuing every operation of a recorded trace against
// a fresh device. Written payloads are not part of the trace and replay as
// zero pages; the counters are reproduced exactly.
FlashDevice replay_trace(const FlashGeometry& geometry, const DeviceProfile& profile,
                         std::span<const TraceRecord> trace);

const char* to_string(WriteClass cls);
const char* to_string(TraceOp op);

}  // namespace flashhash
