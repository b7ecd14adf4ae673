#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "flashhash/entry.hpp"
#include "flashhash/flash_device.hpp"
#include "flashhash/hashing.hpp"

namespace flashhash {

// Where the data segment lives on the device.
struct DataSegmentLayout {
  std::uint32_t first_data_block = 0;
  std::uint32_t data_blocks = 0;
  std::uint32_t first_overflow_block = 0;
  std::uint32_t overflow_blocks = 1;
};

struct LookupResult {
  std::optional<std::int64_t> count;
  std::uint64_t probes = 0;      // entries examined, locator included
  std::uint64_t pages_read = 0;  // distinct pages touched
};

struct MergeReport {
  std::uint64_t pages_read = 0;
  std::uint64_t pages_written = 0;
  std::uint64_t erases = 0;
  std::uint64_t probes = 0;  // in-memory probes spent applying and re-placing
};

// Decoded contents of one data block and its overflow chain.
struct BlockImage {
  std::vector<Entry> slots;           // r entries; the locator shows up as kLocatorKey
  std::vector<Entry> overflow;        // chain entries in chain order, empties dropped
  std::vector<std::uint32_t> chain;   // overflow page indices, region relative
};

// The closed primary table on flash.
//
// Data block d holds entry indices [d*r, (d+1)*r). A key probes forward from
// its home index inside its block only; when it runs off the end of the block
// it continues into that block's overflow chain. Once a block has overflowed,
// its last entry is a locator (key kLocatorKey, count = first chain page + 1)
// and each chain page links to the next through its page header.
//
// At rest every block is in canonical form: live entries placed by linear
// probing in ascending (home, key) order. Merges rebuild that form, so a
// block image depends only on the set of live entries it holds.
class DataSegment {
 public:
  DataSegment(FlashDevice& device, const HashParams& params, DataSegmentLayout layout);

  LookupResult lookup(std::uint64_t key);

  // Applies consolidated deltas to one block: read block and chain, apply,
  // drop entries whose count fell to <= 0, re-place canonically, erase and
  // rewrite the block in ascending page order, and rewrite any overflow pages
  // that changed. Throws BlockFull, leaving flash untouched, when the live
  // entries do not fit.
  MergeReport apply_block_updates(std::uint32_t block, std::span<const Entry> deltas);

  MergeReport compact_block(std::uint32_t block) { return apply_block_updates(block, {}); }

  double load_factor() const;
  std::uint64_t live_entries() const { return live_total_; }
  std::uint64_t free_overflow_pages() const;

  // Reads and decodes a block and its chain through the device (charged).
  BlockImage read_block_image(std::uint32_t block);

  const DataSegmentLayout& layout() const { return layout_; }
  std::uint64_t entries_per_block() const { return params_.r(); }
  std::uint32_t home_offset(std::uint64_t key) const {
    return static_cast<std::uint32_t>(primary_hash(key, params_) % params_.r());
  }

 private:
  PageAddress overflow_address(std::uint32_t page_ref) const;
  std::vector<Entry> decode_block(const std::vector<std::vector<std::uint8_t>>& pages) const;

  FlashDevice* device_;
  HashParams params_;
  DataSegmentLayout layout_;
  std::uint32_t entries_per_page_;
  std::uint32_t pages_per_block_;
  // Overflow metadata kept in RAM, mirrored by the on-flash locators.
  std::vector<std::vector<std::uint32_t>> chains_;
  std::vector<std::int64_t> page_owner_;  // per overflow page: data block or -1
  std::vector<std::uint64_t> live_per_block_;
  std::uint64_t live_total_ = 0;
};

}  // namespace flashhash
