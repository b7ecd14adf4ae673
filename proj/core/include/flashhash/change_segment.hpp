#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <vector>

#include "flashhash/entry.hpp"
#include "flashhash/flash_device.hpp"
#include "flashhash/hashing.hpp"
#include "flashhash/ram_buffer.hpp"

namespace flashhash {

struct ChangeSegmentLayout {
  std::uint32_t first_block = 0;
  std::uint32_t blocks = 1;
};

struct StageReport {
  std::uint64_t pages_written = 0;
  // Partitioned: change blocks that ended the stage exactly full.
  std::vector<std::uint32_t> full_blocks;
  // Linear: the log ended the stage exactly full.
  bool log_full = false;
  // Merges forced while the stage was in progress.
  std::uint64_t mid_stage_merges = 0;
};

struct StagedLookup {
  std::int64_t sum = 0;
  bool removed = false;  // a remove marker was staged for the key
  std::uint64_t pages_read = 0;
};

// Consolidated deltas per data block, ascending block order.
using MergeBatch = std::vector<SlotDeltas>;

// Invoked when a change block (or the log) fills up in the middle of a stage;
// must push the batch into the data segment before staging resumes.
using MergeSink = std::function<void(MergeBatch&&)>;

// Flash-resident second-level buffer between the RAM buffer and the data
// segment. Deltas are staged at page granularity and later merged into the
// data segment a block at a time.
class ChangeSegment {
 public:
  virtual ~ChangeSegment() = default;

  // Writes drained RAM-buffer slots to flash. Does nothing for an empty drain.
  virtual StageReport stage(const std::vector<SlotDeltas>& drained, const MergeSink& on_full) = 0;

  // Net staged delta for `key`, honouring remove markers in stage order.
  virtual StagedLookup lookup(std::uint64_t key) = 0;

  // Reads and consolidates the staged deltas of one merge unit (a change
  // block for the partitioned layout; the whole log for the linear one, where
  // `unit` is ignored), then erases the unit.
  virtual MergeBatch collect_for_merge(std::uint32_t unit) = 0;

  // Merge units holding staged data, ascending.
  virtual std::vector<std::uint32_t> pending_units() const = 0;

  bool empty() const { return pending_units().empty(); }
};

// MDB layout: change block c receives the deltas of data blocks
// [c*k, (c+1)*k); each block is filled front to back, one page at a time.
class PartitionedChangeSegment final : public ChangeSegment {
 public:
  PartitionedChangeSegment(FlashDevice& device, const HashParams& params,
                           ChangeSegmentLayout layout);

  StageReport stage(const std::vector<SlotDeltas>& drained, const MergeSink& on_full) override;
  StagedLookup lookup(std::uint64_t key) override;
  MergeBatch collect_for_merge(std::uint32_t change_block) override;
  std::vector<std::uint32_t> pending_units() const override;

  std::uint32_t k() const { return k_; }
  std::uint32_t change_block_of(std::uint32_t data_block) const { return data_block / k_; }
  std::uint32_t fill_cursor(std::uint32_t change_block) const { return cursors_.at(change_block); }

 private:
  FlashDevice* device_;
  HashParams params_;
  ChangeSegmentLayout layout_;
  std::uint32_t k_;
  std::vector<std::uint32_t> cursors_;
};

// MDB-L layout: the change blocks form one log written strictly in page
// order. A range index records, per data block, the page runs that hold its
// staged deltas.
class LinearChangeSegment final : public ChangeSegment {
 public:
  struct PageRange {
    std::uint32_t first_page = 0;  // global log page
    std::uint32_t span = 1;

    bool operator==(const PageRange&) const = default;
  };

  LinearChangeSegment(FlashDevice& device, const HashParams& params, ChangeSegmentLayout layout);

  StageReport stage(const std::vector<SlotDeltas>& drained, const MergeSink& on_full) override;
  StagedLookup lookup(std::uint64_t key) override;
  MergeBatch collect_for_merge(std::uint32_t unit = 0) override;
  std::vector<std::uint32_t> pending_units() const override;

  std::uint32_t head() const { return head_; }
  std::uint32_t capacity_pages() const { return capacity_; }
  const std::vector<PageRange>& ranges(std::uint32_t data_block) const {
    return index_.at(data_block);
  }

 private:
  PageAddress address(std::uint32_t log_page) const;

  FlashDevice* device_;
  HashParams params_;
  ChangeSegmentLayout layout_;
  std::uint32_t capacity_;
  std::uint32_t head_ = 0;
  std::vector<std::vector<PageRange>> index_;
};

}  // namespace flashhash
