#include "flashhash/change_segment.hpp"

#include <algorithm>
#include <map>
#include <unordered_map>

#include "flashhash/errors.hpp"

namespace flashhash {

namespace {

// Folds staged deltas, visited in stage order, into one delta per key and
// groups them by data block.
class Consolidator {
 public:
  explicit Consolidator(const HashParams& params) : params_(params) {}

  void add(const Entry& e) {
    auto& block = blocks_[static_cast<std::uint32_t>(secondary_hash(e.key, params_))];
    auto [it, inserted] = block.try_emplace(e.key, e);
    if (!inserted) it->second = compose(it->second, e);
  }

  void add_for_block(std::uint32_t block, const Entry& e) {
    if (secondary_hash(e.key, params_) == block) add(e);
  }

  MergeBatch finish() {
    MergeBatch out;
    out.reserve(blocks_.size());
    for (auto& [block, entries] : blocks_) {
      SlotDeltas slot{block, {}};
      slot.deltas.reserve(entries.size());
      for (const auto& [key, e] : entries) slot.deltas.push_back(e);
      std::sort(slot.deltas.begin(), slot.deltas.end(),
                [](const Entry& a, const Entry& b) { return a.key < b.key; });
      out.push_back(std::move(slot));
    }
    blocks_.clear();
    return out;
  }

 private:
  const HashParams& params_;
  std::map<std::uint32_t, std::unordered_map<std::uint64_t, Entry>> blocks_;
};

void accumulate(StagedLookup& out, const Entry& e) {
  if (e.remove_marker) {
    out.sum = 0;
    out.removed = true;
  }
  out.sum += e.count;
}

}  // namespace

// --- PartitionedChangeSegment ---

PartitionedChangeSegment::PartitionedChangeSegment(FlashDevice& device, const HashParams& params,
                                                   ChangeSegmentLayout layout)
    : device_(&device), params_(params), layout_(layout) {
  if (layout_.blocks == 0) throw InvalidParams("change segment needs at least one block");
  if (layout_.first_block + layout_.blocks > device.geometry().blocks_total) {
    throw InvalidParams("change segment exceeds the device");
  }
  const auto data_blocks = static_cast<std::uint32_t>(params_.slots());
  k_ = (data_blocks + layout_.blocks - 1) / layout_.blocks;
  cursors_.assign(layout_.blocks, 0);
}

StageReport PartitionedChangeSegment::stage(const std::vector<SlotDeltas>& drained,
                                            const MergeSink& on_full) {
  StageReport report;
  const auto& geo = device_->geometry();
  const std::uint32_t per_page = geo.entries_per_page();

  // Entries of all slots that share a change block are packed together.
  std::map<std::uint32_t, std::vector<Entry>> groups;
  for (const auto& slot : drained) {
    auto& group = groups[change_block_of(slot.slot)];
    group.insert(group.end(), slot.deltas.begin(), slot.deltas.end());
  }

  for (const auto& [cblock, entries] : groups) {
    for (std::size_t first = 0; first < entries.size(); first += per_page) {
      auto& cursor = cursors_[cblock];
      if (cursor == geo.pages_per_block) {
        on_full(collect_for_merge(cblock));
        ++report.mid_stage_merges;
      }
      const std::size_t n = std::min<std::size_t>(per_page, entries.size() - first);
      device_->write_page({layout_.first_block + cblock, cursor},
                          encode_page(geo, 0, std::span<const Entry>(entries).subspan(first, n)));
      ++cursor;
      ++report.pages_written;
    }
    if (cursors_[cblock] == geo.pages_per_block) report.full_blocks.push_back(cblock);
  }
  return report;
}

StagedLookup PartitionedChangeSegment::lookup(std::uint64_t key) {
  StagedLookup out;
  const auto cblock = change_block_of(static_cast<std::uint32_t>(secondary_hash(key, params_)));
  const std::uint32_t used = cursors_[cblock];
  if (used == 0) return out;
  const auto pages = device_->read_block(layout_.first_block + cblock);
  out.pages_read = pages.size();
  for (std::uint32_t p = 0; p < used; ++p) {
    for (const Entry& e : decode_page(device_->geometry(), pages[p]).entries) {
      if (!e.empty() && e.key == key) accumulate(out, e);
    }
  }
  return out;
}

MergeBatch PartitionedChangeSegment::collect_for_merge(std::uint32_t change_block) {
  if (change_block >= layout_.blocks) throw AddressOutOfRange("change block out of range");
  const std::uint32_t used = cursors_[change_block];
  if (used == 0) return {};
  const std::uint32_t physical = layout_.first_block + change_block;
  const auto pages = device_->read_block(physical);
  Consolidator consolidator(params_);
  for (std::uint32_t p = 0; p < used; ++p) {
    for (const Entry& e : decode_page(device_->geometry(), pages[p]).entries) {
      if (!e.empty()) consolidator.add(e);
    }
  }
  device_->erase_block(physical);
  cursors_[change_block] = 0;
  return consolidator.finish();
}

std::vector<std::uint32_t> PartitionedChangeSegment::pending_units() const {
  std::vector<std::uint32_t> out;
  for (std::uint32_t c = 0; c < cursors_.size(); ++c) {
    if (cursors_[c] != 0) out.push_back(c);
  }
  return out;
}

// --- LinearChangeSegment ---

LinearChangeSegment::LinearChangeSegment(FlashDevice& device, const HashParams& params,
                                         ChangeSegmentLayout layout)
    : device_(&device), params_(params), layout_(layout) {
  if (layout_.blocks == 0) throw InvalidParams("change segment needs at least one block");
  if (layout_.first_block + layout_.blocks > device.geometry().blocks_total) {
    throw InvalidParams("change segment exceeds the device");
  }
  capacity_ = layout_.blocks * device.geometry().pages_per_block;
  index_.resize(params_.slots());
}

PageAddress LinearChangeSegment::address(std::uint32_t log_page) const {
  const std::uint32_t ppb = device_->geometry().pages_per_block;
  return {layout_.first_block + log_page / ppb, log_page % ppb};
}

StageReport LinearChangeSegment::stage(const std::vector<SlotDeltas>& drained,
                                       const MergeSink& on_full) {
  StageReport report;
  const auto& geo = device_->geometry();
  const std::uint32_t per_page = geo.entries_per_page();

  std::vector<Entry> entries;
  for (const auto& slot : drained) {
    entries.insert(entries.end(), slot.deltas.begin(), slot.deltas.end());
  }

  for (std::size_t first = 0; first < entries.size(); first += per_page) {
    if (head_ == capacity_) {
      on_full(collect_for_merge());
      ++report.mid_stage_merges;
    }
    const std::size_t n = std::min<std::size_t>(per_page, entries.size() - first);
    const auto page_entries = std::span<const Entry>(entries).subspan(first, n);
    device_->write_page(address(head_), encode_page(geo, 0, page_entries));
    ++report.pages_written;

    // Entries arrive grouped by slot, so each block appears in one run here.
    std::uint32_t previous = UINT32_MAX;
    for (const Entry& e : page_entries) {
      const auto block = static_cast<std::uint32_t>(secondary_hash(e.key, params_));
      if (block == previous) continue;
      previous = block;
      auto& ranges = index_[block];
      if (!ranges.empty() && ranges.back().first_page + ranges.back().span == head_) {
        ++ranges.back().span;
      } else if (ranges.empty() || ranges.back().first_page + ranges.back().span - 1 != head_) {
        ranges.push_back({head_, 1});
      }
    }
    ++head_;
  }
  report.log_full = head_ == capacity_;
  return report;
}

StagedLookup LinearChangeSegment::lookup(std::uint64_t key) {
  StagedLookup out;
  const auto block = static_cast<std::uint32_t>(secondary_hash(key, params_));
  for (const PageRange& range : index_[block]) {
    for (std::uint32_t p = range.first_page; p < range.first_page + range.span; ++p) {
      const auto page = decode_page(device_->geometry(), device_->read_page(address(p)));
      ++out.pages_read;
      for (const Entry& e : page.entries) {
        if (!e.empty() && e.key == key) accumulate(out, e);
      }
    }
  }
  return out;
}

MergeBatch LinearChangeSegment::collect_for_merge(std::uint32_t) {
  if (head_ == 0) return {};
  Consolidator consolidator(params_);
  // Each block re-reads every page it was staged on, so pages shared by
  // several blocks are read once per block.
  for (std::uint32_t block = 0; block < index_.size(); ++block) {
    for (const PageRange& range : index_[block]) {
      for (std::uint32_t p = range.first_page; p < range.first_page + range.span; ++p) {
        const auto page = decode_page(device_->geometry(), device_->read_page(address(p)));
        for (const Entry& e : page.entries) {
          if (!e.empty()) consolidator.add_for_block(block, e);
        }
      }
    }
    index_[block].clear();
  }
  const std::uint32_t ppb = device_->geometry().pages_per_block;
  const std::uint32_t used_blocks = (head_ + ppb - 1) / ppb;
  for (std::uint32_t b = 0; b < used_blocks; ++b) device_->erase_block(layout_.first_block + b);
  head_ = 0;
  return consolidator.finish();
}

std::vector<std::uint32_t> LinearChangeSegment::pending_units() const {
  if (head_ == 0) return {};
  return {0};
}

}  // namespace flashhash
