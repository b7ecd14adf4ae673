#pragma once

#include <cstdint>
#include <optional>
#include <unordered_map>
#include <vector>

#include "flashhash/entry.hpp"
#include "flashhash/hashing.hpp"

namespace flashhash {

// Deltas drained from one RAM-buffer slot, i.e. destined for one data block.
struct SlotDeltas {
  std::uint32_t slot = 0;
  std::vector<Entry> deltas;  // ascending key order, one delta per key
};

// The open secondary table held in RAM: one slot per data block, each slot a
// collection of pending deltas keyed by table key.
class RamBuffer {
 public:
  static constexpr std::uint64_t kEntryFootprint = kEntryBytes;

  RamBuffer(const HashParams& params, std::uint64_t budget_bytes);

  // Adds `delta` to the pending count of `key`. A delta whose net count
  // reaches zero without a remove marker is dropped. Returns true when the
  // buffer is now over budget.
  bool upsert(std::uint64_t key, std::int64_t delta);

  // Replaces any pending delta for `key` with a remove marker.
  bool mark_remove(std::uint64_t key);

  std::optional<Entry> lookup(std::uint64_t key) const;

  // Returns every non-empty slot in ascending slot order and empties the
  // buffer.
  std::vector<SlotDeltas> drain();

  std::uint64_t budget_bytes() const { return budget_bytes_; }
  std::uint64_t current_bytes() const { return entries_ * kEntryFootprint; }
  std::uint64_t entry_count() const { return entries_; }
  bool empty() const { return entries_ == 0; }
  bool over_budget() const { return current_bytes() > budget_bytes_; }
  std::uint64_t slot_count() const { return slots_.size(); }

 private:
  HashParams params_;
  std::uint64_t budget_bytes_;
  std::vector<std::unordered_map<std::uint64_t, Entry>> slots_;
  std::uint64_t entries_ = 0;
};

}  // namespace flashhash
