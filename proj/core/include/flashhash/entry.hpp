#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "flashhash/flash_device.hpp"
#include "flashhash/hashing.hpp"

namespace flashhash {

// One (key, count) cell. Used for data-segment entries and for the pending
// deltas held by the RAM buffer and change segment.
//
// A delta with remove_marker set means "forget every older count for this
// key, then add `count`". Data-segment entries never carry the marker and
// always have count >= 1.
struct Entry {
  std::uint64_t key = kEmptyKey;
  std::int64_t count = 0;
  bool remove_marker = false;

  bool empty() const { return key == kEmptyKey; }

  bool operator==(const Entry&) const = default;
};

// Folds a newer delta into an older one for the same key.
inline Entry compose(const Entry& older, const Entry& newer) {
  if (newer.remove_marker) return newer;
  return {older.key, older.count + newer.count, older.remove_marker};
}

// On-flash page layout, identical for data, overflow and change pages:
//
//   bytes [0, 8)            header: next-page locator, little endian, 0 = NULL
//   bytes [8 + 16*i, +8)    entry i key, little endian
//   bytes [16 + 16*i, +8)   entry i count field, little endian
//
// The count field holds the count as a 63-bit two's complement value in bits
// 0..62 and the remove marker in bit 63. An entry whose count field is zero is
// empty; empty entries are written with key 0xFFFFFFFFFFFFFFFF, and an erased
// (all zero) page decodes as entirely empty.
inline constexpr std::uint32_t kPageHeaderBytes = 8;
inline constexpr std::uint32_t kEntryBytes = 16;
inline constexpr std::int64_t kMaxCount = (std::int64_t{1} << 62) - 1;

struct PageImage {
  std::uint64_t next = 0;
  std::vector<Entry> entries;  // exactly entries_per_page, empties included
};

// `entries` may be shorter than entries_per_page; the rest is padded empty.
std::vector<std::uint8_t> encode_page(const FlashGeometry& geometry, std::uint64_t next,
                                      std::span<const Entry> entries);

PageImage decode_page(const FlashGeometry& geometry, std::span<const std::uint8_t> bytes);

std::uint64_t encode_count_field(const Entry& e);
Entry decode_entry(std::uint64_t key, std::uint64_t count_field);

}  // namespace flashhash
