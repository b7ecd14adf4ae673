#include "flashhash/entry.hpp"

#include "flashhash/errors.hpp"

namespace flashhash {

namespace {

constexpr std::uint64_t kRemoveBit = std::uint64_t{1} << 63;
constexpr std::uint64_t kCountMask = kRemoveBit - 1;

void put_u64(std::uint8_t* out, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) out[i] = static_cast<std::uint8_t>(v >> (8 * i));
}

std::uint64_t get_u64(const std::uint8_t* in) {
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(in[i]) << (8 * i);
  return v;
}

}  // namespace

std::uint64_t encode_count_field(const Entry& e) {
  if (e.count > kMaxCount || e.count < -kMaxCount - 1) {
    throw InvalidParams("count " + std::to_string(e.count) + " does not fit the 63-bit field");
  }
  std::uint64_t field = static_cast<std::uint64_t>(e.count) & kCountMask;
  if (e.remove_marker) field |= kRemoveBit;
  return field;
}

Entry decode_entry(std::uint64_t key, std::uint64_t count_field) {
  if (count_field == 0) return Entry{};
  std::uint64_t raw = count_field & kCountMask;
  // Sign-extend from bit 62.
  if (raw & (std::uint64_t{1} << 62)) raw |= kRemoveBit;
  return {key, static_cast<std::int64_t>(raw), (count_field & kRemoveBit) != 0};
}

std::vector<std::uint8_t> encode_page(const FlashGeometry& geometry, std::uint64_t next,
                                      std::span<const Entry> entries) {
  const std::uint32_t per_page = geometry.entries_per_page();
  if (entries.size() > per_page) throw InvalidParams("encode_page: too many entries");
  std::vector<std::uint8_t> out(kPageHeaderBytes + std::size_t{per_page} * kEntryBytes);
  put_u64(out.data(), next);
  for (std::uint32_t i = 0; i < per_page; ++i) {
    std::uint8_t* slot = out.data() + kPageHeaderBytes + std::size_t{i} * kEntryBytes;
    if (i < entries.size() && !entries[i].empty()) {
      put_u64(slot, entries[i].key);
      put_u64(slot + 8, encode_count_field(entries[i]));
    } else {
      put_u64(slot, kEmptyKey);
      put_u64(slot + 8, 0);
    }
  }
  return out;
}

PageImage decode_page(const FlashGeometry& geometry, std::span<const std::uint8_t> bytes) {
  const std::uint32_t per_page = geometry.entries_per_page();
  if (bytes.size() < kPageHeaderBytes + std::size_t{per_page} * kEntryBytes) {
    throw InvalidParams("decode_page: short page");
  }
  PageImage page;
  page.next = get_u64(bytes.data());
  page.entries.reserve(per_page);
  for (std::uint32_t i = 0; i < per_page; ++i) {
    const std::uint8_t* slot = bytes.data() + kPageHeaderBytes + std::size_t{i} * kEntryBytes;
    page.entries.push_back(decode_entry(get_u64(slot), get_u64(slot + 8)));
  }
  return page;
}

}  // namespace flashhash
