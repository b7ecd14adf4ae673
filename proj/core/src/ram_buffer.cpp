#include "flashhash/ram_buffer.hpp"

#include <algorithm>

#include "flashhash/errors.hpp"

namespace flashhash {

RamBuffer::RamBuffer(const HashParams& params, std::uint64_t budget_bytes)
    : params_(params), budget_bytes_(budget_bytes), slots_(params.slots()) {}

bool RamBuffer::upsert(std::uint64_t key, std::int64_t delta) {
  if (is_reserved_key(key)) throw KeyIsSentinel("reserved key value");
  auto& slot = slots_[secondary_hash(key, params_)];
  const auto it = slot.find(key);
  if (it == slot.end()) {
    if (delta != 0) {
      slot.emplace(key, Entry{key, delta, false});
      ++entries_;
    }
  } else {
    it->second.count += delta;
    if (it->second.count == 0 && !it->second.remove_marker) {
      slot.erase(it);
      --entries_;
    }
  }
  return over_budget();
}

bool RamBuffer::mark_remove(std::uint64_t key) {
  if (is_reserved_key(key)) throw KeyIsSentinel("reserved key value");
  auto& slot = slots_[secondary_hash(key, params_)];
  const auto [it, inserted] = slot.insert_or_assign(key, Entry{key, 0, true});
  if (inserted) ++entries_;
  return over_budget();
}

std::optional<Entry> RamBuffer::lookup(std::uint64_t key) const {
  if (is_reserved_key(key)) return std::nullopt;
  const auto& slot = slots_[secondary_hash(key, params_)];
  const auto it = slot.find(key);
  if (it == slot.end()) return std::nullopt;
  return it->second;
}

std::vector<SlotDeltas> RamBuffer::drain() {
  std::vector<SlotDeltas> out;
  for (std::size_t s = 0; s < slots_.size(); ++s) {
    auto& slot = slots_[s];
    if (slot.empty()) continue;
    SlotDeltas drained{static_cast<std::uint32_t>(s), {}};
    drained.deltas.reserve(slot.size());
    for (const auto& [key, e] : slot) drained.deltas.push_back(e);
    std::sort(drained.deltas.begin(), drained.deltas.end(),
              [](const Entry& a, const Entry& b) { return a.key < b.key; });
    out.push_back(std::move(drained));
    slot.clear();
  }
  entries_ = 0;
  return out;
}

}  // namespace flashhash
