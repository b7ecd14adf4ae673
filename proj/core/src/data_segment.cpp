#include "flashhash/data_segment.hpp"

#include <algorithm>
#include <map>
#include <unordered_map>

#include "flashhash/errors.hpp"

namespace flashhash {

DataSegment::DataSegment(FlashDevice& device, const HashParams& params, DataSegmentLayout layout)
    : device_(&device), params_(params), layout_(layout) {
  const auto& geo = device.geometry();
  entries_per_page_ = geo.entries_per_page();
  pages_per_block_ = geo.pages_per_block;
  if (params_.r() != std::uint64_t{entries_per_page_} * pages_per_block_) {
    throw InvalidParams("data segment: r must equal pages_per_block * entries_per_page");
  }
  if (params_.slots() != layout_.data_blocks) {
    throw InvalidParams("data segment: q / r must equal the number of data blocks");
  }
  if (layout_.first_data_block + layout_.data_blocks > geo.blocks_total ||
      layout_.first_overflow_block + layout_.overflow_blocks > geo.blocks_total) {
    throw InvalidParams("data segment: layout exceeds the device");
  }
  chains_.resize(layout_.data_blocks);
  page_owner_.assign(std::size_t{layout_.overflow_blocks} * pages_per_block_, -1);
  live_per_block_.assign(layout_.data_blocks, 0);
}

PageAddress DataSegment::overflow_address(std::uint32_t page_ref) const {
  return {layout_.first_overflow_block + page_ref / pages_per_block_, page_ref % pages_per_block_};
}

std::vector<Entry> DataSegment::decode_block(
    const std::vector<std::vector<std::uint8_t>>& pages) const {
  std::vector<Entry> slots;
  slots.reserve(params_.r());
  for (const auto& bytes : pages) {
    auto page = decode_page(device_->geometry(), bytes);
    slots.insert(slots.end(), page.entries.begin(), page.entries.end());
  }
  return slots;
}

LookupResult DataSegment::lookup(std::uint64_t key) {
  LookupResult result;
  const auto block = static_cast<std::uint32_t>(secondary_hash(key, params_));
  const std::uint32_t physical = layout_.first_data_block + block;
  const std::uint32_t r = static_cast<std::uint32_t>(params_.r());

  std::optional<std::uint32_t> cached_page;
  PageImage page;
  std::uint64_t locator = 0;
  for (std::uint32_t i = home_offset(key); i < r; ++i) {
    const std::uint32_t page_id = i / entries_per_page_;
    if (cached_page != page_id) {
      page = decode_page(device_->geometry(), device_->read_page({physical, page_id}));
      cached_page = page_id;
      ++result.pages_read;
    }
    const Entry& e = page.entries[i % entries_per_page_];
    ++result.probes;
    if (e.key == kLocatorKey) {
      locator = static_cast<std::uint64_t>(e.count);
      break;
    }
    if (e.empty()) return result;
    if (e.key == key) {
      result.count = e.count;
      return result;
    }
  }

  // Ran off the block: walk its overflow chain, if any.
  while (locator != 0) {
    const auto ref = static_cast<std::uint32_t>(locator - 1);
    page = decode_page(device_->geometry(), device_->read_page(overflow_address(ref)));
    ++result.pages_read;
    for (const Entry& e : page.entries) {
      ++result.probes;
      if (e.empty()) return result;
      if (e.key == key) {
        result.count = e.count;
        return result;
      }
    }
    locator = page.next;
  }
  return result;
}

BlockImage DataSegment::read_block_image(std::uint32_t block) {
  if (block >= layout_.data_blocks) throw AddressOutOfRange("data block out of range");
  BlockImage image;
  image.slots = decode_block(device_->read_block(layout_.first_data_block + block));
  const Entry& last = image.slots.back();
  std::uint64_t locator = last.key == kLocatorKey ? static_cast<std::uint64_t>(last.count) : 0;
  while (locator != 0) {
    const auto ref = static_cast<std::uint32_t>(locator - 1);
    image.chain.push_back(ref);
    auto page = decode_page(device_->geometry(), device_->read_page(overflow_address(ref)));
    for (const Entry& e : page.entries) {
      if (!e.empty()) image.overflow.push_back(e);
    }
    locator = page.next;
  }
  return image;
}

MergeReport DataSegment::apply_block_updates(std::uint32_t block, std::span<const Entry> deltas) {
  if (block >= layout_.data_blocks) throw AddressOutOfRange("data block out of range");
  for (const Entry& d : deltas) {
    if (secondary_hash(d.key, params_) != block) {
      throw InvalidParams("apply_block_updates: delta key does not belong to block " +
                          std::to_string(block));
    }
  }
  const auto before = device_->snapshot();
  MergeReport report;
  const auto r = static_cast<std::uint32_t>(params_.r());

  // Load the block and its chain into memory.
  BlockImage image = read_block_image(block);
  auto& slots = image.slots;
  if (slots.back().key == kLocatorKey) slots.back() = Entry{};
  const std::vector<Entry> old_overflow = image.overflow;  // deltas below edit image in place

  // Apply each delta by probing the in-memory image.
  std::unordered_map<std::uint64_t, Entry> fresh;
  for (const Entry& d : deltas) {
    Entry* target = nullptr;
    for (std::uint32_t i = home_offset(d.key); i < r; ++i) {
      ++report.probes;
      if (slots[i].empty()) break;
      if (slots[i].key == d.key) {
        target = &slots[i];
        break;
      }
    }
    if (target == nullptr) {
      for (Entry& e : image.overflow) {
        ++report.probes;
        if (e.key == d.key) {
          target = &e;
          break;
        }
      }
    }
    if (target == nullptr) {
      auto [it, inserted] = fresh.try_emplace(d.key, Entry{d.key, 0, false});
      target = &it->second;
    }
    if (d.remove_marker) target->count = 0;
    target->count += d.count;
  }

  // Survivors, in canonical order.
  std::vector<Entry> live;
  live.reserve(slots.size() + image.overflow.size() + fresh.size());
  auto keep = [&live](const Entry& e) {
    if (!e.empty() && e.count > 0) live.push_back({e.key, e.count, false});
  };
  for (const Entry& e : slots) keep(e);
  for (const Entry& e : image.overflow) keep(e);
  for (const auto& [key, e] : fresh) keep(e);
  std::sort(live.begin(), live.end(), [this](const Entry& x, const Entry& y) {
    const auto hx = home_offset(x.key);
    const auto hy = home_offset(y.key);
    return hx != hy ? hx < hy : x.key < y.key;
  });

  auto place = [&](std::uint32_t capacity, std::vector<Entry>& out, std::vector<Entry>& spill) {
    out.assign(r, Entry{});
    spill.clear();
    std::uint64_t probes = 0;
    std::uint32_t cursor = 0;
    for (const Entry& e : live) {
      const std::uint32_t pos = std::max(home_offset(e.key), cursor);
      if (pos < capacity) {
        out[pos] = e;
        cursor = pos + 1;
        probes += pos - home_offset(e.key) + 1;
      } else {
        cursor = capacity;
        spill.push_back(e);
        probes += capacity - std::min(capacity, home_offset(e.key)) + 1;
      }
    }
    return probes;
  };
  std::vector<Entry> placed;
  std::vector<Entry> spill;
  report.probes += place(r, placed, spill);
  if (!spill.empty()) report.probes += place(r - 1, placed, spill);

  // Plan the overflow chain.
  const std::size_t needed = (spill.size() + entries_per_page_ - 1) / entries_per_page_;
  std::vector<std::uint32_t>& chain = chains_[block];
  if (needed > chain.size() && needed - chain.size() > free_overflow_pages()) {
    throw BlockFull("data block " + std::to_string(block) + ": " + std::to_string(live.size()) +
                    " live entries need " + std::to_string(needed) +
                    " overflow pages, only " + std::to_string(free_overflow_pages() + chain.size()) +
                    " available");
  }
  std::vector<std::uint32_t> new_chain(chain.begin(),
                                       chain.begin() + static_cast<std::ptrdiff_t>(
                                                           std::min(needed, chain.size())));
  for (std::size_t i = needed; i < chain.size(); ++i) page_owner_[chain[i]] = -1;
  for (std::uint32_t ref = 0; new_chain.size() < needed; ++ref) {
    if (page_owner_[ref] < 0) {
      page_owner_[ref] = block;
      new_chain.push_back(ref);
    }
  }

  // Rewrite the data block: erase, then pages in ascending order.
  if (!new_chain.empty()) placed[r - 1] = {kLocatorKey, std::int64_t{new_chain.front()} + 1, false};
  const auto& geo = device_->geometry();
  std::vector<std::vector<std::uint8_t>> pages;
  pages.reserve(pages_per_block_);
  for (std::uint32_t p = 0; p < pages_per_block_; ++p) {
    pages.push_back(encode_page(
        geo, 0, std::span<const Entry>(placed).subspan(std::size_t{p} * entries_per_page_,
                                                        entries_per_page_)));
  }
  const std::uint32_t physical = layout_.first_data_block + block;
  device_->erase_block(physical);
  device_->program_block(physical, pages);

  // Rewrite chain pages whose content changed.
  std::map<std::uint32_t, std::vector<std::uint8_t>> changed;  // page ref -> new bytes
  for (std::size_t i = 0; i < new_chain.size(); ++i) {
    const auto first = spill.begin() + static_cast<std::ptrdiff_t>(i * entries_per_page_);
    const auto last = spill.begin() +
                      static_cast<std::ptrdiff_t>(std::min(spill.size(), (i + 1) * entries_per_page_));
    const std::vector<Entry> chunk(first, last);
    const std::uint64_t next = i + 1 < new_chain.size() ? std::uint64_t{new_chain[i + 1]} + 1 : 0;
    auto bytes = encode_page(geo, next, chunk);
    const bool same_page = i < image.chain.size() && image.chain[i] == new_chain[i];
    bool same_content = false;
    if (same_page) {
      // Chain pages are full except the last, so page i of the old chain
      // held overflow entries [i*epp, (i+1)*epp).
      const std::uint64_t old_next =
          i + 1 < image.chain.size() ? std::uint64_t{image.chain[i + 1]} + 1 : 0;
      const auto ofirst = old_overflow.begin() + static_cast<std::ptrdiff_t>(
                                                     std::min(old_overflow.size(), i * entries_per_page_));
      const auto olast = old_overflow.begin() +
                         static_cast<std::ptrdiff_t>(std::min(old_overflow.size(), (i + 1) * entries_per_page_));
      same_content = old_next == next && std::equal(ofirst, olast, chunk.begin(), chunk.end());
    }
    if (!same_content) changed.emplace(new_chain[i], std::move(bytes));
  }

  // Group changed pages by overflow block.
  std::map<std::uint32_t, std::vector<std::uint32_t>> by_block;
  for (const auto& [ref, bytes] : changed) by_block[ref / pages_per_block_].push_back(ref);
  for (const auto& [oblock, refs] : by_block) {
    const std::uint32_t physical_block = layout_.first_overflow_block + oblock;
    // Pages still in the erased state can be programmed directly.
    const bool in_place = std::all_of(refs.begin(), refs.end(), [&](std::uint32_t ref) {
      return device_->is_erased(overflow_address(ref));
    });
    if (in_place) {
      for (std::uint32_t ref : refs) device_->write_page(overflow_address(ref), changed[ref]);
      continue;
    }
    // Copy out the pages other chains still own, erase, write back in order.
    std::map<std::uint32_t, std::vector<std::uint8_t>> keep_pages;
    for (std::uint32_t p = 0; p < pages_per_block_; ++p) {
      const std::uint32_t ref = oblock * pages_per_block_ + p;
      if (changed.count(ref) || page_owner_[ref] < 0) continue;
      if (device_->is_erased({physical_block, p})) continue;
      keep_pages.emplace(ref, device_->read_page({physical_block, p}));
    }
    device_->erase_block(physical_block);
    for (std::uint32_t p = 0; p < pages_per_block_; ++p) {
      const std::uint32_t ref = oblock * pages_per_block_ + p;
      if (auto it = changed.find(ref); it != changed.end()) {
        device_->write_page({physical_block, p}, it->second);
      } else if (auto kept = keep_pages.find(ref); kept != keep_pages.end()) {
        device_->write_page({physical_block, p}, kept->second);
      }
    }
  }

  chain = std::move(new_chain);
  live_total_ -= live_per_block_[block];
  live_per_block_[block] = live.size();
  live_total_ += live.size();

  const auto after = device_->snapshot();
  report.pages_read = after.page_reads - before.page_reads;
  report.pages_written = after.page_writes - before.page_writes;
  report.erases = after.erases - before.erases;
  return report;
}

double DataSegment::load_factor() const {
  return static_cast<double>(live_total_) / static_cast<double>(params_.q());
}

std::uint64_t DataSegment::free_overflow_pages() const {
  return static_cast<std::uint64_t>(
      std::count(page_owner_.begin(), page_owner_.end(), std::int64_t{-1}));
}

}  // namespace flashhash
