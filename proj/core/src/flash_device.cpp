#include "flashhash/flash_device.hpp"

#include <algorithm>
#include <cctype>
#include <ostream>
#include <sstream>

#include "flashhash/errors.hpp"

namespace flashhash {

void FlashGeometry::validate() const {
  if (blocks_total == 0) throw InvalidParams("geometry: blocks_total must be >= 1");
  if (pages_per_block == 0) throw InvalidParams("geometry: pages_per_block must be >= 1");
  if (entry_size == 0) throw InvalidParams("geometry: entry_size must be >= 1");
  if (entries_per_page() == 0) throw InvalidParams("geometry: page_size smaller than one entry");
}

void DeviceProfile::validate() const {
  if (!(page_read_us > 0) || !(page_write_us > 0) || !(block_erase_us > 0)) {
    throw InvalidParams("profile " + name + ": latencies must be positive");
  }
  if (!(seq_write_bonus > 0) || seq_write_bonus > 1) {
    throw InvalidParams("profile " + name + ": seq_write_bonus must be in (0, 1]");
  }
  if (erase_limit == 0) throw InvalidParams("profile " + name + ": erase_limit must be positive");
}

DeviceProfile mlc1_profile() { return {"MLC-1", 65, 110, 1500, 0.5, 10000}; }
DeviceProfile mlc2_profile() { return {"MLC-2", 65, 85, 1500, 0.5, 10000}; }
DeviceProfile slc_profile() { return {"SLC", 75, 85, 1500, 0.5, 100000}; }

DeviceProfile profile_by_name(const std::string& name) {
  std::string upper(name);
  std::transform(upper.begin(), upper.end(), upper.begin(),
                 [](unsigned char c) { return static_cast<char>(std::toupper(c)); });
  if (upper == "MLC-1" || upper == "MLC1") return mlc1_profile();
  if (upper == "MLC-2" || upper == "MLC2") return mlc2_profile();
  if (upper == "SLC") return slc_profile();
  throw ConfigError("unknown device profile '" + name + "'");
}

const char* to_string(WriteClass cls) {
  return cls == WriteClass::semi_random ? "semi" : "random";
}

const char* to_string(TraceOp op) {
  switch (op) {
    case TraceOp::read:
      return "read";
    case TraceOp::write:
      return "write";
    case TraceOp::erase:
      return "erase";
    case TraceOp::block_read:
      return "block_read";
    case TraceOp::block_write:
      return "block_write";
  }
  return "?";
}

FlashDevice::FlashDevice(FlashGeometry geometry, DeviceProfile profile)
    : geometry_(geometry), profile_(std::move(profile)) {
  geometry_.validate();
  profile_.validate();
  data_.assign(geometry_.pages_total() * geometry_.page_bytes(), 0);
  written_.assign(geometry_.pages_total(), 0);
  last_written_page_.assign(geometry_.blocks_total, -1);
  metrics_.erases_per_block.assign(geometry_.blocks_total, 0);
}

void FlashDevice::check_block(std::uint32_t block) const {
  if (block >= geometry_.blocks_total) {
    throw AddressOutOfRange("block " + std::to_string(block) + " out of range (" +
                            std::to_string(geometry_.blocks_total) + " blocks)");
  }
}

void FlashDevice::check_page(PageAddress addr) const {
  check_block(addr.block);
  if (addr.page >= geometry_.pages_per_block) {
    throw AddressOutOfRange("page " + std::to_string(addr.page) + " out of range (" +
                            std::to_string(geometry_.pages_per_block) + " pages per block)");
  }
}

std::size_t FlashDevice::page_index(PageAddress addr) const {
  return static_cast<std::size_t>(addr.block) * geometry_.pages_per_block + addr.page;
}

void FlashDevice::record(TraceOp op, std::uint32_t block, std::uint32_t page,
                         std::optional<WriteClass> cls, double time_us) {
  metrics_.simulated_time_us += time_us;
  if (tracing_) trace_.push_back({op, block, page, cls, time_us});
}

std::vector<std::uint8_t> FlashDevice::read_page(PageAddress addr) {
  check_page(addr);
  const std::size_t bytes = geometry_.page_bytes();
  const auto first = data_.begin() + static_cast<std::ptrdiff_t>(page_index(addr) * bytes);
  std::vector<std::uint8_t> out(first, first + static_cast<std::ptrdiff_t>(bytes));
  ++metrics_.page_reads;
  record(TraceOp::read, addr.block, addr.page, std::nullopt, profile_.page_read_us);
  return out;
}

WriteClass FlashDevice::write_page(PageAddress addr, std::span<const std::uint8_t> payload) {
  check_page(addr);
  const std::size_t bytes = geometry_.page_bytes();
  if (payload.size() > bytes) {
    throw InvalidParams("payload of " + std::to_string(payload.size()) +
                        " bytes exceeds page size " + std::to_string(bytes));
  }
  const std::size_t index = page_index(addr);
  if (written_[index] != 0) {
    throw WriteToWrittenPage("page (" + std::to_string(addr.block) + "," +
                             std::to_string(addr.page) + ") written without erase");
  }
  auto dest = data_.begin() + static_cast<std::ptrdiff_t>(index * bytes);
  std::copy(payload.begin(), payload.end(), dest);
  std::fill(dest + static_cast<std::ptrdiff_t>(payload.size()),
            dest + static_cast<std::ptrdiff_t>(bytes), 0);
  written_[index] = 1;

  auto& last = last_written_page_[addr.block];
  const WriteClass cls =
      static_cast<std::int64_t>(addr.page) > last ? WriteClass::semi_random : WriteClass::random;
  last = addr.page;

  ++metrics_.page_writes;
  double cost = profile_.page_write_us;
  if (cls == WriteClass::semi_random) {
    ++metrics_.semi_random_writes;
    cost *= profile_.seq_write_bonus;
  } else {
    ++metrics_.random_writes;
  }
  record(TraceOp::write, addr.block, addr.page, cls, cost);
  return cls;
}

void FlashDevice::erase_block(std::uint32_t block) {
  check_block(block);
  const std::size_t bytes = geometry_.page_bytes();
  const std::size_t first_page = static_cast<std::size_t>(block) * geometry_.pages_per_block;
  std::fill(data_.begin() + static_cast<std::ptrdiff_t>(first_page * bytes),
            data_.begin() + static_cast<std::ptrdiff_t>((first_page + geometry_.pages_per_block) * bytes),
            0);
  std::fill(written_.begin() + static_cast<std::ptrdiff_t>(first_page),
            written_.begin() + static_cast<std::ptrdiff_t>(first_page + geometry_.pages_per_block), 0);
  last_written_page_[block] = -1;

  ++metrics_.erases;
  auto& count = metrics_.erases_per_block[block];
  ++count;
  if (count == profile_.erase_limit + 1) {
    ++metrics_.worn_blocks;
    metrics_.wear_limit_exceeded = true;
  }
  record(TraceOp::erase, block, 0, std::nullopt, profile_.block_erase_us);
}

std::vector<std::vector<std::uint8_t>> FlashDevice::read_block(std::uint32_t block) {
  check_block(block);
  std::vector<std::vector<std::uint8_t>> pages;
  pages.reserve(geometry_.pages_per_block);
  for (std::uint32_t p = 0; p < geometry_.pages_per_block; ++p) {
    pages.push_back(read_page({block, p}));
  }
  ++metrics_.block_reads;
  record(TraceOp::block_read, block, 0, std::nullopt, 0);
  return pages;
}

void FlashDevice::program_block(std::uint32_t block,
                                std::span<const std::vector<std::uint8_t>> pages) {
  check_block(block);
  if (pages.size() > geometry_.pages_per_block) {
    throw InvalidParams("program_block: more pages than a block holds");
  }
  for (std::uint32_t p = 0; p < pages.size(); ++p) {
    write_page({block, p}, pages[p]);
  }
  ++metrics_.block_writes;
  record(TraceOp::block_write, block, 0, std::nullopt, 0);
}

bool FlashDevice::is_erased(PageAddress addr) const {
  check_page(addr);
  return written_[page_index(addr)] == 0;
}

bool FlashDevice::block_is_erased(std::uint32_t block) const {
  check_block(block);
  return last_written_page_[block] < 0;
}

MetricsSnapshot FlashDevice::snapshot() const { return metrics_; }

void FlashDevice::write_trace_csv(std::ostream& out) const {
  out << "op,block,page,class,time_us\n";
  for (const auto& r : trace_) {
    out << to_string(r.op) << ',' << r.block << ',' << r.page << ','
        << (r.write_class ? to_string(*r.write_class) : "-") << ',' << r.time_us << '\n';
  }
}

FlashDevice replay_trace(const FlashGeometry& geometry, const DeviceProfile& profile,
                         std::span<const TraceRecord> trace) {
  FlashDevice device(geometry, profile);
  device.enable_trace(true);
  const std::vector<std::uint8_t> blank;
  for (const auto& r : trace) {
    switch (r.op) {
      case TraceOp::read:
        device.read_page({r.block, r.page});
        break;
      case TraceOp::write:
        device.write_page({r.block, r.page}, blank);
        break;
      case TraceOp::erase:
        device.erase_block(r.block);
        break;
      case TraceOp::block_read:
        ++device.metrics_.block_reads;
        device.record(r.op, r.block, 0, std::nullopt, 0);
        break;
      case TraceOp::block_write:
        ++device.metrics_.block_writes;
        device.record(r.op, r.block, 0, std::nullopt, 0);
        break;
    }
  }
  return device;
}

}  // namespace flashhash
