#include "flashhash/table.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <iomanip>
#include <sstream>

#include "flashhash/errors.hpp"

namespace flashhash {

const char* to_string(Scheme scheme) {
  switch (scheme) {
    case Scheme::NB:
      return "NB";
    case Scheme::MB:
      return "MB";
    case Scheme::MDB:
      return "MDB";
    case Scheme::MDB_L:
      return "MDB-L";
  }
  return "?";
}

Scheme scheme_from_string(const std::string& name) {
  std::string upper(name);
  std::transform(upper.begin(), upper.end(), upper.begin(),
                 [](unsigned char c) { return static_cast<char>(std::toupper(c)); });
  if (upper == "NB") return Scheme::NB;
  if (upper == "MB") return Scheme::MB;
  if (upper == "MDB") return Scheme::MDB;
  if (upper == "MDB-L" || upper == "MDB_L" || upper == "MDBL") return Scheme::MDB_L;
  throw ConfigError("unknown scheme '" + name + "'");
}

// --- TableConfig ---

void TableConfig::validate() const {
  if (data_blocks < 2) throw InvalidParams("table: need at least two data blocks");
  if (pages_per_block == 0) throw InvalidParams("table: pages_per_block must be >= 1");
  if (page_size < kEntryBytes) throw InvalidParams("table: page smaller than one entry");
  auto pct_ok = [](double p) { return p > 0 && p <= 100; };
  if (scheme != Scheme::NB && !pct_ok(ram_budget_pct)) {
    throw InvalidParams("table: ram_budget_pct must be in (0, 100]");
  }
  if ((scheme == Scheme::MDB || scheme == Scheme::MDB_L) && !pct_ok(change_segment_pct)) {
    throw InvalidParams("table: change_segment_pct must be in (0, 100]");
  }
  profile.validate();
}

std::uint32_t TableConfig::change_blocks() const {
  if (scheme != Scheme::MDB && scheme != Scheme::MDB_L) return 0;
  const double blocks = std::ceil(data_blocks * change_segment_pct / 100.0 - 1e-9);
  return std::max<std::uint32_t>(1, static_cast<std::uint32_t>(blocks));
}

FlashGeometry TableConfig::device_geometry() const {
  FlashGeometry g;
  g.blocks_total = data_blocks + overflow_blocks + change_blocks();
  g.pages_per_block = pages_per_block;
  g.page_size = page_size;
  g.entry_size = kEntryBytes;
  g.spare_size = kPageHeaderBytes;
  return g;
}

std::uint64_t TableConfig::data_segment_bytes() const {
  return std::uint64_t{data_blocks} * pages_per_block * page_size;
}

std::uint64_t TableConfig::ram_budget_bytes() const {
  return static_cast<std::uint64_t>(
      std::floor(static_cast<double>(data_segment_bytes()) * ram_budget_pct / 100.0));
}

// --- TableHeader ---

namespace {

template <typename T>
void put_le(std::vector<std::uint8_t>& out, std::size_t offset, T v) {
  for (std::size_t i = 0; i < sizeof(T); ++i) {
    out[offset + i] = static_cast<std::uint8_t>(static_cast<std::uint64_t>(v) >> (8 * i));
  }
}

template <typename T>
T get_le(std::span<const std::uint8_t> in, std::size_t offset) {
  std::uint64_t v = 0;
  for (std::size_t i = 0; i < sizeof(T); ++i) {
    v |= static_cast<std::uint64_t>(in[offset + i]) << (8 * i);
  }
  return static_cast<T>(v);
}

}  // namespace

std::vector<std::uint8_t> TableHeader::serialize() const {
  std::vector<std::uint8_t> out(kSize, 0);
  put_le<std::uint32_t>(out, 0, kMagic);
  put_le<std::uint16_t>(out, 4, kVersion);
  put_le<std::uint8_t>(out, 6, static_cast<std::uint8_t>(scheme));
  put_le<std::uint32_t>(out, 8, geometry.blocks_total);
  put_le<std::uint32_t>(out, 12, geometry.pages_per_block);
  put_le<std::uint32_t>(out, 16, geometry.page_size);
  put_le<std::uint32_t>(out, 20, geometry.entry_size);
  put_le<std::uint32_t>(out, 24, data_blocks);
  put_le<std::uint32_t>(out, 28, overflow_blocks);
  put_le<std::uint32_t>(out, 32, change_blocks);
  put_le<std::uint64_t>(out, 40, a);
  put_le<std::uint64_t>(out, 48, b);
  put_le<std::uint64_t>(out, 56, q);
  put_le<std::uint64_t>(out, 64, r);
  return out;
}

TableHeader TableHeader::parse(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < kSize) throw ConfigError("table header: truncated");
  if (get_le<std::uint32_t>(bytes, 0) != kMagic) throw ConfigError("table header: bad magic");
  if (get_le<std::uint16_t>(bytes, 4) != kVersion) {
    throw ConfigError("table header: unsupported version");
  }
  const auto scheme = get_le<std::uint8_t>(bytes, 6);
  if (scheme > static_cast<std::uint8_t>(Scheme::MDB_L)) {
    throw ConfigError("table header: bad scheme");
  }
  TableHeader h;
  h.scheme = static_cast<Scheme>(scheme);
  h.geometry.blocks_total = get_le<std::uint32_t>(bytes, 8);
  h.geometry.pages_per_block = get_le<std::uint32_t>(bytes, 12);
  h.geometry.page_size = get_le<std::uint32_t>(bytes, 16);
  h.geometry.entry_size = get_le<std::uint32_t>(bytes, 20);
  h.geometry.spare_size = kPageHeaderBytes;
  h.data_blocks = get_le<std::uint32_t>(bytes, 24);
  h.overflow_blocks = get_le<std::uint32_t>(bytes, 28);
  h.change_blocks = get_le<std::uint32_t>(bytes, 32);
  h.a = get_le<std::uint64_t>(bytes, 40);
  h.b = get_le<std::uint64_t>(bytes, 48);
  h.q = get_le<std::uint64_t>(bytes, 56);
  h.r = get_le<std::uint64_t>(bytes, 64);
  return h;
}

// --- TableMetrics ---

std::uint64_t TableMetrics::page_ops(std::uint32_t pages_per_block) const {
  const std::uint64_t total = device.page_reads + device.page_writes;
  return total - std::uint64_t{pages_per_block} * block_ops();
}

// --- CountingHashTable ---

namespace {

HashParams make_params(const TableConfig& config) {
  config.validate();
  const std::uint64_t r =
      std::uint64_t{config.pages_per_block} * (config.page_size / kEntryBytes);
  return HashParams::for_table(config.data_blocks, r, config.hash_seed);
}

}  // namespace

CountingHashTable::CountingHashTable(const TableConfig& config)
    : config_(config), params_(make_params(config)) {
  const FlashGeometry geometry = config_.device_geometry();
  device_ = std::make_unique<FlashDevice>(geometry, config_.profile);

  DataSegmentLayout layout;
  layout.first_data_block = 0;
  layout.data_blocks = config_.data_blocks;
  layout.first_overflow_block = config_.data_blocks;
  layout.overflow_blocks = config_.overflow_blocks;
  data_ = std::make_unique<DataSegment>(*device_, params_, layout);

  buffer_ = std::make_unique<RamBuffer>(params_, config_.ram_budget_bytes());

  const ChangeSegmentLayout change_layout{config_.data_blocks + config_.overflow_blocks,
                                          config_.change_blocks()};
  if (config_.scheme == Scheme::MDB) {
    change_ = std::make_unique<PartitionedChangeSegment>(*device_, params_, change_layout);
  } else if (config_.scheme == Scheme::MDB_L) {
    change_ = std::make_unique<LinearChangeSegment>(*device_, params_, change_layout);
  }

  header_.scheme = config_.scheme;
  header_.geometry = geometry;
  header_.data_blocks = config_.data_blocks;
  header_.overflow_blocks = config_.overflow_blocks;
  header_.change_blocks = config_.change_blocks();
  header_.a = params_.a();
  header_.b = params_.b();
  header_.q = params_.q();
  header_.r = params_.r();
}

void CountingHashTable::check_key(std::uint64_t key) {
  if (is_reserved_key(key)) {
    throw KeyIsSentinel("key " + std::to_string(key) + " is reserved by the table");
  }
}

void CountingHashTable::apply_immediately(const Entry& delta) {
  const auto block = static_cast<std::uint32_t>(secondary_hash(delta.key, params_));
  data_->apply_block_updates(block, std::span<const Entry>(&delta, 1));
}

void CountingHashTable::update(std::uint64_t key, std::int64_t delta) {
  check_key(key);
  if (config_.scheme == Scheme::NB) {
    apply_immediately({key, delta, false});
    return;
  }
  if (buffer_->upsert(key, delta)) on_buffer_full();
}

void CountingHashTable::remove(std::uint64_t key) {
  check_key(key);
  if (config_.scheme == Scheme::NB) {
    apply_immediately({key, 0, true});
    return;
  }
  if (buffer_->mark_remove(key)) on_buffer_full();
}

void CountingHashTable::merge_batch(const MergeBatch& batch) {
  for (const SlotDeltas& slot : batch) {
    data_->apply_block_updates(slot.slot, slot.deltas);
    ++block_merges_;
  }
}

void CountingHashTable::merge_change_units(const std::vector<std::uint32_t>& units) {
  for (std::uint32_t unit : units) {
    merge_batch(change_->collect_for_merge(unit));
    ++merges_;
  }
}

void CountingHashTable::on_buffer_full() {
  auto drained = buffer_->drain();
  if (drained.empty()) return;
  if (!change_) {
    merge_batch(drained);
    ++merges_;
    return;
  }
  ++stages_;
  const MergeSink sink = [this](MergeBatch&& batch) {
    merge_batch(batch);
    ++merges_;
  };
  const StageReport report = change_->stage(drained, sink);
  if (report.log_full) {
    merge_change_units({0});
  } else {
    merge_change_units(report.full_blocks);
  }
}

void CountingHashTable::flush() {
  if (!buffer_->empty()) on_buffer_full();
  if (change_) merge_change_units(change_->pending_units());
}

std::optional<std::int64_t> CountingHashTable::query(std::uint64_t key) {
  if (is_reserved_key(key)) return std::nullopt;
  std::int64_t net = data_->lookup(key).count.value_or(0);
  if (change_) {
    const StagedLookup staged = change_->lookup(key);
    if (staged.removed) net = 0;
    net += staged.sum;
  }
  if (const auto pending = buffer_->lookup(key)) {
    if (pending->remove_marker) net = 0;
    net += pending->count;
  }
  if (net <= 0) return std::nullopt;
  return net;
}

TableMetrics CountingHashTable::metrics() const {
  TableMetrics m;
  m.device = device_->snapshot();
  m.merges = merges_;
  m.stages = stages_;
  m.block_merges = block_merges_;
  return m;
}

std::string metrics_csv_row(const TableConfig& config, const TableMetrics& metrics) {
  std::ostringstream out;
  const bool uses_ram = config.scheme != Scheme::NB;
  const bool uses_change = config.scheme == Scheme::MDB || config.scheme == Scheme::MDB_L;
  out << to_string(config.scheme) << ',';
  if (uses_ram) out << config.ram_budget_pct;
  out << ',';
  if (uses_change) out << config.change_segment_pct;
  out << ',' << metrics.block_ops() << ',' << metrics.page_ops(config.pages_per_block) << ','
      << metrics.merges << ',' << metrics.stages << ',' << metrics.device.erases << ','
      << std::fixed << std::setprecision(1) << metrics.device.simulated_time_us;
  return out.str();
}

}  // namespace flashhash
