#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>

#include "flashhash/flash_device.hpp"

namespace flashhash {

// Parsed `key = value` text. Blank lines and lines starting with '#' are
// ignored; keys are case sensitive; later duplicates win.
class KeyValueConfig {
 public:
  static KeyValueConfig parse(std::istream& in);
  static KeyValueConfig load(const std::string& path);

  bool contains(const std::string& key) const { return values_.count(key) != 0; }
  std::optional<std::string> get(const std::string& key) const;
  std::optional<double> get_double(const std::string& key) const;
  std::optional<std::uint64_t> get_uint(const std::string& key) const;
  const std::map<std::string, std::string>& values() const { return values_; }

  void set(const std::string& key, const std::string& value) { values_[key] = value; }

 private:
  std::map<std::string, std::string> values_;
};

struct DeviceConfig {
  FlashGeometry geometry;
  DeviceProfile profile;
};

// Reads a device description. Recognised keys: name, blocks_total,
// pages_per_block, page_size, entry_size, page_read_us, page_write_us,
// block_erase_us, seq_write_bonus, erase_limit. When `name` matches a shipped
// profile its values are the defaults for the latency keys.
DeviceConfig device_config_from(const KeyValueConfig& kv);
DeviceConfig load_device_config(std::istream& in);

}  // namespace flashhash
