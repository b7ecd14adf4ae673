#include "flashhash/config.hpp"

#include <charconv>
#include <fstream>
#include <istream>

#include "flashhash/errors.hpp"

namespace flashhash {

namespace {

std::string trim(const std::string& s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

}  // namespace

KeyValueConfig KeyValueConfig::parse(std::istream& in) {
  KeyValueConfig kv;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string t = trim(line);
    if (t.empty() || t[0] == '#') continue;
    const auto eq = t.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("line " + std::to_string(line_no) + ": expected key=value");
    }
    const std::string key = trim(t.substr(0, eq));
    if (key.empty()) throw ConfigError("line " + std::to_string(line_no) + ": empty key");
    kv.values_[key] = trim(t.substr(eq + 1));
  }
  return kv;
}

KeyValueConfig KeyValueConfig::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  return parse(in);
}

std::optional<std::string> KeyValueConfig::get(const std::string& key) const {
  const auto it = values_.find(key);
  if (it == values_.end()) return std::nullopt;
  return it->second;
}

std::optional<double> KeyValueConfig::get_double(const std::string& key) const {
  const auto v = get(key);
  if (!v) return std::nullopt;
  try {
    std::size_t used = 0;
    const double d = std::stod(*v, &used);
    if (used != v->size()) throw ConfigError("");
    return d;
  } catch (const std::exception&) {
    throw ConfigError("key '" + key + "': '" + *v + "' is not a number");
  }
}

std::optional<std::uint64_t> KeyValueConfig::get_uint(const std::string& key) const {
  const auto v = get(key);
  if (!v) return std::nullopt;
  std::uint64_t out = 0;
  const auto [ptr, ec] = std::from_chars(v->data(), v->data() + v->size(), out);
  if (ec != std::errc{} || ptr != v->data() + v->size()) {
    throw ConfigError("key '" + key + "': '" + *v + "' is not an unsigned integer");
  }
  return out;
}

DeviceConfig device_config_from(const KeyValueConfig& kv) {
  DeviceConfig cfg;
  const std::string name = kv.get("name").value_or("MLC-1");
  try {
    cfg.profile = profile_by_name(name);
  } catch (const ConfigError&) {
    cfg.profile = DeviceProfile{};
    cfg.profile.name = name;
  }
  auto narrow = [&](const char* key, std::uint32_t fallback) {
    const auto v = kv.get_uint(key);
    if (!v) return fallback;
    if (*v > UINT32_MAX) throw ConfigError(std::string("key '") + key + "' too large");
    return static_cast<std::uint32_t>(*v);
  };
  cfg.geometry.blocks_total = narrow("blocks_total", 73);
  cfg.geometry.pages_per_block = narrow("pages_per_block", 16);
  cfg.geometry.page_size = narrow("page_size", 4096);
  cfg.geometry.entry_size = narrow("entry_size", 16);
  cfg.profile.page_read_us = kv.get_double("page_read_us").value_or(cfg.profile.page_read_us);
  cfg.profile.page_write_us = kv.get_double("page_write_us").value_or(cfg.profile.page_write_us);
  cfg.profile.block_erase_us = kv.get_double("block_erase_us").value_or(cfg.profile.block_erase_us);
  cfg.profile.seq_write_bonus =
      kv.get_double("seq_write_bonus").value_or(cfg.profile.seq_write_bonus);
  cfg.profile.erase_limit = kv.get_uint("erase_limit").value_or(cfg.profile.erase_limit);
  cfg.geometry.validate();
  cfg.profile.validate();
  return cfg;
}

DeviceConfig load_device_config(std::istream& in) {
  return device_config_from(KeyValueConfig::parse(in));
}

}  // namespace flashhash
