#pragma once

#include <cstdint>
#include <optional>
#include <random>
#include <unordered_map>
#include <vector>

#include "flashhash/table.hpp"

namespace flashhash::testing {

// In-memory reference for the counting semantics the table implements.
class ReferenceCounter {
 public:
  void insert(std::uint64_t key) { ++counts_[key]; }
  void decrement(std::uint64_t key) {
    auto it = counts_.find(key);
    if (it == counts_.end()) return;
    if (--it->second <= 0) counts_.erase(it);
  }
  void remove(std::uint64_t key) { counts_.erase(key); }
  std::optional<std::int64_t> query(std::uint64_t key) const {
    auto it = counts_.find(key);
    if (it == counts_.end()) return std::nullopt;
    return it->second;
  }
  std::int64_t count(std::uint64_t key) const { return query(key).value_or(0); }
  const std::unordered_map<std::uint64_t, std::int64_t>& counts() const { return counts_; }

 private:
  std::unordered_map<std::uint64_t, std::int64_t> counts_;
};

enum class OpKind { insert, decrement, remove, query };

struct Op {
  OpKind kind;
  std::uint64_t key;
};

// Random insert/decrement/remove/query stream over a fixed key pool. Updates
// other than inserts only target keys that are live in the reference, which
// keeps counts non-negative in every tier.
class MixedWorkload {
 public:
  MixedWorkload(std::uint64_t seed, std::uint64_t key_pool, bool zipf)
      : rng_(seed), pool_(key_pool), zipf_(zipf) {
    if (zipf_) {
      std::vector<double> weights(pool_);
      for (std::uint64_t i = 0; i < pool_; ++i) weights[i] = 1.0 / static_cast<double>(i + 1);
      zipf_dist_ = std::discrete_distribution<std::uint64_t>(weights.begin(), weights.end());
    }
  }

  static std::uint64_t key_of(std::uint64_t rank) {
    // Odd multiplier: a bijection on 64-bit words, never hits the reserved keys
    // for small ranks.
    return (rank + 1) * 0x9E3779B97F4A7C15ULL >> 1;
  }

  Op next(const ReferenceCounter& ref) {
    const std::uint64_t roll = rng_() % 100;
    const std::uint64_t key = draw_key();
    if (roll < 55) return {OpKind::insert, key};
    if (roll < 75) return {OpKind::query, key};
    if (roll < 95) {
      if (ref.count(key) > 0) return {OpKind::decrement, key};
      return {OpKind::insert, key};
    }
    if (ref.count(key) > 0) return {OpKind::remove, key};
    return {OpKind::query, key};
  }

 private:
  std::uint64_t draw_key() {
    const std::uint64_t rank = zipf_ ? zipf_dist_(rng_) : rng_() % pool_;
    return key_of(rank);
  }

  std::mt19937_64 rng_;
  std::uint64_t pool_;
  bool zipf_;
  std::discrete_distribution<std::uint64_t> zipf_dist_;
};

// 64 blocks x 4 pages x 64 entries: r = 256, q = 16384.
inline TableConfig compact_config(Scheme scheme) {
  TableConfig c;
  c.scheme = scheme;
  c.data_blocks = 64;
  c.pages_per_block = 4;
  c.page_size = 1024;
  c.ram_budget_pct = 5;
  c.change_segment_pct = 12.5;
  c.overflow_blocks = 4;  // 16 chain pages shared by 64 blocks
  return c;
}

// 8 blocks x 2 pages x 8 entries: r = 16, q = 128.
inline TableConfig tiny_config(Scheme scheme) {
  TableConfig c;
  c.scheme = scheme;
  c.data_blocks = 8;
  c.pages_per_block = 2;
  c.page_size = 128;
  c.ram_budget_pct = 10;
  c.change_segment_pct = 25;
  return c;
}

}  // namespace flashhash::testing
