#pragma once

#include <cstdint>
#include <optional>
#include <string_view>

namespace flashhash {

// Key values that callers may not use: the empty-entry sentinel and the
// marker stored in the reserved overflow-locator entry of a data block.
inline constexpr std::uint64_t kEmptyKey = ~std::uint64_t{0};
inline constexpr std::uint64_t kLocatorKey = ~std::uint64_t{0} - 1;

constexpr bool is_reserved_key(std::uint64_t key) { return key >= kLocatorKey; }

// Parameters of the coupled hash pair
//
//   primary(x)   = (a*x + b) mod q          entry index in the data segment
//   secondary(x) = primary(x) div r         RAM-buffer slot == data block
//
// q is the data-segment capacity in entries and r the entries per data block,
// so every slot corresponds to exactly one block: slot m covers entry indices
// [m*r, (m+1)*r). Instances are always valid; construction enforces
// gcd(a, q) == 1, r < q and q % r == 0.
class HashParams {
 public:
  static constexpr std::uint64_t kDefaultA = 2654435761ULL;
  static constexpr std::uint64_t kDefaultB = 0x9E3779B9ULL;

  // Throws InvalidParams.
  static HashParams create(std::uint64_t a, std::uint64_t b, std::uint64_t q, std::uint64_t r);

  // Parameters for a table of `blocks` data blocks of `r` entries each.
  // Without a seed, a = kDefaultA bumped to the next value coprime with q and
  // b = kDefaultB mod q. With a seed, a and b are drawn from a seeded
  // mt19937_64 and a is bumped the same way.
  static HashParams for_table(std::uint64_t blocks, std::uint64_t r,
                              std::optional<std::uint64_t> seed = std::nullopt);

  std::uint64_t a() const { return a_; }
  std::uint64_t b() const { return b_; }
  std::uint64_t q() const { return q_; }
  std::uint64_t r() const { return r_; }
  std::uint64_t slots() const { return q_ / r_; }

  bool operator==(const HashParams&) const = default;

 private:
  HashParams(std::uint64_t a, std::uint64_t b, std::uint64_t q, std::uint64_t r)
      : a_(a), b_(b), q_(q), r_(r) {}

  std::uint64_t a_;
  std::uint64_t b_;
  std::uint64_t q_;
  std::uint64_t r_;
};

__extension__ typedef unsigned __int128 uint128;

// (a*key + b) mod q, computed exactly in 128-bit arithmetic.
inline std::uint64_t primary_hash(std::uint64_t key, const HashParams& p) {
  const uint128 v = static_cast<uint128>(p.a()) * key + static_cast<uint128>(p.b());
  return static_cast<std::uint64_t>(v % p.q());
}

inline std::uint64_t secondary_hash(std::uint64_t key, const HashParams& p) {
  return primary_hash(key, p) / p.r();
}

inline constexpr std::uint64_t kDefaultStringSeed = 0x5851F42D4C957F2DULL;

// Seeded 64-bit string hash used to turn tokens into table keys: FNV-1a over
// the bytes, seed folded into the offset basis, followed by a murmur3-style
// finalizer. Results never collide with the reserved key values.
std::uint64_t string_key(std::string_view text, std::uint64_t seed = kDefaultStringSeed);

}  // namespace flashhash
