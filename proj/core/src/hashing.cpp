#include "flashhash/hashing.hpp"

#include <numeric>
#include <random>
#include <string>

#include "flashhash/errors.hpp"

namespace flashhash {

namespace {

std::uint64_t next_coprime(std::uint64_t a, std::uint64_t q) {
  if (a % q == 0) ++a;
  while (std::gcd(a, q) != 1) ++a;
  return a;
}

}  // namespace

HashParams HashParams::create(std::uint64_t a, std::uint64_t b, std::uint64_t q,
                              std::uint64_t r) {
  if (q == 0 || r == 0) throw InvalidParams("hash params: q and r must be positive");
  if (r >= q) {
    throw InvalidParams("hash params: r (" + std::to_string(r) + ") must be smaller than q (" +
                        std::to_string(q) + ")");
  }
  if (q % r != 0) throw InvalidParams("hash params: q must be a multiple of r");
  if (std::gcd(a, q) != 1) {
    throw InvalidParams("hash params: gcd(a, q) must be 1 (a=" + std::to_string(a) +
                        ", q=" + std::to_string(q) + ")");
  }
  return HashParams(a, b, q, r);
}

HashParams HashParams::for_table(std::uint64_t blocks, std::uint64_t r,
                                 std::optional<std::uint64_t> seed) {
  const std::uint64_t q = blocks * r;
  if (q == 0) throw InvalidParams("hash params: empty table");
  std::uint64_t a = kDefaultA;
  std::uint64_t b = kDefaultB % q;
  if (seed) {
    std::mt19937_64 rng(*seed);
    a = rng() | 1;
    b = rng() % q;
  }
  return create(next_coprime(a, q), b, q, r);
}

std::uint64_t string_key(std::string_view text, std::uint64_t seed) {
  std::uint64_t h = 14695981039346656037ULL ^ seed;
  for (const char c : text) {
    h ^= static_cast<unsigned char>(c);
    h *= 1099511628211ULL;
  }
  h ^= h >> 33;
  h *= 0xff51afd7ed558ccdULL;
  h ^= h >> 33;
  h *= 0xc4ceb9fe1a85ec53ULL;
  h ^= h >> 33;
  // Fold the two reserved values onto ordinary keys.
  return is_reserved_key(h) ? h - 2 : h;
}

}  // namespace flashhash
