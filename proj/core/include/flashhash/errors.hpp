#pragma once

#include <stdexcept>
#include <string>

namespace flashhash {

// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class AddressOutOfRange : public Error {
 public:
  using Error::Error;
};

// A page was written twice without an intervening block erase. Always a
// protocol bug in the caller.
class WriteToWrittenPage : public Error {
 public:
  using Error::Error;
};

class InvalidParams : public Error {
 public:
  using Error::Error;
};

// A data block plus the free overflow pages cannot hold the block's live
// entries. The table was sized too small for its workload.
class BlockFull : public Error {
 public:
  using Error::Error;
};

class KeyIsSentinel : public Error {
 public:
  using Error::Error;
};

class InvalidGrid : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

}  // namespace flashhash
