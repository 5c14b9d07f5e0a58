#pragma once

#include <cstdint>
#include <cstring>
#include <span>
#include <string_view>

namespace cfx {

// 64-bit FNV-1a. Used for schema fingerprints and config hashes, not for
// anything security related.
class Fnv1a {
 public:
  Fnv1a& add(std::string_view bytes) {
    for (unsigned char c : bytes) {
      state_ ^= c;
      state_ *= 0x100000001b3ULL;
    }
    return *this;
  }

  Fnv1a& add(std::span<const unsigned char> bytes) {
    for (unsigned char c : bytes) {
      state_ ^= c;
      state_ *= 0x100000001b3ULL;
    }
    return *this;
  }

  Fnv1a& add(std::uint64_t v) {
    unsigned char buf[sizeof v];
    std::memcpy(buf, &v, sizeof v);
    return add(std::span<const unsigned char>(buf, sizeof buf));
  }

  Fnv1a& add(double v) {
    unsigned char buf[sizeof v];
    std::memcpy(buf, &v, sizeof v);
    return add(std::span<const unsigned char>(buf, sizeof buf));
  }

  std::uint64_t value() const { return state_; }

 private:
  std::uint64_t state_ = 0xcbf29ce484222325ULL;
};

}  // namespace cfx
