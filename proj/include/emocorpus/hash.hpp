#pragma once

#include <cstdint>
#include <cstdio>
#include <string>
#include <string_view>

namespace emocorpus {

// 64-bit FNV-1a. Used wherever a hash must be stable across platforms and
// library versions (content hashes, feature hashing, seed derivation).
constexpr std::uint64_t fnv1a64(std::string_view bytes,
                                std::uint64_t h = 0xcbf29ce484222325ULL) noexcept {
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Sub-seed for a named pipeline stage. Stages can be re-run on their own and
/// still draw the same random stream.
constexpr std::uint64_t derive_seed(std::uint64_t seed, std::string_view stage) noexcept {
  return splitmix64(seed ^ fnv1a64(stage));
}

inline std::string to_hex(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return std::string(buf, 16);
}

// Incremental content hasher; fields are separated so that ("ab","c") and
// ("a","bc") hash differently.
class ContentHasher {
 public:
  ContentHasher& field(std::string_view s) {
    h_ = fnv1a64(s, h_);
    h_ = fnv1a64(std::string_view("\x1f", 1), h_);
    return *this;
  }
  ContentHasher& record_end() {
    h_ = fnv1a64(std::string_view("\x1e", 1), h_);
    return *this;
  }
  std::uint64_t value() const { return h_; }
  std::string hex() const { return to_hex(h_); }

 private:
  std::uint64_t h_ = 0xcbf29ce484222325ULL;
};

}  // namespace emocorpus
