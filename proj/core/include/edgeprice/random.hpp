#pragma once

#include <cstdint>
#include <initializer_list>
#include <limits>
#include <string_view>

namespace edgeprice {

// SplitMix64 output finalizer (Stafford variant 13).
constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

// Hashes a label into a 64-bit stream-key component (FNV-1a then mixed).
std::uint64_t hash_label(std::string_view label) noexcept;

// Folds an ordered list of key components into one stream key. Order matters.
std::uint64_t derive_key(std::initializer_list<std::uint64_t> parts) noexcept;

/// Counter-based random stream.
///
/// The i-th output is a pure function of (key, i), so a stream can be
/// positioned anywhere without replaying earlier draws and two streams with
/// different keys never share state. Satisfies UniformRandomBitGenerator.
class Stream {
 public:
  using result_type = std::uint64_t;

  explicit Stream(std::uint64_t key, std::uint64_t counter = 0) noexcept
      : key_(key), counter_(counter) {}

  static constexpr result_type min() noexcept { return 0; }
  static constexpr result_type max() noexcept {
    return std::numeric_limits<result_type>::max();
  }

  result_type operator()() noexcept {
    ++counter_;
    return mix64(key_ + counter_ * kWeyl);
  }

  // Uniform double in [0, 1) with 53 random bits.
  double uniform() noexcept {
    return static_cast<double>((*this)() >> 11) * 0x1.0p-53;
  }

  // Uniform integer in [0, n). n must be positive.
  std::uint64_t below(std::uint64_t n) noexcept;

  void discard(std::uint64_t n) noexcept { counter_ += n; }

  std::uint64_t key() const noexcept { return key_; }
  std::uint64_t counter() const noexcept { return counter_; }

 private:
  static constexpr std::uint64_t kWeyl = 0x9e3779b97f4a7c15ULL;

  std::uint64_t key_;
  std::uint64_t counter_;
};

}  // namespace edgeprice
