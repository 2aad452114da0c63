#pragma once

#include <bit>
#include <cassert>
#include <cstddef>
#include <cstdint>
#include <vector>

namespace gtsim {

/// Fixed-length bit vector. Canonical representation for infection vectors,
/// test outcomes and decoder calls; packed words keep membership O(1) and
/// Hamming distance a word-parallel popcount.
class BitVec {
 public:
  BitVec() = default;
  explicit BitVec(std::size_t n, bool value = false)
      : size_(n), words_((n + 63) / 64, value ? ~0ull : 0ull) {
    trim();
  }

  std::size_t size() const { return size_; }

  bool test(std::size_t i) const {
    assert(i < size_);
    return (words_[i >> 6] >> (i & 63)) & 1u;
  }

  void set(std::size_t i) {
    assert(i < size_);
    words_[i >> 6] |= std::uint64_t{1} << (i & 63);
  }

  void set(std::size_t i, bool value) { value ? set(i) : reset(i); }

  void reset(std::size_t i) {
    assert(i < size_);
    words_[i >> 6] &= ~(std::uint64_t{1} << (i & 63));
  }

  void reset_all() { words_.assign(words_.size(), 0); }

  std::size_t count() const {
    std::size_t c = 0;
    for (std::uint64_t w : words_) c += std::popcount(w);
    return c;
  }

  /// Sorted list of set positions.
  std::vector<std::uint32_t> ones() const {
    std::vector<std::uint32_t> out;
    out.reserve(count());
    for (std::size_t wi = 0; wi < words_.size(); ++wi) {
      std::uint64_t w = words_[wi];
      while (w != 0) {
        const int b = std::countr_zero(w);
        out.push_back(static_cast<std::uint32_t>(wi * 64 + b));
        w &= w - 1;
      }
    }
    return out;
  }

  BitVec& operator|=(const BitVec& other) {
    assert(size_ == other.size_);
    for (std::size_t i = 0; i < words_.size(); ++i) words_[i] |= other.words_[i];
    return *this;
  }

  bool operator==(const BitVec&) const = default;

  /// Number of disagreeing positions; both vectors must have equal length.
  static std::size_t hamming(const BitVec& a, const BitVec& b) {
    assert(a.size_ == b.size_);
    std::size_t d = 0;
    for (std::size_t i = 0; i < a.words_.size(); ++i)
      d += std::popcount(a.words_[i] ^ b.words_[i]);
    return d;
  }

 private:
  void trim() {
    if (size_ % 64 != 0 && !words_.empty())
      words_.back() &= (std::uint64_t{1} << (size_ % 64)) - 1;
  }

  std::size_t size_ = 0;
  std::vector<std::uint64_t> words_;
};

}  // namespace gtsim
