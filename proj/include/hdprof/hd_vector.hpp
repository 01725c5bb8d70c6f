#pragma once

// Packed binary hypervectors and the bundling accumulator.
//
// Bit j of a vector lives in word j / 64 at bit position j % 64. Bits past
// `dimension` in the last word are always zero; every mutating operation
// re-applies the tail mask.

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace hdprof {

class HDVector {
 public:
  using word_type = std::uint64_t;
  static constexpr std::size_t kWordBits = 64;

  // Empty (dimension 0) vector; only useful as a placeholder before assignment.
  HDVector() = default;
  // All-zero vector. Throws DimensionError for dimension 0.
  explicit HDVector(std::size_t dimension);

  // Parses a string of '0'/'1' characters; character i becomes bit i.
  static HDVector from_bits(std::string_view bits);
  // Takes ownership of packed words; stray tail bits are cleared.
  static HDVector from_words(std::size_t dimension, std::vector<word_type> words);

  [[nodiscard]] std::size_t dimension() const noexcept { return dimension_; }
  [[nodiscard]] std::size_t word_count() const noexcept { return words_.size(); }
  [[nodiscard]] std::span<const word_type> words() const noexcept { return words_; }
  // Writable view for word-level kernels. Callers must not set tail bits, or
  // must call mask_tail() afterwards.
  [[nodiscard]] std::span<word_type> mutable_words() noexcept { return words_; }
  void mask_tail() noexcept;

  [[nodiscard]] bool get(std::size_t bit) const noexcept {
    return (words_[bit / kWordBits] >> (bit % kWordBits)) & 1U;
  }
  void set(std::size_t bit, bool value) noexcept {
    const word_type mask = word_type{1} << (bit % kWordBits);
    if (value) {
      words_[bit / kWordBits] |= mask;
    } else {
      words_[bit / kWordBits] &= ~mask;
    }
  }

  [[nodiscard]] std::size_t popcount() const noexcept;
  [[nodiscard]] HDVector complement() const;
  [[nodiscard]] std::string to_string() const;

  // In-place XOR with another vector of the same dimension.
  HDVector& operator^=(const HDVector& other);

  friend bool operator==(const HDVector&, const HDVector&) = default;

 private:
  std::size_t dimension_ = 0;
  std::vector<word_type> words_;
};

// Element-wise XOR. Throws DimensionError on mismatch.
[[nodiscard]] HDVector xor_bind(const HDVector& a, const HDVector& b);

// Circular shift by k positions toward higher bit index: result[(j + k) % D] = a[j].
[[nodiscard]] HDVector rotate(const HDVector& a, std::size_t k);

// Number of differing bit positions. Throws DimensionError on mismatch.
[[nodiscard]] std::size_t hamming(const HDVector& a, const HDVector& b);

// Per-position counters for bundling.
//
// Counters are stored bit-sliced: plane b holds bit b of every counter, so
// adding a vector is a word-parallel ripple-carry add. Planes are appended as
// `added` grows, which keeps the counters exact for any number of bundled
// vectors.
class BundleAccumulator {
 public:
  BundleAccumulator() = default;
  explicit BundleAccumulator(std::size_t dimension);

  [[nodiscard]] std::size_t dimension() const noexcept { return dimension_; }
  [[nodiscard]] std::uint64_t added() const noexcept { return added_; }

  // counts[j] += v[j]; added += 1. Throws DimensionError on mismatch.
  void add(const HDVector& v);
  // Adds a raw packed vector of word_count() words with a clean tail.
  void add_words(std::span<const HDVector::word_type> words);

  // Const accessors fold pending adds into the counters first, so they are not
  // safe to call concurrently on one accumulator.
  [[nodiscard]] std::uint64_t count(std::size_t bit) const;
  [[nodiscard]] std::vector<std::uint64_t> counts() const;

  // result[j] = 1 iff counts[j] > added / 2. Ties on even `added` give 0.
  // Throws EmptyBundleError when nothing was added.
  [[nodiscard]] HDVector majority() const;

  void clear() noexcept;

 private:
  [[nodiscard]] std::size_t word_count() const noexcept {
    return (dimension_ + HDVector::kWordBits - 1) / HDVector::kWordBits;
  }

  void fold() const;

  static constexpr std::size_t kLowPlanes = 4;
  static constexpr std::uint64_t kLowCapacity = (1U << kLowPlanes) - 1;

  std::size_t dimension_ = 0;
  std::uint64_t added_ = 0;
  // Bit-sliced counters: planes_[b][i] holds bit b of the counts of word i.
  mutable std::vector<std::vector<HDVector::word_type>> planes_;
  // Small branchless counter (kLowPlanes planes back to back) absorbing up to
  // kLowCapacity adds before being folded into planes_.
  mutable std::vector<HDVector::word_type> low_;
  mutable std::uint64_t pending_ = 0;
};

}  // namespace hdprof
