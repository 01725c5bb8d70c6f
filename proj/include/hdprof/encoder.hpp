#pragma once

// N-gram encoding shared by reference building and read conversion.
//
// A window of N symbols c_1..c_N maps to
//     B(c_1) ^ rotate(B(c_2), 1) ^ ... ^ rotate(B(c_N), N - 1)
// and a sequence maps to the majority of all its window vectors. Windows that
// contain a symbol outside the alphabet are skipped.

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "hdprof/hd_space.hpp"
#include "hdprof/hd_vector.hpp"

namespace hdprof {

class Encoder {
 public:
  Encoder(const HDSpaceConfig& config, const ItemMemory& im);

  [[nodiscard]] const HDSpaceConfig& config() const noexcept { return config_; }
  [[nodiscard]] std::size_t dimension() const noexcept { return config_.dimension; }
  [[nodiscard]] std::size_t ngram_size() const noexcept { return config_.ngram_size; }
  [[nodiscard]] std::size_t word_count() const noexcept { return words_; }

  // Alphabet index of a symbol (case-insensitive), -1 if outside the alphabet.
  [[nodiscard]] int code(char symbol) const noexcept {
    return lookup_[static_cast<unsigned char>(symbol)];
  }

  // Throws WindowError if window.size() != N, AmbiguousSymbol for unknown symbols.
  [[nodiscard]] HDVector encode_ngram(std::string_view window) const;

  // Bundles every valid window (up to the bundling cap) and binarizes.
  // Throws TooShortError when no valid window exists.
  [[nodiscard]] HDVector encode_sequence(std::string_view bases) const;

  // XOR of the pre-rotated atomic vectors for N symbol codes, written to `out`.
  // `codes` is read circularly starting at `start` (ring-buffer layout).
  void ngram_words(std::span<const std::uint8_t> codes, std::size_t start,
                   std::span<HDVector::word_type> out) const;
  // Same for the reverse complement of the window held in `codes`.
  void ngram_words_revcomp(std::span<const std::uint8_t> codes, std::size_t start,
                           std::span<HDVector::word_type> out) const;

  // Advances a forward n-gram vector by one position: drops `oldest` from the
  // front and appends `newest`, i.e. rotate(cur ^ B(oldest), -1) ^ rotate(B(newest), N - 1).
  void slide(std::span<HDVector::word_type> cur, std::uint8_t oldest, std::uint8_t newest) const;
  // Same for the reverse-complement vector of the window:
  // rotate(cur ^ rotate(B(comp oldest), N - 1), 1) ^ B(comp newest).
  void slide_revcomp(std::span<HDVector::word_type> cur, std::uint8_t oldest, std::uint8_t newest) const;

 private:
  [[nodiscard]] const HDVector::word_type* rotated(std::size_t code, std::size_t shift) const noexcept {
    return rotated_.data() + (code * config_.ngram_size + shift) * words_;
  }

  HDSpaceConfig config_;
  std::size_t words_;
  std::array<int, 256> lookup_{};
  std::array<std::uint8_t, 4> complement_{};
  // rotate(B(symbol), shift) for every symbol and shift < N, packed back to back.
  std::vector<HDVector::word_type> rotated_;
};

// Streams bases through the window enumerator into one accumulator.
//
// Consecutive feed() calls continue the same segment, so splitting a segment
// into arbitrary chunks gives the same result as feeding it at once.
// end_segment() starts a new segment: no window spans the boundary.
class WindowBundler {
 public:
  explicit WindowBundler(const Encoder& encoder);

  void feed(std::string_view bases);
  void end_segment() noexcept { run_ = 0; }
  // Clears the accumulator and segment state; keeps allocations.
  void reset() noexcept;

  // Window positions bundled so far (reverse-complement windows not counted twice).
  [[nodiscard]] std::uint64_t windows() const noexcept { return windows_; }
  [[nodiscard]] bool capped() const noexcept;
  [[nodiscard]] const BundleAccumulator& accumulator() const noexcept { return acc_; }
  // Majority vector. Throws TooShortError if no window was bundled.
  [[nodiscard]] HDVector finish() const;

 private:
  const Encoder* encoder_;
  BundleAccumulator acc_;
  std::vector<std::uint8_t> ring_;
  std::size_t head_ = 0;  // next ring slot to write
  std::size_t run_ = 0;   // consecutive valid symbols in the current segment
  std::uint64_t windows_ = 0;
  std::vector<HDVector::word_type> forward_;
  std::vector<HDVector::word_type> reverse_;
};

struct EncodedReference {
  HDVector vector;
  std::uint64_t genome_length = 0;  // total bases over all segments
  std::uint64_t windows = 0;
};

// One accumulator across all segments of a genome. Throws EmptyReferenceError
// when the genome yields no valid window.
[[nodiscard]] EncodedReference encode_reference(const Encoder& encoder,
                                                std::span<const std::string> segments);

}  // namespace hdprof
