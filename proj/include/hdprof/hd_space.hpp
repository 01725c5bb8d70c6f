#pragma once

// HD space definition: hyperparameters, the item memory of atomic vectors,
// and the on-disk configuration file.

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "hdprof/hd_vector.hpp"

namespace hdprof {

enum class Encoding { ngram };
enum class SimilarityMetric { hamming };

struct HDSpaceConfig {
  std::size_t dimension = 40'000;
  std::size_t ngram_size = 16;
  double density = 0.5;
  // Normalized similarity (fraction of matching bits) a prototype must reach.
  double similarity_threshold = 0.515;
  // Maximum number of window positions bundled into one vector; nullopt = unbounded.
  std::optional<std::uint64_t> bundling_cap;
  std::uint64_t seed = 0;
  std::string alphabet = "ACGT";
  Encoding encoding = Encoding::ngram;
  SimilarityMetric similarity_metric = SimilarityMetric::hamming;
  // Also bundle the reverse-complement of every window. Requires alphabet ACGT.
  bool reverse_complement = false;

  // Throws ConfigFormatError if any invariant is violated.
  void validate() const;

  // 64-bit FNV-1a over the canonical text form of every field.
  [[nodiscard]] std::uint64_t fingerprint() const;

  friend bool operator==(const HDSpaceConfig&, const HDSpaceConfig&) = default;
};

inline constexpr int kConfigFormatVersion = 1;

// T = 0.5 + z * sqrt(0.25 / D), clamped below 1.
[[nodiscard]] double calibrate_threshold(const HDSpaceConfig& config, double z);

// D = 40,000, N = 16, density 0.5, seed 0, T calibrated with z = 6.
[[nodiscard]] HDSpaceConfig default_config();

[[nodiscard]] std::string config_to_text(const HDSpaceConfig& config);
[[nodiscard]] HDSpaceConfig config_from_text(std::string_view text);
void save_config(const HDSpaceConfig& config, const std::filesystem::path& path);
[[nodiscard]] HDSpaceConfig load_config(const std::filesystem::path& path);

[[nodiscard]] std::string fingerprint_hex(std::uint64_t fingerprint);

// Counter-based generator: SplitMix64's finalizer applied to (key + counter * golden).
// Stateless, so any draw can be reproduced from (key, counter) alone.
[[nodiscard]] std::uint64_t mix64(std::uint64_t x) noexcept;
[[nodiscard]] std::uint64_t counter_draw(std::uint64_t key, std::uint64_t counter) noexcept;

// One atomic vector per alphabet symbol. Read-only once generated.
class ItemMemory {
 public:
  ItemMemory(std::string alphabet, std::vector<HDVector> atomic, std::uint64_t seed);

  [[nodiscard]] std::size_t size() const noexcept { return atomic_.size(); }
  [[nodiscard]] std::size_t dimension() const noexcept { return atomic_.front().dimension(); }
  [[nodiscard]] const std::string& alphabet() const noexcept { return alphabet_; }
  [[nodiscard]] std::uint64_t seed() const noexcept { return seed_; }

  // Index into the alphabet, case-insensitive; -1 for symbols outside it.
  [[nodiscard]] int symbol_index(char symbol) const noexcept {
    return lookup_[static_cast<unsigned char>(symbol)];
  }
  [[nodiscard]] const HDVector& vector(std::size_t index) const { return atomic_.at(index); }
  // Throws AmbiguousSymbol for symbols outside the alphabet.
  [[nodiscard]] const HDVector& operator[](char symbol) const;

 private:
  std::string alphabet_;
  std::vector<HDVector> atomic_;
  std::uint64_t seed_;
  std::array<int, 256> lookup_{};
};

// Bit j of symbol s is 1 iff the draw (key_s, j) mapped to [0, 1) is below density,
// with key_s = mix64(seed ^ mix64(s + 1)).
[[nodiscard]] ItemMemory generate_item_memory(const HDSpaceConfig& config);

}  // namespace hdprof
