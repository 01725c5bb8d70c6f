#pragma once

// Species-level relative abundance from per-read classifications.
//
// Pass 1 credits every uniquely mapped read to its taxon. Pass 2 splits each
// multi-mapped read across its matched taxa with weights proportional to
// unique_count / genome_length, renormalized over the read's matched set. A
// read whose matched taxa all have zero unique reads is split uniformly.
// Segment matches collapse to their taxon before a read is categorized.

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "hdprof/classifier.hpp"
#include "hdprof/refdb.hpp"

namespace hdprof {

struct TaxonAbundance {
  std::int64_t taxon_id = 0;
  std::string name;
  std::uint64_t genome_length = 0;
  std::uint64_t unique_count = 0;
  double assigned_total = 0.0;
  double relative_abundance = 0.0;
};

struct AbundanceProfile {
  std::vector<TaxonAbundance> taxa;  // database taxon order
  std::uint64_t total_reads = 0;
  std::uint64_t unique_count = 0;
  std::uint64_t multi_count = 0;
  std::uint64_t unmapped_count = 0;
  // Multi-mapped reads that took the uniform split.
  std::uint64_t uniform_fallback_count = 0;
};

// Distinct taxon slots hit by a classification, ascending. Throws
// InternalConsistencyError for record indices outside the table.
[[nodiscard]] std::vector<std::size_t> matched_taxa(const ReadClassification& read, const TaxonTable& table);
[[nodiscard]] ReadCategory category_for(std::size_t matched_taxon_count) noexcept;

class AbundanceEstimator {
 public:
  explicit AbundanceEstimator(const HDRefDB& db);
  explicit AbundanceEstimator(TaxonTable table);

  void add(const ReadClassification& read);
  // Adds a read already collapsed to taxon slots (ascending, distinct).
  void add_taxa(std::span<const std::size_t> slots);

  [[nodiscard]] const TaxonTable& table() const noexcept { return table_; }
  [[nodiscard]] AbundanceProfile finish() const;

 private:
  TaxonTable table_;
  std::vector<std::uint64_t> unique_;
  // Multi-mapped reads grouped by matched set; the ordered map makes pass 2
  // independent of read order.
  std::map<std::vector<std::size_t>, std::uint64_t> multi_;
  std::uint64_t total_ = 0;
  std::uint64_t multi_count_ = 0;
  std::uint64_t unmapped_ = 0;
};

[[nodiscard]] AbundanceProfile estimate(std::span<const ReadClassification> reads, const HDRefDB& db);

// TSV with header "taxon_id name unique assigned abundance".
void write_profile_tsv(std::ostream& out, const AbundanceProfile& profile);
[[nodiscard]] AbundanceProfile read_profile_tsv(std::istream& in, const std::string& source);

}  // namespace hdprof
