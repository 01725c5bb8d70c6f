#pragma once

// Similarity check of a query vector against every prototype in a database.
// A prototype matches when its normalized similarity (fraction of equal bits)
// is at least the threshold, so a read may match one, several, or none.

#include <cstddef>
#include <string>
#include <vector>

#include "hdprof/hd_vector.hpp"
#include "hdprof/refdb.hpp"

namespace hdprof {

enum class ReadCategory { unique, multi, unmapped };

[[nodiscard]] const char* category_name(ReadCategory category) noexcept;

struct ReadClassification {
  std::string read_id;
  // One score per database record; empty when the read had no valid window.
  std::vector<double> scores;
  std::vector<std::size_t> matched;  // record indices, ascending
  ReadCategory category = ReadCategory::unmapped;
  // Index of the highest score, lowest index on ties; npos without scores.
  std::size_t best = npos;

  static constexpr std::size_t npos = static_cast<std::size_t>(-1);
};

// (D - hamming(q, p)) / D. Throws DimensionError on mismatch.
[[nodiscard]] double similarity(const HDVector& q, const HDVector& p);

// Throws ConfigMismatchError if the query dimension differs from the database's.
[[nodiscard]] ReadClassification classify(const HDVector& query, const HDRefDB& db, double threshold);

// Result for a read that could not be encoded: no scores, category unmapped.
[[nodiscard]] ReadClassification unencodable(std::string read_id);

}  // namespace hdprof
