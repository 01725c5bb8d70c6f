#pragma once

// Closed-form latency / energy / area model of the PCM in-memory accelerator.
//
// Item memory: each atomic vector is split into chunks of the largest power of
// two strictly below the column count, one chunk per array, row-major, so one
// row read yields one chunk of one symbol. Every symbol of every n-gram costs
// one row read; the shift is free (flip-flop rewiring) and the XOR folds into
// the read cycle.
//
// Associative memory: prototype chunks of `array_rows` bits run down columns,
// complements sit in the paired array. Each column enable yields one ADC sample
// per array; the two arrays are sampled in parallel and the similarity unit adds
// the two results.
//
// The per-query unit energies are anchored to a reference workload (150 bp
// reads, N = 16, 31 prototypes, D = 40,000) and scaled linearly with work.

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace hdprof {

struct CostParams {
  std::size_t array_rows = 512;
  std::size_t array_cols = 2048;
  double read_latency_ns = 2.8;
  double write_latency_ns = 100.0;
  double adc_latency_ns = 2.0;
  double adc_energy_pj = 4.0;
  unsigned adc_resolution_bits = 9;
  double cell_area_f2 = 50.0;

  double im_area_mm2 = 0.07;
  double encoder_area_mm2 = 1.375;
  double am_area_mm2 = 0.15;
  double similarity_area_mm2 = 0.1815;

  double im_energy_nj = 1.179e-6;
  double encoder_energy_nj = 1.43e-5;
  double am_energy_nj = 2.47e-7;
  double similarity_energy_nj = 6.91e-8;

  // Whole-die figure; not derived from the unit areas above.
  double die_area_mm2 = 8.9;

  // Overrides the item-memory chunk width; must be a power of two below array_cols.
  std::optional<std::size_t> im_chunk_bits;

  std::size_t reference_read_length = 150;
  std::size_t reference_ngram_size = 16;
  std::size_t reference_prototypes = 31;
  std::size_t reference_dimension = 40'000;

  // Throws ConfigFormatError for non-positive values or a bad chunk override.
  void validate() const;
};

// Applies "key = value" overrides (field names as above) to the defaults.
[[nodiscard]] CostParams load_cost_params(const std::filesystem::path& path);
[[nodiscard]] CostParams cost_params_from_text(const std::string& text);

struct LayoutPlan {
  std::size_t chunk_bits = 0;         // item-memory chunk width
  std::size_t chunks_per_vector = 0;  // ceil(D / chunk_bits)
  std::size_t im_arrays = 0;          // one chunk per array
  std::size_t am_chunk_bits = 0;      // column height, array_rows
  std::size_t am_vertical_chunks = 0; // ceil(D / am_chunk_bits) per prototype
  std::size_t am_columns = 0;         // prototypes x vertical chunks
  std::size_t am_array_pairs = 0;     // ceil(am_columns / array_cols)
};

[[nodiscard]] LayoutPlan plan_layout(std::size_t dimension, std::size_t num_prototypes, const CostParams& params);

struct EncodeCost {
  std::uint64_t ngrams = 0;
  std::uint64_t row_reads = 0;  // ngrams x N
  double latency_ns = 0.0;
  double im_energy_nj = 0.0;
  double encoder_energy_nj = 0.0;
  double energy_nj = 0.0;
  std::string formula;
};

// ngrams = min(L - N + 1, cap); latency = ngrams * N * read_latency.
// Throws TooShortError when L < N.
[[nodiscard]] EncodeCost encode_cost(std::size_t read_length, std::size_t ngram_size,
                                     std::optional<std::uint64_t> bundling_cap, const CostParams& params);

struct ClassifyCost {
  std::uint64_t samples = 0;  // column samples per array: prototypes x ceil(D / rows)
  double latency_ns = 0.0;
  double adc_energy_nj = 0.0;
  double similarity_energy_nj = 0.0;
  double energy_nj = 0.0;
  std::string formula;
};

[[nodiscard]] ClassifyCost classify_cost(std::size_t num_prototypes, std::size_t dimension,
                                         const CostParams& params);

// One-time programming cost of the IM rows and AM columns, as a sequential bound.
struct WriteCost {
  std::uint64_t im_row_writes = 0;
  std::uint64_t am_column_writes = 0;
  double latency_ns = 0.0;
};

[[nodiscard]] WriteCost write_cost(const LayoutPlan& plan, std::size_t alphabet_size, std::size_t num_prototypes,
                                   const CostParams& params);

struct UnitShare {
  std::string unit;
  double area_mm2 = 0.0;
  double area_percent = 0.0;
  double energy_nj = 0.0;
  double energy_percent = 0.0;
};

struct AreaReport {
  std::vector<UnitShare> units;  // IM, Encoder, AM, Similarity
  double total_area_mm2 = 0.0;
  double total_energy_nj = 0.0;
  double die_area_mm2 = 0.0;
};

// Shares are recomputed from the absolute unit values.
[[nodiscard]] AreaReport area_report(const LayoutPlan& plan, const CostParams& params);

struct CostReport {
  std::size_t dimension = 0;
  std::size_t ngram_size = 0;
  std::size_t read_length = 0;
  std::size_t num_prototypes = 0;
  LayoutPlan layout;
  EncodeCost encode;
  ClassifyCost classify;
  WriteCost write;
  AreaReport area;
  // Encoding of read i+1 overlaps classification of read i.
  double pipelined_ns_per_read = 0.0;
  double mreads_per_minute = 0.0;
  double energy_per_read_nj = 0.0;
  double bases_per_joule = 0.0;
};

[[nodiscard]] CostReport cost_report(std::size_t dimension, std::size_t ngram_size,
                                     std::optional<std::uint64_t> bundling_cap, std::size_t alphabet_size,
                                     std::size_t num_prototypes, std::size_t read_length, const CostParams& params);

void write_cost_tsv(std::ostream& out, const CostReport& report);
void write_cost_summary(std::ostream& out, const CostReport& report);

}  // namespace hdprof
