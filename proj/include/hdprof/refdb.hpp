#pragma once

// HD reference database: one prototype vector per reference genome (or per
// fixed-size genome slice in segmentation mode), plus its on-disk format.
//
// File layout, all integers little-endian:
//
//   "HDRF"                     4 bytes magic
//   u16 version (1), u16 flags (0)
//   u64 config fingerprint
//   u32 n, n bytes             config text (same format as a config file)
//   u64 build timestamp        seconds since the Unix epoch
//   u16 n, n bytes             tool version
//   u32 record count
//   per record: i64 taxon_id, u32 segment, u64 genome_length, u16 n, n bytes name
//   payload: record count x ceil(D / 8) bytes, bit j of a vector in byte j / 8
//            at bit position j % 8
//
// Everything before the payload is the header.

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "hdprof/encoder.hpp"
#include "hdprof/hd_space.hpp"
#include "hdprof/hd_vector.hpp"

namespace hdprof {

struct PrototypeRecord {
  std::int64_t taxon_id = 0;
  std::string name;
  std::uint32_t segment = 0;        // slice index; 0 without segmentation
  std::uint64_t genome_length = 0;  // bases covered by this prototype
  HDVector vector;

  friend bool operator==(const PrototypeRecord&, const PrototypeRecord&) = default;
};

struct BuildInfo {
  std::uint64_t timestamp = 0;
  std::string tool_version;

  friend bool operator==(const BuildInfo&, const BuildInfo&) = default;
};

struct HDRefDB {
  HDSpaceConfig config;
  std::vector<PrototypeRecord> records;
  BuildInfo build;

  [[nodiscard]] std::uint64_t fingerprint() const { return config.fingerprint(); }
  [[nodiscard]] std::size_t dimension() const noexcept { return config.dimension; }

  friend bool operator==(const HDRefDB&, const HDRefDB&) = default;
};

// Species view of the records: segments of one taxon collapse into one slot.
struct TaxonSummary {
  std::int64_t taxon_id = 0;
  std::string name;
  std::uint64_t genome_length = 0;  // sum over the taxon's records
};

struct TaxonTable {
  std::vector<TaxonSummary> taxa;        // first-appearance order
  std::vector<std::size_t> slot_of_record;
};

[[nodiscard]] TaxonTable build_taxon_table(const HDRefDB& db);

// A reference genome given as a FASTA (optionally gzip) file.
struct ReferenceInput {
  std::int64_t taxon_id = 0;
  std::string name;
  std::string fasta_path;
};

// A reference genome already in memory, one string per sequence record.
struct ReferenceGenome {
  std::int64_t taxon_id = 0;
  std::string name;
  std::vector<std::string> segments;
};

struct BuildOptions {
  // Bases per prototype slice; nullopt builds one prototype per genome.
  std::optional<std::uint64_t> segment_size;
  unsigned threads = 1;
  std::uint64_t timestamp = 0;
};

// Records keep input order regardless of thread count. Throws
// DuplicateTaxonError, or EmptyReferenceError naming the offending taxon.
[[nodiscard]] HDRefDB build_refdb(std::span<const ReferenceInput> references, const HDSpaceConfig& config,
                                  const ItemMemory& im, const BuildOptions& options = {});
[[nodiscard]] HDRefDB build_refdb(std::span<const ReferenceGenome> references, const HDSpaceConfig& config,
                                  const ItemMemory& im, const BuildOptions& options = {});

// Reads "taxon_id<TAB>name<TAB>fasta_path" lines; '#' lines and blank lines are skipped.
// Relative paths resolve against the manifest's directory.
[[nodiscard]] std::vector<ReferenceInput> read_reference_manifest(const std::filesystem::path& path);

struct Footprint {
  std::size_t header_bytes = 0;
  std::size_t payload_bytes = 0;  // records x ceil(D / 8)
  [[nodiscard]] std::size_t total_bytes() const noexcept { return header_bytes + payload_bytes; }
};

[[nodiscard]] Footprint footprint(const HDRefDB& db);

inline constexpr std::uint16_t kRefDbFormatVersion = 1;

[[nodiscard]] std::vector<std::uint8_t> serialize_refdb(const HDRefDB& db);
// Throws DbFormatError on bad magic, version, fingerprint or layout; throws
// ConfigMismatchError if `expected` is given and its fingerprint differs.
[[nodiscard]] HDRefDB deserialize_refdb(std::span<const std::uint8_t> bytes,
                                        const HDSpaceConfig* expected = nullptr);

void save_refdb(const HDRefDB& db, const std::filesystem::path& path);
[[nodiscard]] HDRefDB load_refdb(const std::filesystem::path& path, const HDSpaceConfig* expected = nullptr);

// Bit-packing used by both database and query files.
void pack_vector(const HDVector& v, std::span<std::uint8_t> out);
[[nodiscard]] HDVector unpack_vector(std::size_t dimension, std::span<const std::uint8_t> bytes);

// Optional store of query vectors produced while profiling.
//
//   "HDRQ", u16 version (1), u16 flags (0), u64 config fingerprint, u64 dimension,
//   then until end of file: u32 n, n bytes read id, ceil(D / 8) bytes vector.
struct StoredQuery {
  std::string id;
  HDVector vector;
};

class QueryStoreWriter {
 public:
  QueryStoreWriter(const std::filesystem::path& path, std::uint64_t fingerprint, std::size_t dimension);
  void append(const std::string& id, const HDVector& vector);
  [[nodiscard]] std::uint64_t count() const noexcept { return count_; }
  void close();

 private:
  std::ofstream out_;
  std::filesystem::path path_;
  std::size_t dimension_;
  std::uint64_t count_ = 0;
  std::vector<std::uint8_t> buffer_;
};

struct QueryStore {
  std::uint64_t fingerprint = 0;
  std::size_t dimension = 0;
  std::vector<StoredQuery> queries;
};

[[nodiscard]] QueryStore load_query_store(const std::filesystem::path& path);

}  // namespace hdprof
