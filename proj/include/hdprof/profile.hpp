#pragma once

// Streaming sample profiling: reads are pulled in batches by one reader
// thread, encoded and classified by a worker pool, and merged back in input
// order by the calling thread, so outputs do not depend on the thread count.
// At most a bounded number of batches is in flight at any time.

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>

#include "hdprof/abundance.hpp"
#include "hdprof/hd_space.hpp"
#include "hdprof/io_ingest.hpp"
#include "hdprof/refdb.hpp"

namespace hdprof {

struct ProfileOptions {
  std::optional<double> threshold;  // overrides the database config's threshold
  unsigned threads = 1;
  std::size_t batch_size = 512;
  // Per-read TSV: read_id, category, matched taxon ids, best taxon, best score.
  std::ostream* per_read = nullptr;
  std::optional<std::filesystem::path> query_store;
};

struct ProfileTimings {
  double wall_seconds = 0.0;
  // Summed over workers.
  double encode_seconds = 0.0;
  double classify_seconds = 0.0;
  double estimate_seconds = 0.0;
};

struct ProfileResult {
  AbundanceProfile profile;
  double threshold = 0.0;
  std::uint64_t reads = 0;
  std::uint64_t bases = 0;
  std::uint64_t unencodable = 0;  // reads with no valid window
  std::uint64_t stored_queries = 0;
  ProfileTimings timings;
};

void write_per_read_header(std::ostream& out);

[[nodiscard]] ProfileResult run_profile(const HDRefDB& db, const ItemMemory& im, RecordStream& reads,
                                        const ProfileOptions& options);

}  // namespace hdprof
