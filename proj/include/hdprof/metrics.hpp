#pragma once

// Presence/absence accuracy of an abundance profile against a ground truth,
// and throughput accounting.

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "hdprof/abundance.hpp"

namespace hdprof {

struct TruthEntry {
  std::string taxon;  // database name or numeric taxon id
  std::optional<double> fraction;  // absent for presence-only truth
};

struct TruthProfile {
  std::vector<TruthEntry> entries;
};

// "taxon<TAB>fraction" or "taxon" per line; '#' lines skipped.
[[nodiscard]] TruthProfile read_truth_tsv(std::istream& in, const std::string& source);

struct TaxonEval {
  std::int64_t taxon_id = 0;
  std::string name;
  double estimated = 0.0;
  std::optional<double> expected;
  bool called = false;
  bool present = false;
};

struct EvalReport {
  std::uint64_t tp = 0, fp = 0, fn = 0, tn = 0;
  double precision = 0.0;
  double recall = 0.0;
  // Sum of |estimated - expected|; only defined when every truth entry has a fraction.
  std::optional<double> l1_error;
  std::vector<TaxonEval> taxa;
};

inline constexpr double kDefaultPresenceEpsilon = 0.001;

// A taxon is called present iff its relative abundance exceeds presence_epsilon.
// Throws TaxonMappingError for truth taxa not in the profile.
[[nodiscard]] EvalReport evaluate(const AbundanceProfile& profile, const TruthProfile& truth,
                                  double presence_epsilon = kDefaultPresenceEpsilon);

void write_eval_tsv(std::ostream& out, const EvalReport& report);

struct ThroughputReport {
  std::uint64_t reads = 0;
  double wall_seconds = 0.0;
  double mreads_per_minute = 0.0;
  double reads_per_second = 0.0;
  std::optional<double> bases_per_joule;  // set only with a cost model attached
};

[[nodiscard]] ThroughputReport throughput_report(std::uint64_t read_count, double wall_seconds);
[[nodiscard]] ThroughputReport throughput_report(std::uint64_t read_count, double wall_seconds,
                                                 std::uint64_t bases, double energy_joules);

}  // namespace hdprof
