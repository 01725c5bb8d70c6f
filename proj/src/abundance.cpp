#include "hdprof/abundance.hpp"

#include <algorithm>
#include <cinttypes>
#include <cstdio>
#include <istream>
#include <ostream>
#include <sstream>

#include "hdprof/errors.hpp"

namespace hdprof {

std::vector<std::size_t> matched_taxa(const ReadClassification& read, const TaxonTable& table) {
  std::vector<std::size_t> slots;
  slots.reserve(read.matched.size());
  for (const auto idx : read.matched) {
    if (idx >= table.slot_of_record.size()) {
      throw InternalConsistencyError("read '" + read.read_id + "' matches record " + std::to_string(idx) +
                                     " but the database has " + std::to_string(table.slot_of_record.size()));
    }
    slots.push_back(table.slot_of_record[idx]);
  }
  std::sort(slots.begin(), slots.end());
  slots.erase(std::unique(slots.begin(), slots.end()), slots.end());
  return slots;
}

ReadCategory category_for(std::size_t matched_taxon_count) noexcept {
  if (matched_taxon_count == 0) return ReadCategory::unmapped;
  return matched_taxon_count == 1 ? ReadCategory::unique : ReadCategory::multi;
}

AbundanceEstimator::AbundanceEstimator(const HDRefDB& db) : AbundanceEstimator(build_taxon_table(db)) {}

AbundanceEstimator::AbundanceEstimator(TaxonTable table)
    : table_(std::move(table)), unique_(table_.taxa.size(), 0) {}

void AbundanceEstimator::add(const ReadClassification& read) {
  const auto slots = matched_taxa(read, table_);
  add_taxa(slots);
}

void AbundanceEstimator::add_taxa(std::span<const std::size_t> slots) {
  for (const auto s : slots) {
    if (s >= unique_.size()) throw InternalConsistencyError("taxon slot out of range");
  }
  ++total_;
  switch (category_for(slots.size())) {
    case ReadCategory::unmapped:
      ++unmapped_;
      break;
    case ReadCategory::unique:
      ++unique_[slots.front()];
      break;
    case ReadCategory::multi:
      ++multi_count_;
      ++multi_[std::vector<std::size_t>(slots.begin(), slots.end())];
      break;
  }
}

AbundanceProfile AbundanceEstimator::finish() const {
  AbundanceProfile p;
  p.total_reads = total_;
  p.multi_count = multi_count_;
  p.unmapped_count = unmapped_;
  p.taxa.resize(table_.taxa.size());
  for (std::size_t i = 0; i < table_.taxa.size(); ++i) {
    auto& t = p.taxa[i];
    t.taxon_id = table_.taxa[i].taxon_id;
    t.name = table_.taxa[i].name;
    t.genome_length = table_.taxa[i].genome_length;
    t.unique_count = unique_[i];
    t.assigned_total = static_cast<double>(unique_[i]);
    p.unique_count += unique_[i];
  }

  std::vector<double> rate(table_.taxa.size());
  for (std::size_t i = 0; i < rate.size(); ++i) {
    rate[i] = static_cast<double>(unique_[i]) / static_cast<double>(table_.taxa[i].genome_length);
  }
  for (const auto& [slots, reads] : multi_) {
    double denom = 0.0;
    for (const auto s : slots) denom += rate[s];
    const auto n = static_cast<double>(reads);
    if (denom > 0.0) {
      for (const auto s : slots) p.taxa[s].assigned_total += n * (rate[s] / denom);
    } else {
      p.uniform_fallback_count += reads;
      for (const auto s : slots) p.taxa[s].assigned_total += n / static_cast<double>(slots.size());
    }
  }

  double mass = 0.0;
  for (const auto& t : p.taxa) mass += t.assigned_total;
  if (mass > 0.0) {
    for (auto& t : p.taxa) t.relative_abundance = t.assigned_total / mass;
  }
  return p;
}

AbundanceProfile estimate(std::span<const ReadClassification> reads, const HDRefDB& db) {
  AbundanceEstimator est(db);
  for (const auto& r : reads) est.add(r);
  return est.finish();
}

void write_profile_tsv(std::ostream& out, const AbundanceProfile& profile) {
  out << "taxon_id\tname\tunique\tassigned\tabundance\n";
  char buf[128];
  for (const auto& t : profile.taxa) {
    std::snprintf(buf, sizeof buf, "\t%" PRIu64 "\t%.6f\t%.9f\n", t.unique_count, t.assigned_total,
                  t.relative_abundance);
    out << t.taxon_id << '\t' << t.name << buf;
  }
}

AbundanceProfile read_profile_tsv(std::istream& in, const std::string& source) {
  AbundanceProfile p;
  std::string line;
  std::size_t line_no = 0;
  bool header = false;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line.front() == '#') continue;
    if (!header) {
      if (line.rfind("taxon_id\t", 0) != 0) throw ParseError(source + ": missing profile header", line_no);
      header = true;
      continue;
    }
    std::vector<std::string> cols;
    std::stringstream ss(line);
    std::string col;
    while (std::getline(ss, col, '\t')) cols.push_back(col);
    if (cols.size() != 5) throw ParseError(source + ": expected 5 columns", line_no);
    TaxonAbundance t;
    try {
      t.taxon_id = std::stoll(cols[0]);
      t.name = cols[1];
      t.unique_count = std::stoull(cols[2]);
      t.assigned_total = std::stod(cols[3]);
      t.relative_abundance = std::stod(cols[4]);
    } catch (const std::exception&) {
      throw ParseError(source + ": malformed profile row", line_no);
    }
    p.unique_count += t.unique_count;
    p.taxa.push_back(std::move(t));
  }
  if (!header) throw ParseError(source + ": empty profile", line_no);
  return p;
}

}  // namespace hdprof
