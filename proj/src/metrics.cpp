#include "hdprof/metrics.hpp"

#include <cmath>
#include <cstdio>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include "hdprof/errors.hpp"

namespace hdprof {

TruthProfile read_truth_tsv(std::istream& in, const std::string& source) {
  TruthProfile truth;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line.front() == '#') continue;
    const auto tab = line.find('\t');
    TruthEntry e;
    e.taxon = line.substr(0, tab);
    if (e.taxon.empty()) throw ParseError(source + ": empty taxon", line_no);
    if (tab != std::string::npos) {
      const std::string value = line.substr(tab + 1);
      try {
        std::size_t used = 0;
        e.fraction = std::stod(value, &used);
        if (used != value.size()) throw std::invalid_argument("trailing");
      } catch (const std::exception&) {
        throw ParseError(source + ": fraction '" + value + "' is not a number", line_no);
      }
      if (*e.fraction < 0.0 || *e.fraction > 1.0) throw ParseError(source + ": fraction outside [0, 1]", line_no);
    }
    truth.entries.push_back(std::move(e));
  }
  return truth;
}

EvalReport evaluate(const AbundanceProfile& profile, const TruthProfile& truth, double presence_epsilon) {
  if (presence_epsilon < 0.0) throw std::invalid_argument("presence_epsilon must be non-negative");
  EvalReport report;
  std::map<std::string, std::size_t> by_name;
  std::map<std::int64_t, std::size_t> by_id;
  for (std::size_t i = 0; i < profile.taxa.size(); ++i) {
    const auto& t = profile.taxa[i];
    by_name.emplace(t.name, i);
    by_id.emplace(t.taxon_id, i);
    report.taxa.push_back({t.taxon_id, t.name, t.relative_abundance, std::nullopt,
                           t.relative_abundance > presence_epsilon, false});
  }

  bool all_fractions = true;
  std::vector<bool> seen(profile.taxa.size(), false);
  for (const auto& e : truth.entries) {
    std::size_t slot = 0;
    if (auto it = by_name.find(e.taxon); it != by_name.end()) {
      slot = it->second;
    } else {
      std::int64_t id = 0;
      bool numeric = false;
      try {
        std::size_t used = 0;
        id = std::stoll(e.taxon, &used);
        numeric = used == e.taxon.size();
      } catch (const std::exception&) {
      }
      const auto id_it = numeric ? by_id.find(id) : by_id.end();
      if (id_it == by_id.end()) throw TaxonMappingError("truth taxon '" + e.taxon + "' is not in the profile");
      slot = id_it->second;
    }
    if (seen[slot]) throw TaxonMappingError("truth taxon '" + e.taxon + "' listed twice");
    seen[slot] = true;
    auto& te = report.taxa[slot];
    te.expected = e.fraction;
    te.present = !e.fraction || *e.fraction > 0.0;
    all_fractions = all_fractions && e.fraction.has_value();
  }

  double l1 = 0.0;
  for (auto& te : report.taxa) {
    if (te.called && te.present) ++report.tp;
    if (te.called && !te.present) ++report.fp;
    if (!te.called && te.present) ++report.fn;
    if (!te.called && !te.present) ++report.tn;
    l1 += std::abs(te.estimated - te.expected.value_or(0.0));
  }
  if (all_fractions) report.l1_error = l1;
  report.precision = report.tp + report.fp == 0
                         ? 0.0
                         : static_cast<double>(report.tp) / static_cast<double>(report.tp + report.fp);
  report.recall = report.tp + report.fn == 0
                      ? 0.0
                      : static_cast<double>(report.tp) / static_cast<double>(report.tp + report.fn);
  return report;
}

void write_eval_tsv(std::ostream& out, const EvalReport& r) {
  char buf[64];
  out << "metric\tvalue\n";
  out << "TP\t" << r.tp << "\nFP\t" << r.fp << "\nFN\t" << r.fn << "\nTN\t" << r.tn << '\n';
  std::snprintf(buf, sizeof buf, "%.6f", r.precision);
  out << "precision\t" << buf << '\n';
  std::snprintf(buf, sizeof buf, "%.6f", r.recall);
  out << "recall\t" << buf << '\n';
  if (r.l1_error) {
    std::snprintf(buf, sizeof buf, "%.6f", *r.l1_error);
    out << "l1_error\t" << buf << '\n';
  } else {
    out << "l1_error\tNA\n";
  }
}

ThroughputReport throughput_report(std::uint64_t read_count, double wall_seconds) {
  ThroughputReport r;
  r.reads = read_count;
  r.wall_seconds = wall_seconds;
  if (read_count == 0) return r;
  if (!(wall_seconds > 0.0)) throw std::invalid_argument("wall time must be positive");
  r.reads_per_second = static_cast<double>(read_count) / wall_seconds;
  r.mreads_per_minute = (static_cast<double>(read_count) / 1e6) / (wall_seconds / 60.0);
  return r;
}

ThroughputReport throughput_report(std::uint64_t read_count, double wall_seconds, std::uint64_t bases,
                                   double energy_joules) {
  ThroughputReport r = throughput_report(read_count, wall_seconds);
  if (energy_joules > 0.0) r.bases_per_joule = static_cast<double>(bases) / energy_joules;
  return r;
}

}  // namespace hdprof
