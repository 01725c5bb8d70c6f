#include "hdprof/classifier.hpp"

#include "hdprof/errors.hpp"

namespace hdprof {

const char* category_name(ReadCategory category) noexcept {
  switch (category) {
    case ReadCategory::unique:
      return "unique";
    case ReadCategory::multi:
      return "multi";
    case ReadCategory::unmapped:
      return "unmapped";
  }
  return "unmapped";
}

double similarity(const HDVector& q, const HDVector& p) {
  const std::size_t d = q.dimension();
  const std::size_t distance = hamming(q, p);
  return static_cast<double>(d - distance) / static_cast<double>(d);
}

ReadClassification classify(const HDVector& query, const HDRefDB& db, double threshold) {
  if (query.dimension() != db.dimension()) {
    throw ConfigMismatchError("query dimension " + std::to_string(query.dimension()) +
                              " does not match database dimension " + std::to_string(db.dimension()));
  }
  ReadClassification out;
  out.scores.reserve(db.records.size());
  double best_score = -1.0;
  for (std::size_t i = 0; i < db.records.size(); ++i) {
    const double s = similarity(query, db.records[i].vector);
    out.scores.push_back(s);
    if (s >= threshold) out.matched.push_back(i);
    if (s > best_score) {
      best_score = s;
      out.best = i;
    }
  }
  switch (out.matched.size()) {
    case 0:
      out.category = ReadCategory::unmapped;
      break;
    case 1:
      out.category = ReadCategory::unique;
      break;
    default:
      out.category = ReadCategory::multi;
  }
  return out;
}

ReadClassification unencodable(std::string read_id) {
  ReadClassification out;
  out.read_id = std::move(read_id);
  return out;
}

}  // namespace hdprof
