#include <doctest.h>

#include <random>

#include "hdprof/classifier.hpp"
#include "hdprof/errors.hpp"
#include "oracle.hpp"

using namespace hdprof;

namespace {

HDRefDB db_of(const std::vector<HDVector>& protos) {
  HDRefDB db;
  db.config.dimension = protos.front().dimension();
  db.config.ngram_size = 1;
  for (std::size_t i = 0; i < protos.size(); ++i) {
    db.records.push_back({static_cast<std::int64_t>(i + 1), "p" + std::to_string(i), 0, 1000, protos[i]});
  }
  return db;
}

}  // namespace

TEST_SUITE("classifier") {
  TEST_CASE("similarity examples") {
    const HDVector q = HDVector::from_bits("10110010");
    CHECK(similarity(q, q) == 1.0);
    CHECK(similarity(q, q.complement()) == 0.0);
    CHECK(similarity(q, HDVector::from_bits("01110001")) == 0.5);
    CHECK_THROWS_AS((void)similarity(q, HDVector(9)), DimensionError);
  }

  TEST_CASE("unique, unmapped and multi at D=40000") {
    std::mt19937_64 rng(12);
    std::vector<HDVector> protos;
    for (int i = 0; i < 6; ++i) protos.push_back(oracle::vector_of(oracle::random_bits(rng, 40000)));
    const HDRefDB db = db_of(protos);

    const ReadClassification hit = classify(protos[3], db, 0.6);
    CHECK(hit.matched == std::vector<std::size_t>{3});
    CHECK(hit.category == ReadCategory::unique);
    CHECK(hit.best == 3);

    const ReadClassification miss = classify(oracle::vector_of(oracle::random_bits(rng, 40000)), db, 0.6);
    CHECK(miss.matched.empty());
    CHECK(miss.category == ReadCategory::unmapped);
    CHECK(miss.scores.size() == 6);

    auto dup = protos;
    dup[2] = dup[1];
    const ReadClassification multi = classify(dup[1], db_of(dup), 0.6);
    CHECK(multi.matched == std::vector<std::size_t>{1, 2});
    CHECK(multi.category == ReadCategory::multi);
    CHECK(multi.best == 1);  // ties take the lowest index

    CHECK_THROWS_AS((void)classify(HDVector(64), db, 0.6), ConfigMismatchError);
    const ReadClassification none = unencodable("r");
    CHECK(none.read_id == "r");
    CHECK(none.category == ReadCategory::unmapped);
    CHECK(none.best == ReadClassification::npos);
    CHECK(std::string(category_name(ReadCategory::multi)) == "multi");
  }

  TEST_CASE("classify matches brute force and threshold monotonicity") {
    std::mt19937_64 rng(13);
    for (int rep = 0; rep < 100; ++rep) {
      const std::size_t d = 1 + rng() % 64;
      const std::size_t p = 1 + rng() % 8;
      std::vector<oracle::Bits> pb;
      std::vector<HDVector> protos;
      for (std::size_t i = 0; i < p; ++i) {
        pb.push_back(oracle::random_bits(rng, d));
        protos.push_back(oracle::vector_of(pb.back()));
      }
      const auto qb = oracle::random_bits(rng, d);
      const double t = std::uniform_real_distribution<double>(0.3, 0.8)(rng);
      const HDRefDB db = db_of(protos);
      const auto got = classify(oracle::vector_of(qb), db, t);
      const auto want = oracle::classify(qb, pb, t);
      REQUIRE(got.scores == want.scores);
      REQUIRE(got.matched == want.matched);
      REQUIRE(got.best == want.best);
      for (std::size_t i = 0; i < p; ++i) {
        const bool m = std::find(got.matched.begin(), got.matched.end(), i) != got.matched.end();
        CHECK(m == (got.scores[i] >= t));
      }
      const auto higher = classify(oracle::vector_of(qb), db, t + 0.1);
      CHECK(higher.matched.size() <= got.matched.size());
      for (auto i : higher.matched) {
        CHECK(std::find(got.matched.begin(), got.matched.end(), i) != got.matched.end());
      }
    }
  }
}
