#include <doctest.h>

#include <sstream>

#include "hdprof/errors.hpp"
#include "hdprof/metrics.hpp"

using namespace hdprof;

namespace {

AbundanceProfile profile_of(const std::vector<std::pair<std::string, double>>& entries) {
  AbundanceProfile p;
  std::int64_t id = 1;
  for (const auto& [name, frac] : entries) {
    TaxonAbundance t;
    t.taxon_id = id++;
    t.name = name;
    t.relative_abundance = frac;
    p.taxa.push_back(t);
  }
  return p;
}

TruthProfile truth_of(const std::string& text) {
  std::istringstream in(text);
  return read_truth_tsv(in, "truth");
}

}  // namespace

TEST_SUITE("metrics") {
  TEST_CASE("perfect profile") {
    const auto p = profile_of({{"A", 0.7}, {"B", 0.3}, {"C", 0.0}});
    const EvalReport r = evaluate(p, truth_of("A\t0.7\nB\t0.3\nC\t0\n"));
    CHECK(r.precision == 1.0);
    CHECK(r.recall == 1.0);
    REQUIRE(r.l1_error.has_value());
    CHECK(*r.l1_error == doctest::Approx(0.0));
    CHECK(r.tn == 1);
  }

  TEST_CASE("false positive halves precision") {
    const auto p = profile_of({{"A", 0.6}, {"B", 0.4}});
    const EvalReport r = evaluate(p, truth_of("A\n"));
    CHECK(r.tp == 1);
    CHECK(r.fp == 1);
    CHECK(r.precision == 0.5);
    CHECK(r.recall == 1.0);
    CHECK_FALSE(r.l1_error.has_value());
  }

  TEST_CASE("empty profile misses everything") {
    const auto p = profile_of({{"A", 0.0}});
    const EvalReport r = evaluate(p, truth_of("A\n"));
    CHECK(r.recall == 0.0);
    CHECK(r.fn == 1);
  }

  TEST_CASE("epsilon, ids and mapping errors") {
    const auto p = profile_of({{"A", 0.9995}, {"B", 0.0005}});
    CHECK(evaluate(p, truth_of("1\t1.0\n2\t0\n")).precision == 1.0);
    CHECK(evaluate(p, truth_of("A\t1.0\n"), 0.0).fp == 1);
    CHECK(*evaluate(p, truth_of("# c\nA\t1.0\nB\t0.0\n")).l1_error == doctest::Approx(0.001));
    CHECK_THROWS_AS((void)evaluate(p, truth_of("Z\n")), TaxonMappingError);
    CHECK_THROWS_AS((void)evaluate(p, truth_of("A\nA\n")), TaxonMappingError);
    CHECK_THROWS_AS((void)truth_of("A\tx\n"), ParseError);
    CHECK_THROWS_AS((void)truth_of("A\t1.5\n"), ParseError);
    CHECK_THROWS((void)evaluate(p, truth_of("A\n"), -1.0));

    std::ostringstream out;
    write_eval_tsv(out, evaluate(p, truth_of("A\n")));
    CHECK(out.str().find("precision\t1.000000\n") != std::string::npos);
    CHECK(out.str().find("l1_error\tNA\n") != std::string::npos);
  }

  TEST_CASE("throughput conversions") {
    CHECK(throughput_report(1000000, 60.0).mreads_per_minute == doctest::Approx(1.0));
    CHECK(throughput_report(500000, 30.0).mreads_per_minute == doctest::Approx(1.0));
    CHECK(throughput_report(0, 0.0).mreads_per_minute == 0.0);
    CHECK(throughput_report(0, 5.0).mreads_per_minute == 0.0);
    CHECK_THROWS((void)throughput_report(10, 0.0));
    const auto r = throughput_report(10, 1.0, 1500, 1e-6);
    REQUIRE(r.bases_per_joule.has_value());
    CHECK(*r.bases_per_joule == doctest::Approx(1.5e9));
  }
}
