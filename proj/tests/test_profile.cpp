#include <doctest.h>

#include <fstream>
#include <random>
#include <sstream>

#include "hdprof/encoder.hpp"
#include "hdprof/errors.hpp"
#include "hdprof/profile.hpp"
#include "oracle.hpp"

using namespace hdprof;

namespace {

struct Fixture {
  oracle::TempDir dir;
  HDSpaceConfig config;
  std::vector<std::string> genomes;
  HDRefDB db;

  Fixture() {
    config.dimension = 4096;
    config.ngram_size = 12;
    config.similarity_threshold = 0.525;
    std::mt19937_64 rng(77);
    std::vector<ReferenceGenome> refs;
    for (int i = 0; i < 3; ++i) {
      genomes.push_back(oracle::random_dna(rng, 3000));
      refs.push_back({i + 1, "g" + std::to_string(i), {genomes.back()}});
    }
    db = build_refdb(refs, config, generate_item_memory(config));
  }

  std::filesystem::path write_reads(const std::string& name, const std::vector<std::pair<int, int>>& mix,
                                    std::size_t len, int mutations = 0) {
    std::mt19937_64 rng(5);
    const auto path = dir / name;
    std::ofstream out(path);
    int k = 0;
    for (const auto& [g, count] : mix) {
      for (int i = 0; i < count; ++i) {
        const std::size_t pos = rng() % (genomes[static_cast<std::size_t>(g)].size() - len);
        std::string s = genomes[static_cast<std::size_t>(g)].substr(pos, len);
        for (int m = 0; m < mutations; ++m) s[rng() % len] = "ACGT"[rng() % 4];
        out << "@r" << k++ << "\n" << s << "\n+\n" << std::string(len, 'I') << "\n";
      }
    }
    return path;
  }

  ProfileResult run(const std::filesystem::path& reads, ProfileOptions opts = {}) {
    auto stream = RecordStream::open(reads.string());
    return run_profile(db, generate_item_memory(db.config), stream, opts);
  }
};

}  // namespace

TEST_SUITE("profile") {
  TEST_CASE("reads from one genome give a profile of that genome") {
    Fixture f;
    const ProfileResult r = f.run(f.write_reads("a.fq", {{0, 200}}, 150));
    CHECK(r.reads == 200);
    CHECK(r.bases == 200 * 150);
    CHECK(r.profile.taxa[0].relative_abundance > 0.99);
    CHECK(r.threshold == f.config.similarity_threshold);
  }

  TEST_CASE("empty sample") {
    Fixture f;
    std::ofstream(f.dir / "empty.fq").close();
    const ProfileResult r = f.run(f.dir / "empty.fq");
    CHECK(r.reads == 0);
    CHECK(r.profile.total_reads == 0);
    CHECK(r.profile.unmapped_count == 0);
    for (const auto& t : r.profile.taxa) CHECK(t.relative_abundance == 0.0);
  }

  TEST_CASE("raising the threshold increases unmapped reads") {
    Fixture f;
    const auto reads = f.write_reads("noisy.fq", {{0, 100}, {1, 100}}, 150, 6);
    const ProfileResult base = f.run(reads);
    ProfileOptions strict;
    strict.threshold = 0.99;
    const ProfileResult high = f.run(reads, strict);
    CHECK(high.profile.unmapped_count > base.profile.unmapped_count);
    CHECK(high.profile.unmapped_count == 200);
    ProfileOptions bad;
    bad.threshold = 1.5;
    CHECK_THROWS_AS((void)f.run(reads, bad), ConfigFormatError);
  }

  TEST_CASE("outputs do not depend on threads or batch size") {
    Fixture f;
    const auto reads = f.write_reads("mix.fq", {{0, 150}, {1, 90}, {2, 60}}, 120, 2);
    std::string want_profile, want_reads;
    for (const unsigned threads : {1U, 2U, 5U}) {
      for (const std::size_t batch : {1UL, 7UL, 512UL}) {
        std::ostringstream per_read, prof;
        ProfileOptions o;
        o.threads = threads;
        o.batch_size = batch;
        o.per_read = &per_read;
        const ProfileResult r = f.run(reads, o);
        write_profile_tsv(prof, r.profile);
        if (want_profile.empty()) {
          want_profile = prof.str();
          want_reads = per_read.str();
        }
        CHECK(prof.str() == want_profile);
        CHECK(per_read.str() == want_reads);
      }
    }
    CHECK(want_reads.rfind("read_id\tcategory\tmatched_taxa\tbest_taxon\tbest_score\nr0\t", 0) == 0);
  }

  TEST_CASE("short reads are unmapped; query store holds encoded reads") {
    Fixture f;
    std::ofstream(f.dir / "s.fa") << ">short\nACGT\n>ok\n" << f.genomes[2].substr(100, 200) << "\n>nn\nNNNNNNNNNNNNNNNNNNNN\n";
    ProfileOptions o;
    o.query_store = f.dir / "q.hdrq";
    std::ostringstream per_read;
    o.per_read = &per_read;
    const ProfileResult r = f.run(f.dir / "s.fa", o);
    CHECK(r.reads == 3);
    CHECK(r.unencodable == 2);
    CHECK(r.profile.unmapped_count == 2);
    CHECK(r.profile.taxa[2].unique_count == 1);
    CHECK(per_read.str().find("short\tunmapped\t-\t-\t-\n") != std::string::npos);
    CHECK(per_read.str().find("ok\tunique\t3\t3\t") != std::string::npos);
    CHECK(r.stored_queries == 1);
    const QueryStore qs = load_query_store(f.dir / "q.hdrq");
    REQUIRE(qs.queries.size() == 1);
    CHECK(qs.fingerprint == f.db.fingerprint());
    const ItemMemory im = generate_item_memory(f.config);
    const Encoder enc(f.config, im);
    CHECK(qs.queries[0].vector == enc.encode_sequence(f.genomes[2].substr(100, 200)));
  }

  TEST_CASE("parse errors surface from the reader thread") {
    Fixture f;
    std::ofstream(f.dir / "bad.fq") << "@a\nACGT\n+\nII\n";
    CHECK_THROWS_AS((void)f.run(f.dir / "bad.fq"), ParseError);
  }
}
