#include <doctest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <fstream>
#include <random>
#include <sstream>

#include <json.hpp>

#include "hdprof/refdb.hpp"
#include "oracle.hpp"

namespace {

const std::string kBin = HDPROF_BIN;

int run(const std::string& args) {
  const int status = std::system((kBin + " " + args).c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string q(const std::filesystem::path& p) { return "'" + p.string() + "'"; }

// Writes `count` random genomes plus a manifest; returns the manifest path.
std::filesystem::path toy_refs(const oracle::TempDir& dir, int count, std::size_t len) {
  std::mt19937_64 rng(8);
  std::ofstream m(dir / "refs.tsv");
  for (int i = 0; i < count; ++i) {
    const std::string name = "g" + std::to_string(i);
    std::ofstream(dir / (name + ".fa")) << ">" << name << "\n" << oracle::random_dna(rng, len) << "\n";
    m << (i + 1) << "\t" << name << "\t" << name << ".fa\n";
  }
  return dir / "refs.tsv";
}

}  // namespace

TEST_SUITE("cli") {
  TEST_CASE("config, build and inspect three toy genomes") {
    oracle::TempDir dir;
    const auto refs = toy_refs(dir, 3, 400);
    REQUIRE(run("config --out " + q(dir / "c.cfg") + " --dimension 1024 --ngram 8 --z 4 2>/dev/null") == 0);
    REQUIRE(run("build --refs " + q(refs) + " --config " + q(dir / "c.cfg") + " --out " + q(dir / "db.hdrf") +
                " --threads 2 2>/dev/null") == 0);
    const hdprof::HDRefDB db = hdprof::load_refdb(dir / "db.hdrf");
    CHECK(db.records.size() == 3);
    CHECK(db.config.dimension == 1024);
    const auto manifest = nlohmann::json::parse(slurp(dir / "db.hdrf.manifest.json"));
    CHECK(manifest["subcommand"] == "build");
    CHECK(manifest["records"] == 3);
    CHECK(manifest["timings_seconds"]["build"].get<double>() >= 0.0);
    CHECK(manifest["threads"] == 2);

    REQUIRE(run("inspect --db " + q(dir / "db.hdrf") + " --out " + q(dir / "inspect.txt")) == 0);
    const std::string text = slurp(dir / "inspect.txt");
    CHECK(text.find("dimension = 1024") != std::string::npos);
    CHECK(text.find("payload_bytes\t384\n") != std::string::npos);
    CHECK(text.find("2\t3\tg2\t0\t400\t") != std::string::npos);
  }

  TEST_CASE("duplicate taxon ids fail with a non-zero exit") {
    oracle::TempDir dir;
    toy_refs(dir, 2, 100);
    std::ofstream(dir / "dup.tsv") << "1\ta\tg0.fa\n1\tb\tg1.fa\n";
    CHECK(run("build --refs " + q(dir / "dup.tsv") + " --out " + q(dir / "db.hdrf") + " 2>" +
              q(dir / "err.txt")) != 0);
    CHECK(slurp(dir / "err.txt").find("DuplicateTaxonError") != std::string::npos);
    CHECK_FALSE(std::filesystem::exists(dir / "db.hdrf"));
  }

  TEST_CASE("twenty genomes at D=40000 report a 100000-byte payload") {
    oracle::TempDir dir;
    const auto refs = toy_refs(dir, 20, 60);
    REQUIRE(run("build --refs " + q(refs) + " --out " + q(dir / "db.hdrf") + " 2>" + q(dir / "err.txt")) == 0);
    CHECK(slurp(dir / "err.txt").find("payload 100000 B") != std::string::npos);
    const auto manifest = nlohmann::json::parse(slurp(dir / "db.hdrf.manifest.json"));
    CHECK(manifest["footprint"]["payload_bytes"] == 100000);
  }

  TEST_CASE("profile, eval and cost end to end") {
    oracle::TempDir dir;
    const auto refs = toy_refs(dir, 3, 2000);
    REQUIRE(run("config --out " + q(dir / "c.cfg") + " --dimension 4096 --ngram 12 --z 3 2>/dev/null") == 0);
    REQUIRE(run("build --refs " + q(refs) + " --config " + q(dir / "c.cfg") + " --out " + q(dir / "db.hdrf") +
                " 2>/dev/null") == 0);
    const std::string g0 = slurp(dir / "g0.fa").substr(4, 2000);
    {
      std::ofstream r(dir / "reads.fa");
      for (int i = 0; i < 40; ++i) r << ">r" << i << "\n" << g0.substr(static_cast<std::size_t>(i) * 40, 150) << "\n";
    }
    REQUIRE(run("profile --db " + q(dir / "db.hdrf") + " --reads " + q(dir / "reads.fa") + " --out " +
                q(dir / "p.tsv") + " --per-read " + q(dir / "pr.tsv") + " --config " + q(dir / "c.cfg") +
                " --save-queries " + q(dir / "hdr") + " 2>" + q(dir / "err.txt")) == 0);
    CHECK(slurp(dir / "err.txt").find("MR/m") != std::string::npos);
    CHECK(std::filesystem::exists(dir / "hdr" / "queries.hdrq"));
    const auto manifest = nlohmann::json::parse(slurp(dir / "p.tsv.manifest.json"));
    CHECK(manifest["counts"]["reads"] == 40);
    for (const char* phase : {"encode", "classify", "estimate"}) {
      CHECK(manifest["timings_seconds"][phase].get<double>() >= 0.0);
    }
    const std::string profile = slurp(dir / "p.tsv");
    CHECK(profile.find("1\tg0\t40\t40.000000\t1.000000000\n") != std::string::npos);

    std::ofstream(dir / "truth.tsv") << "g0\t1.0\ng1\t0\ng2\t0\n";
    REQUIRE(run("eval --profile " + q(dir / "p.tsv") + " --truth " + q(dir / "truth.tsv") + " --out " +
                q(dir / "e.tsv") + " 2>/dev/null") == 0);
    const std::string eval = slurp(dir / "e.tsv");
    CHECK(eval.find("precision\t1.000000") != std::string::npos);
    CHECK(eval.find("recall\t1.000000") != std::string::npos);
    CHECK(std::filesystem::exists(dir / "e.tsv.manifest.json"));

    hdprof::HDSpaceConfig other = hdprof::load_config(dir / "c.cfg");
    other.seed = 99;
    hdprof::save_config(other, dir / "wrong.cfg");
    CHECK(run("profile --db " + q(dir / "db.hdrf") + " --reads " + q(dir / "reads.fa") + " --out " +
              q(dir / "p2.tsv") + " --config " + q(dir / "wrong.cfg") + " 2>" + q(dir / "err2.txt")) != 0);
    CHECK(slurp(dir / "err2.txt").find("ConfigMismatchError") != std::string::npos);

    std::ofstream(dir / "empty.fq").close();
    REQUIRE(run("profile --db " + q(dir / "db.hdrf") + " --reads " + q(dir / "empty.fq") + " --out " +
                q(dir / "p3.tsv") + " 2>/dev/null") == 0);
    CHECK(slurp(dir / "p3.tsv").find("1\tg0\t0\t0.000000\t0.000000000\n") != std::string::npos);
  }

  TEST_CASE("cost report with 20 prototypes") {
    oracle::TempDir dir;
    REQUIRE(run("cost --prototypes 20 --read-length 150 --out " + q(dir / "cost.tsv") + " 2>/dev/null") == 0);
    const std::string tsv = slurp(dir / "cost.tsv");
    CHECK(tsv.find("encode_latency\t6048\tns") != std::string::npos);
    CHECK(tsv.find("classify_latency\t3160\tns") != std::string::npos);
    CHECK(run("cost --read-length 150 2>/dev/null >/dev/null") != 0);
    std::ofstream(dir / "params.txt") << "read_latency_ns = 1.4\n";
    REQUIRE(run("cost --prototypes 20 --params " + q(dir / "params.txt") + " --out " + q(dir / "c2.tsv") +
                " 2>/dev/null") == 0);
    CHECK(slurp(dir / "c2.tsv").find("encode_latency\t3024\tns") != std::string::npos);
  }

  TEST_CASE("inspect of an empty database shows a header-only footprint") {
    oracle::TempDir dir;
    hdprof::HDRefDB db;
    db.config = hdprof::default_config();
    hdprof::save_refdb(db, dir / "empty.hdrf");
    const auto size = std::filesystem::file_size(dir / "empty.hdrf");
    REQUIRE(run("inspect --db " + q(dir / "empty.hdrf") + " --out " + q(dir / "i.txt")) == 0);
    const std::string text = slurp(dir / "i.txt");
    CHECK(text.find("payload_bytes\t0\n") != std::string::npos);
    CHECK(text.find("header_bytes\t" + std::to_string(size) + "\n") != std::string::npos);
  }

  TEST_CASE("usage and input errors exit non-zero") {
    CHECK(run("2>/dev/null >/dev/null") != 0);
    CHECK(run("frobnicate 2>/dev/null >/dev/null") != 0);
    CHECK(run("profile --db 2>/dev/null >/dev/null") != 0);
    CHECK(run("inspect --db /nonexistent/db.hdrf 2>/dev/null") != 0);
    CHECK(run("--version >/dev/null") == 0);
  }
}
