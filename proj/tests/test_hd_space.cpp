#include <doctest.h>

#include <cmath>
#include <fstream>

#include "hdprof/errors.hpp"
#include "hdprof/hd_space.hpp"
#include "oracle.hpp"

using namespace hdprof;

TEST_SUITE("hd_space") {
  TEST_CASE("defaults") {
    const HDSpaceConfig c = default_config();
    CHECK(c.dimension == 40000);
    CHECK(c.density == 0.5);
    CHECK(c.ngram_size == 16);
    CHECK(c.alphabet == "ACGT");
    CHECK(c.similarity_threshold == doctest::Approx(0.515).epsilon(1e-12));
    CHECK_NOTHROW(c.validate());
  }

  TEST_CASE("calibrate_threshold") {
    HDSpaceConfig c;
    c.dimension = 40000;
    CHECK(calibrate_threshold(c, 6.0) == doctest::Approx(0.515).epsilon(1e-12));
    CHECK(calibrate_threshold(c, 0.0) == 0.5);
    c.dimension = 100;
    CHECK(calibrate_threshold(c, 6.0) == doctest::Approx(0.8).epsilon(1e-12));
    c.dimension = 4;
    CHECK(calibrate_threshold(c, 6.0) < 1.0);
    CHECK_THROWS(calibrate_threshold(c, -1.0));
  }

  TEST_CASE("validate rejects broken invariants") {
    auto bad = [](auto mutate) {
      HDSpaceConfig c = default_config();
      mutate(c);
      CHECK_THROWS_AS(c.validate(), ConfigFormatError);
    };
    bad([](HDSpaceConfig& c) { c.ngram_size = 0; });
    bad([](HDSpaceConfig& c) { c.dimension = 8, c.ngram_size = 9; });
    bad([](HDSpaceConfig& c) { c.density = 0.0; });
    bad([](HDSpaceConfig& c) { c.density = 1.0; });
    bad([](HDSpaceConfig& c) { c.similarity_threshold = 0.0; });
    bad([](HDSpaceConfig& c) { c.similarity_threshold = 1.0; });
    bad([](HDSpaceConfig& c) { c.alphabet = ""; });
    bad([](HDSpaceConfig& c) { c.alphabet = "AAC"; });
    bad([](HDSpaceConfig& c) { c.alphabet = "ACGU", c.reverse_complement = true; });
    bad([](HDSpaceConfig& c) { c.bundling_cap = 0; });
  }

  TEST_CASE("config text round trip and fingerprint") {
    HDSpaceConfig c = default_config();
    c.bundling_cap = 100;
    c.seed = 12345;
    c.reverse_complement = true;
    const std::string text = config_to_text(c);
    const HDSpaceConfig back = config_from_text(text);
    CHECK(back == c);
    CHECK(back.fingerprint() == c.fingerprint());
    CHECK(config_from_text(config_to_text(default_config())).dimension == 40000);

    HDSpaceConfig other = c;
    other.seed = 12346;
    CHECK(other.fingerprint() != c.fingerprint());
    other = c;
    other.similarity_threshold = 0.52;
    CHECK(other.fingerprint() != c.fingerprint());
    CHECK(fingerprint_hex(0x0123456789abcdefULL) == "0123456789abcdef");
  }

  TEST_CASE("config file errors") {
    const std::string text = config_to_text(default_config());
    CHECK_THROWS_AS(config_from_text(text.substr(0, text.size() / 2)), ConfigFormatError);
    CHECK_THROWS_AS(config_from_text(""), ConfigFormatError);
    std::string tampered = text;
    tampered.replace(tampered.find("seed = 0"), 8, "seed = 1");
    CHECK_THROWS_AS(config_from_text(tampered), ConfigFormatError);
    std::string bad_version = text;
    bad_version.replace(bad_version.find("version = 1"), 11, "version = 9");
    CHECK_THROWS_AS(config_from_text(bad_version), ConfigFormatError);
    CHECK_THROWS_AS(config_from_text(text + "unknown = 3\n"), ConfigFormatError);

    oracle::TempDir dir;
    const auto path = dir / "c.cfg";
    save_config(default_config(), path);
    CHECK(load_config(path).fingerprint() == default_config().fingerprint());
    {
      std::ofstream(dir / "t.cfg") << text.substr(0, 40);
    }
    CHECK_THROWS_AS(load_config(dir / "t.cfg"), ConfigFormatError);
    CHECK_THROWS_AS(load_config(dir / "missing.cfg"), IoError);
  }

  TEST_CASE("item memory follows the documented generator") {
    HDSpaceConfig c;
    c.dimension = 300;
    c.ngram_size = 4;
    for (const std::uint64_t seed : {0ULL, 1ULL, 0xdeadbeefULL}) {
      for (const double density : {0.5, 0.1, 0.9}) {
        c.seed = seed;
        c.density = density;
        const ItemMemory im = generate_item_memory(c);
        REQUIRE(oracle::im_bits(im) == oracle::item_memory(c));
      }
    }
  }

  TEST_CASE("item memory statistics at D=40000") {
    const HDSpaceConfig c = default_config();
    const ItemMemory a = generate_item_memory(c);
    const ItemMemory b = generate_item_memory(c);
    REQUIRE(a.size() == 4);
    const double bound = 5.0 * std::sqrt(0.25 * 40000.0);
    for (std::size_t s = 0; s < a.size(); ++s) {
      CHECK(a.vector(s) == b.vector(s));
      CHECK(a.vector(s).dimension() == 40000);
      CHECK(std::abs(static_cast<double>(a.vector(s).popcount()) - 20000.0) <= bound);
      for (std::size_t t = s + 1; t < a.size(); ++t) {
        CHECK(std::abs(static_cast<double>(hamming(a.vector(s), a.vector(t))) - 20000.0) <= bound);
      }
    }
    HDSpaceConfig reseeded = c;
    reseeded.seed = 1;
    CHECK(generate_item_memory(reseeded).vector(0) != a.vector(0));
  }

  TEST_CASE("symbol lookup") {
    HDSpaceConfig c;
    c.dimension = 64;
    c.ngram_size = 2;
    const ItemMemory im = generate_item_memory(c);
    CHECK(im.symbol_index('A') == 0);
    CHECK(im.symbol_index('t') == 3);
    CHECK(im.symbol_index('N') == -1);
    CHECK(im['g'] == im.vector(2));
    CHECK_THROWS_AS((void)im['N'], AmbiguousSymbol);
  }
}
