#pragma once

// Naive reference implementations used as test oracles. Everything works on
// one int per bit and loops over positions directly; nothing here shares code
// with the library beyond the public data types.

#include <algorithm>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <cctype>
#include <map>
#include <optional>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "hdprof/classifier.hpp"
#include "hdprof/hd_space.hpp"
#include "hdprof/hd_vector.hpp"

namespace oracle {

using Bits = std::vector<int>;

inline Bits bits_of(const hdprof::HDVector& v) {
  Bits b(v.dimension());
  for (std::size_t j = 0; j < b.size(); ++j) b[j] = v.get(j) ? 1 : 0;
  return b;
}

inline hdprof::HDVector vector_of(const Bits& b) {
  hdprof::HDVector v(b.size());
  for (std::size_t j = 0; j < b.size(); ++j) v.set(j, b[j] != 0);
  return v;
}

inline Bits random_bits(std::mt19937_64& rng, std::size_t d) {
  std::bernoulli_distribution coin(0.5);
  Bits b(d);
  for (auto& x : b) x = coin(rng) ? 1 : 0;
  return b;
}

inline std::string random_dna(std::mt19937_64& rng, std::size_t n, const std::string& alphabet = "ACGT") {
  std::uniform_int_distribution<std::size_t> pick(0, alphabet.size() - 1);
  std::string s(n, 'A');
  for (auto& c : s) c = alphabet[pick(rng)];
  return s;
}

// result[(j + k) mod D] = a[j]
inline Bits rotate(const Bits& a, std::size_t k) {
  const std::size_t d = a.size();
  Bits r(d);
  for (std::size_t j = 0; j < d; ++j) r[(j + k) % d] = a[j];
  return r;
}

inline Bits xor_bits(const Bits& a, const Bits& b) {
  Bits r(a.size());
  for (std::size_t j = 0; j < a.size(); ++j) r[j] = a[j] ^ b[j];
  return r;
}

// Per-bit evaluation of B1 ^ rho(B2) ^ ... ^ rho^{N-1}(BN).
inline Bits ngram(const std::vector<Bits>& im, const std::vector<int>& codes) {
  const std::size_t d = im.front().size();
  Bits out(d, 0);
  for (std::size_t i = 0; i < codes.size(); ++i) {
    for (std::size_t j = 0; j < d; ++j) {
      if (im[static_cast<std::size_t>(codes[i])][j]) out[(j + i) % d] ^= 1;
    }
  }
  return out;
}

inline int code_of(char c, const std::string& alphabet) {
  for (std::size_t i = 0; i < alphabet.size(); ++i) {
    if (std::toupper(static_cast<unsigned char>(c)) == alphabet[i]) return static_cast<int>(i);
  }
  return -1;
}

inline char complement_of(char c) {
  switch (c) {
    case 'A':
      return 'T';
    case 'C':
      return 'G';
    case 'G':
      return 'C';
    case 'T':
      return 'A';
  }
  return 'N';
}

struct Bundle {
  std::vector<std::uint64_t> counts;
  std::uint64_t added = 0;
  std::uint64_t windows = 0;
};

// Adds every N-symbol window of `seq` made only of alphabet symbols,
// stopping once `cap` windows have been bundled.
inline void bundle_windows(Bundle& acc, const std::vector<Bits>& im, const std::string& alphabet,
                           const std::string& seq, std::size_t n, std::optional<std::uint64_t> cap,
                           bool revcomp) {
  if (acc.counts.empty()) acc.counts.assign(im.front().size(), 0);
  for (std::size_t p = 0; p + n <= seq.size(); ++p) {
    if (cap && acc.windows >= *cap) return;
    std::vector<int> codes;
    bool ok = true;
    for (std::size_t i = 0; i < n; ++i) {
      const int c = code_of(seq[p + i], alphabet);
      if (c < 0) ok = false;
      codes.push_back(c);
    }
    if (!ok) continue;
    auto add = [&](const Bits& b) {
      for (std::size_t j = 0; j < b.size(); ++j) acc.counts[j] += static_cast<std::uint64_t>(b[j]);
      ++acc.added;
    };
    add(ngram(im, codes));
    if (revcomp) {
      std::vector<int> rc;
      for (std::size_t i = 0; i < n; ++i) {
        rc.push_back(code_of(complement_of(static_cast<char>(std::toupper(seq[p + n - 1 - i]))), alphabet));
      }
      add(ngram(im, rc));
    }
    ++acc.windows;
  }
}

inline Bits majority(const Bundle& acc) {
  Bits out(acc.counts.size());
  for (std::size_t j = 0; j < out.size(); ++j) out[j] = 2 * acc.counts[j] > acc.added ? 1 : 0;
  return out;
}

inline std::vector<Bits> im_bits(const hdprof::ItemMemory& im) {
  std::vector<Bits> out;
  for (std::size_t s = 0; s < im.size(); ++s) out.push_back(bits_of(im.vector(s)));
  return out;
}

// Item memory straight from the documented generator: SplitMix64 finalizer,
// per-symbol key mix(seed ^ mix(s + 1)), draw j = mix(key + (j + 1) * golden),
// bit set iff the top 53 bits as a fraction fall below the density.
inline std::uint64_t splitmix_finalize(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

inline std::vector<Bits> item_memory(const hdprof::HDSpaceConfig& c) {
  const std::uint64_t golden = 0x9e3779b97f4a7c15ULL;
  std::vector<Bits> out;
  for (std::size_t s = 0; s < c.alphabet.size(); ++s) {
    const std::uint64_t key = splitmix_finalize(c.seed ^ splitmix_finalize(s + 1));
    Bits b(c.dimension);
    for (std::size_t j = 0; j < c.dimension; ++j) {
      const std::uint64_t draw = splitmix_finalize(key + (j + 1) * golden);
      const double u = static_cast<double>(draw >> 11) * 0x1.0p-53;
      b[j] = u < c.density ? 1 : 0;
    }
    out.push_back(std::move(b));
  }
  return out;
}

struct Classification {
  std::vector<double> scores;
  std::vector<std::size_t> matched;
  std::size_t best = static_cast<std::size_t>(-1);
};

inline Classification classify(const Bits& q, const std::vector<Bits>& protos, double t) {
  Classification out;
  for (std::size_t i = 0; i < protos.size(); ++i) {
    std::size_t equal = 0;
    for (std::size_t j = 0; j < q.size(); ++j) equal += q[j] == protos[i][j] ? 1 : 0;
    const double s = static_cast<double>(equal) / static_cast<double>(q.size());
    out.scores.push_back(s);
    if (s >= t) out.matched.push_back(i);
  }
  for (std::size_t i = 0; i < out.scores.size(); ++i) {
    if (out.best == static_cast<std::size_t>(-1) || out.scores[i] > out.scores[out.best]) out.best = i;
  }
  return out;
}

// Per-read evaluation of the unique-then-proportional rule, one read at a time.
inline std::vector<double> abundance(const std::vector<std::set<std::size_t>>& reads,
                                     const std::vector<double>& lengths) {
  const std::size_t n = lengths.size();
  std::vector<double> unique(n, 0.0);
  for (const auto& r : reads) {
    if (r.size() == 1) unique[*r.begin()] += 1.0;
  }
  std::vector<double> assigned = unique;
  for (const auto& r : reads) {
    if (r.size() < 2) continue;
    double denom = 0.0;
    for (auto s : r) denom += unique[s] / lengths[s];
    for (auto s : r) {
      assigned[s] += denom > 0.0 ? (unique[s] / lengths[s]) / denom : 1.0 / static_cast<double>(r.size());
    }
  }
  double total = 0.0;
  for (double a : assigned) total += a;
  std::vector<double> out(n, 0.0);
  if (total > 0.0) {
    for (std::size_t i = 0; i < n; ++i) out[i] = assigned[i] / total;
  }
  return out;
}

// Scratch directory removed on destruction.
class TempDir {
 public:
  TempDir() {
    static int counter = 0;
    std::random_device rd;
    path_ = std::filesystem::temp_directory_path() /
            ("hdprof_test_" + std::to_string(rd()) + "_" + std::to_string(counter++));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  [[nodiscard]] const std::filesystem::path& path() const { return path_; }
  [[nodiscard]] std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

}  // namespace oracle
