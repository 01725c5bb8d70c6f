#include "hdprof/hd_space.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>

#include "hdprof/errors.hpp"

namespace hdprof {

namespace {

constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ULL;

std::string format_double(double v) {
  std::array<char, 64> buf{};
  const auto res = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  return {buf.data(), res.ptr};
}

std::string trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return std::string(s.substr(first, last - first + 1));
}

template <typename T>
T parse_unsigned(const std::string& key, const std::string& value) {
  T out{};
  const auto res = std::from_chars(value.data(), value.data() + value.size(), out);
  if (res.ec != std::errc{} || res.ptr != value.data() + value.size()) {
    throw ConfigFormatError("config: field '" + key + "' is not an unsigned integer: '" + value + "'");
  }
  return out;
}

double parse_double(const std::string& key, const std::string& value) {
  double out = 0.0;
  const auto res = std::from_chars(value.data(), value.data() + value.size(), out);
  if (res.ec != std::errc{} || res.ptr != value.data() + value.size()) {
    throw ConfigFormatError("config: field '" + key + "' is not a number: '" + value + "'");
  }
  return out;
}

bool parse_bool(const std::string& key, const std::string& value) {
  if (value == "true") return true;
  if (value == "false") return false;
  throw ConfigFormatError("config: field '" + key + "' must be true or false");
}

// Canonical body shared by the file format and the fingerprint.
std::string canonical_body(const HDSpaceConfig& c) {
  std::ostringstream os;
  os << "version = " << kConfigFormatVersion << '\n'
     << "dimension = " << c.dimension << '\n'
     << "ngram_size = " << c.ngram_size << '\n'
     << "density = " << format_double(c.density) << '\n'
     << "similarity_threshold = " << format_double(c.similarity_threshold) << '\n'
     << "bundling_cap = " << (c.bundling_cap ? std::to_string(*c.bundling_cap) : "none") << '\n'
     << "seed = " << c.seed << '\n'
     << "alphabet = " << c.alphabet << '\n'
     << "encoding = ngram\n"
     << "similarity_metric = hamming\n"
     << "reverse_complement = " << (c.reverse_complement ? "true" : "false") << '\n';
  return os.str();
}

std::uint64_t fnv1a(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (const char ch : bytes) {
    h ^= static_cast<unsigned char>(ch);
    h *= 0x100000001b3ULL;
  }
  return h;
}

}  // namespace

void HDSpaceConfig::validate() const {
  if (ngram_size < 1) throw ConfigFormatError("config: ngram_size must be >= 1");
  if (dimension < ngram_size) throw ConfigFormatError("config: dimension must be >= ngram_size");
  if (!(density > 0.0 && density < 1.0)) throw ConfigFormatError("config: density must lie in (0, 1)");
  if (!(similarity_threshold > 0.0 && similarity_threshold < 1.0)) {
    throw ConfigFormatError("config: similarity_threshold must lie in (0, 1)");
  }
  if (bundling_cap && *bundling_cap == 0) throw ConfigFormatError("config: bundling_cap must be positive");
  if (alphabet.empty()) throw ConfigFormatError("config: alphabet must not be empty");
  for (std::size_t i = 0; i < alphabet.size(); ++i) {
    const char ch = alphabet[i];
    if (ch < 'A' || ch > 'Z') throw ConfigFormatError("config: alphabet symbols must be uppercase letters");
    if (alphabet.find(ch, i + 1) != std::string::npos) {
      throw ConfigFormatError("config: alphabet symbols must be distinct");
    }
  }
  if (reverse_complement && alphabet != "ACGT") {
    throw ConfigFormatError("config: reverse_complement requires alphabet ACGT");
  }
}

std::uint64_t HDSpaceConfig::fingerprint() const { return fnv1a(canonical_body(*this)); }

std::string fingerprint_hex(std::uint64_t fingerprint) {
  std::array<char, 17> buf{};
  std::snprintf(buf.data(), buf.size(), "%016llx", static_cast<unsigned long long>(fingerprint));
  return buf.data();
}

double calibrate_threshold(const HDSpaceConfig& config, double z) {
  if (config.dimension == 0) throw ConfigFormatError("calibrate_threshold: dimension must be >= 1");
  if (!(z >= 0.0)) throw ConfigFormatError("calibrate_threshold: z must be non-negative");
  const double t = 0.5 + z * std::sqrt(0.25 / static_cast<double>(config.dimension));
  return std::min(t, std::nextafter(1.0, 0.0));
}

HDSpaceConfig default_config() {
  HDSpaceConfig c;
  c.dimension = 40'000;
  c.ngram_size = 16;
  c.density = 0.5;
  c.seed = 0;
  c.similarity_threshold = calibrate_threshold(c, 6.0);
  return c;
}

std::string config_to_text(const HDSpaceConfig& config) {
  std::string out = "# hdprof HD space configuration\n";
  out += canonical_body(config);
  out += "fingerprint = " + fingerprint_hex(config.fingerprint()) + "\n";
  return out;
}

HDSpaceConfig config_from_text(std::string_view text) {
  std::map<std::string, std::string> fields;
  std::istringstream in{std::string(text)};
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string t = trim(line);
    if (t.empty() || t.front() == '#') continue;
    const auto eq = t.find('=');
    if (eq == std::string::npos) {
      throw ConfigFormatError("config: line " + std::to_string(line_no) + " is not 'key = value'");
    }
    const std::string key = trim(std::string_view(t).substr(0, eq));
    const std::string value = trim(std::string_view(t).substr(eq + 1));
    if (!fields.emplace(key, value).second) throw ConfigFormatError("config: duplicate field '" + key + "'");
  }

  auto take = [&](const std::string& key) {
    const auto it = fields.find(key);
    if (it == fields.end()) throw ConfigFormatError("config: missing field '" + key + "'");
    std::string v = it->second;
    fields.erase(it);
    return v;
  };

  const auto version = parse_unsigned<int>("version", take("version"));
  if (version != kConfigFormatVersion) {
    throw ConfigFormatError("config: unsupported format version " + std::to_string(version));
  }

  HDSpaceConfig c;
  c.dimension = parse_unsigned<std::size_t>("dimension", take("dimension"));
  c.ngram_size = parse_unsigned<std::size_t>("ngram_size", take("ngram_size"));
  c.density = parse_double("density", take("density"));
  c.similarity_threshold = parse_double("similarity_threshold", take("similarity_threshold"));
  if (const auto cap = take("bundling_cap"); cap != "none") {
    c.bundling_cap = parse_unsigned<std::uint64_t>("bundling_cap", cap);
  }
  c.seed = parse_unsigned<std::uint64_t>("seed", take("seed"));
  c.alphabet = take("alphabet");
  if (take("encoding") != "ngram") throw ConfigFormatError("config: unsupported encoding");
  if (take("similarity_metric") != "hamming") throw ConfigFormatError("config: unsupported similarity_metric");
  c.reverse_complement = parse_bool("reverse_complement", take("reverse_complement"));
  const std::string stored = take("fingerprint");
  if (!fields.empty()) throw ConfigFormatError("config: unknown field '" + fields.begin()->first + "'");

  c.validate();
  if (stored != fingerprint_hex(c.fingerprint())) {
    throw ConfigFormatError("config: fingerprint " + stored + " does not match contents (" +
                            fingerprint_hex(c.fingerprint()) + ")");
  }
  return c;
}

void save_config(const HDSpaceConfig& config, const std::filesystem::path& path) {
  config.validate();
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write config file " + path.string());
  out << config_to_text(config);
  if (!out) throw IoError("failed writing config file " + path.string());
}

HDSpaceConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read config file " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return config_from_text(buf.str());
}

std::uint64_t mix64(std::uint64_t x) noexcept {
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

std::uint64_t counter_draw(std::uint64_t key, std::uint64_t counter) noexcept {
  return mix64(key + (counter + 1) * kGolden);
}

ItemMemory::ItemMemory(std::string alphabet, std::vector<HDVector> atomic, std::uint64_t seed)
    : alphabet_(std::move(alphabet)), atomic_(std::move(atomic)), seed_(seed) {
  if (alphabet_.size() != atomic_.size() || atomic_.empty()) {
    throw InternalConsistencyError("item memory needs exactly one vector per symbol");
  }
  for (const auto& v : atomic_) {
    if (v.dimension() != atomic_.front().dimension()) {
      throw DimensionError("item memory vectors must share one dimension");
    }
  }
  lookup_.fill(-1);
  for (std::size_t i = 0; i < alphabet_.size(); ++i) {
    const auto upper = static_cast<unsigned char>(alphabet_[i]);
    lookup_[upper] = static_cast<int>(i);
    lookup_[static_cast<unsigned char>(std::tolower(upper))] = static_cast<int>(i);
  }
}

const HDVector& ItemMemory::operator[](char symbol) const {
  const int idx = symbol_index(symbol);
  if (idx < 0) throw AmbiguousSymbol(std::string("symbol '") + symbol + "' is not in the alphabet");
  return atomic_[static_cast<std::size_t>(idx)];
}

ItemMemory generate_item_memory(const HDSpaceConfig& config) {
  config.validate();
  std::vector<HDVector> atomic;
  atomic.reserve(config.alphabet.size());
  constexpr double kUnit = 1.0 / 9007199254740992.0;  // 2^-53
  for (std::size_t s = 0; s < config.alphabet.size(); ++s) {
    const std::uint64_t key = mix64(config.seed ^ mix64(s + 1));
    HDVector v(config.dimension);
    for (std::size_t j = 0; j < config.dimension; ++j) {
      const double u = static_cast<double>(counter_draw(key, j) >> 11) * kUnit;
      if (u < config.density) v.set(j, true);
    }
    atomic.push_back(std::move(v));
  }
  return ItemMemory(config.alphabet, std::move(atomic), config.seed);
}

}  // namespace hdprof
