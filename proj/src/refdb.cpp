#include "hdprof/refdb.hpp"

#include <algorithm>
#include <array>
#include <atomic>
#include <cstring>
#include <exception>
#include <iterator>
#include <limits>
#include <map>
#include <set>
#include <sstream>
#include <thread>
#include <utility>

#include "hdprof/errors.hpp"
#include "hdprof/io_ingest.hpp"
#include "hdprof/version.hpp"

namespace hdprof {

namespace {

constexpr std::array<char, 4> kDbMagic = {'H', 'D', 'R', 'F'};
constexpr std::array<char, 4> kQueryMagic = {'H', 'D', 'R', 'Q'};
constexpr std::uint16_t kQueryFormatVersion = 1;

std::size_t packed_bytes(std::size_t dimension) { return (dimension + 7) / 8; }

class ByteWriter {
 public:
  explicit ByteWriter(std::vector<std::uint8_t>& out) : out_(out) {}

  template <typename T>
  void put(T value) {
    using U = std::make_unsigned_t<T>;
    auto u = static_cast<U>(value);
    for (std::size_t i = 0; i < sizeof(T); ++i) {
      out_.push_back(static_cast<std::uint8_t>(u & 0xFFU));
      u = static_cast<U>(u >> 8);
    }
  }
  void bytes(const void* data, std::size_t n) {
    const auto* p = static_cast<const std::uint8_t*>(data);
    out_.insert(out_.end(), p, p + n);
  }
  template <typename Len>
  void string(const std::string& s) {
    if (s.size() > std::numeric_limits<Len>::max()) throw DbFormatError("string too long to serialize");
    put<Len>(static_cast<Len>(s.size()));
    bytes(s.data(), s.size());
  }

 private:
  std::vector<std::uint8_t>& out_;
};

class ByteReader {
 public:
  explicit ByteReader(std::span<const std::uint8_t> in) : in_(in) {}

  template <typename T>
  T get() {
    need(sizeof(T));
    using U = std::make_unsigned_t<T>;
    U u = 0;
    for (std::size_t i = 0; i < sizeof(T); ++i) u |= static_cast<U>(static_cast<U>(in_[pos_ + i]) << (8 * i));
    pos_ += sizeof(T);
    return static_cast<T>(u);
  }
  std::span<const std::uint8_t> bytes(std::size_t n) {
    need(n);
    auto s = in_.subspan(pos_, n);
    pos_ += n;
    return s;
  }
  template <typename Len>
  std::string string() {
    const auto n = get<Len>();
    const auto s = bytes(n);
    return {reinterpret_cast<const char*>(s.data()), s.size()};
  }
  [[nodiscard]] std::size_t remaining() const noexcept { return in_.size() - pos_; }

 private:
  void need(std::size_t n) const {
    if (in_.size() - pos_ < n) throw DbFormatError("unexpected end of data");
  }
  std::span<const std::uint8_t> in_;
  std::size_t pos_ = 0;
};

void write_header(ByteWriter& w, const HDRefDB& db) {
  w.bytes(kDbMagic.data(), kDbMagic.size());
  w.put<std::uint16_t>(kRefDbFormatVersion);
  w.put<std::uint16_t>(0);
  w.put<std::uint64_t>(db.fingerprint());
  const std::string cfg = config_to_text(db.config);
  if (cfg.size() > std::numeric_limits<std::uint32_t>::max()) throw DbFormatError("config text too long");
  w.string<std::uint32_t>(cfg);
  w.put<std::uint64_t>(db.build.timestamp);
  w.string<std::uint16_t>(db.build.tool_version);
  w.put<std::uint32_t>(static_cast<std::uint32_t>(db.records.size()));
  for (const auto& r : db.records) {
    w.put<std::int64_t>(r.taxon_id);
    w.put<std::uint32_t>(r.segment);
    w.put<std::uint64_t>(r.genome_length);
    w.string<std::uint16_t>(r.name);
  }
}

void check_records(const HDRefDB& db) {
  const bool segmented = std::any_of(db.records.begin(), db.records.end(),
                                     [](const PrototypeRecord& r) { return r.segment != 0; });
  std::set<std::pair<std::int64_t, std::uint32_t>> seen;
  std::map<std::int64_t, std::size_t> per_taxon;
  for (const auto& r : db.records) {
    if (r.vector.dimension() != db.config.dimension) {
      throw DbFormatError("record '" + r.name + "' has dimension " + std::to_string(r.vector.dimension()) +
                          ", database dimension is " + std::to_string(db.config.dimension));
    }
    if (r.genome_length == 0) throw DbFormatError("record '" + r.name + "' has zero genome length");
    if (!seen.emplace(r.taxon_id, r.segment).second) {
      throw DuplicateTaxonError("taxon " + std::to_string(r.taxon_id) + " segment " +
                                std::to_string(r.segment) + " appears twice");
    }
    ++per_taxon[r.taxon_id];
  }
  if (!segmented) {
    for (const auto& [taxon, n] : per_taxon) {
      if (n > 1) throw DuplicateTaxonError("taxon " + std::to_string(taxon) + " appears twice");
    }
  }
}

void check_unique_taxa(const std::vector<std::int64_t>& ids) {
  std::set<std::int64_t> seen;
  for (const auto id : ids) {
    if (!seen.insert(id).second) throw DuplicateTaxonError("duplicate taxon_id " + std::to_string(id));
  }
}

// Slices a genome into prototypes of at most `slice` bases each. Windows
// never cross a FASTA record or a slice boundary.
class GenomeEncoder {
 public:
  GenomeEncoder(const Encoder& encoder, const ReferenceGenome& meta, std::optional<std::uint64_t> slice)
      : bundler_(encoder), meta_(meta), slice_(slice) {}

  void segment(std::string_view bases) {
    while (!bases.empty()) {
      std::size_t take = bases.size();
      if (slice_) take = static_cast<std::size_t>(std::min<std::uint64_t>(take, *slice_ - slice_bases_));
      bundler_.feed(bases.substr(0, take));
      slice_bases_ += take;
      bases.remove_prefix(take);
      if (slice_ && slice_bases_ == *slice_) close_slice();
    }
    bundler_.end_segment();
  }

  std::vector<PrototypeRecord> finish() {
    if (slice_bases_ > 0) close_slice();
    if (records_.empty()) {
      throw EmptyReferenceError("taxon " + std::to_string(meta_.taxon_id) + " (" + meta_.name +
                                "): reference yields no valid window");
    }
    return std::move(records_);
  }

 private:
  void close_slice() {
    if (bundler_.windows() > 0) {
      PrototypeRecord r;
      r.taxon_id = meta_.taxon_id;
      r.name = meta_.name;
      r.segment = static_cast<std::uint32_t>(records_.size());
      r.genome_length = slice_bases_;
      r.vector = bundler_.finish();
      records_.push_back(std::move(r));
    }
    bundler_.reset();
    slice_bases_ = 0;
  }

  WindowBundler bundler_;
  const ReferenceGenome& meta_;
  std::optional<std::uint64_t> slice_;
  std::uint64_t slice_bases_ = 0;
  std::vector<PrototypeRecord> records_;
};

// Runs encode(i) for i in [0, n) on up to `threads` workers and returns the
// per-index results in index order. The first failure by index is rethrown.
template <typename Fn>
auto parallel_encode(std::size_t n, unsigned threads, Fn encode) {
  using Result = decltype(encode(std::size_t{0}));
  std::vector<Result> results(n);
  std::vector<std::exception_ptr> errors(n);
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < n; i = next++) {
      try {
        results[i] = encode(i);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  const unsigned count = std::max(1U, std::min<unsigned>(threads, static_cast<unsigned>(n)));
  std::vector<std::thread> pool;
  for (unsigned t = 1; t < count; ++t) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  return results;
}

HDRefDB assemble(const HDSpaceConfig& config, std::vector<std::vector<PrototypeRecord>> parts,
                 const BuildOptions& options) {
  HDRefDB db;
  db.config = config;
  db.build.timestamp = options.timestamp;
  db.build.tool_version = kToolVersion;
  for (auto& part : parts) std::move(part.begin(), part.end(), std::back_inserter(db.records));
  check_records(db);
  return db;
}

}  // namespace

TaxonTable build_taxon_table(const HDRefDB& db) {
  TaxonTable table;
  std::map<std::int64_t, std::size_t> slot;
  table.slot_of_record.reserve(db.records.size());
  for (const auto& r : db.records) {
    auto [it, inserted] = slot.emplace(r.taxon_id, table.taxa.size());
    if (inserted) table.taxa.push_back({r.taxon_id, r.name, 0});
    table.taxa[it->second].genome_length += r.genome_length;
    table.slot_of_record.push_back(it->second);
  }
  return table;
}

HDRefDB build_refdb(std::span<const ReferenceGenome> references, const HDSpaceConfig& config,
                    const ItemMemory& im, const BuildOptions& options) {
  if (references.empty()) throw EmptyReferenceError("no reference genomes given");
  std::vector<std::int64_t> ids;
  for (const auto& r : references) ids.push_back(r.taxon_id);
  check_unique_taxa(ids);
  if (options.segment_size && *options.segment_size == 0) throw EmptyReferenceError("segment size must be positive");

  const Encoder encoder(config, im);
  auto parts = parallel_encode(references.size(), options.threads, [&](std::size_t i) {
    GenomeEncoder genome(encoder, references[i], options.segment_size);
    for (const auto& seg : references[i].segments) genome.segment(seg);
    return genome.finish();
  });
  return assemble(config, std::move(parts), options);
}

HDRefDB build_refdb(std::span<const ReferenceInput> references, const HDSpaceConfig& config,
                    const ItemMemory& im, const BuildOptions& options) {
  if (references.empty()) throw EmptyReferenceError("no reference genomes given");
  std::vector<std::int64_t> ids;
  for (const auto& r : references) ids.push_back(r.taxon_id);
  check_unique_taxa(ids);
  if (options.segment_size && *options.segment_size == 0) throw EmptyReferenceError("segment size must be positive");

  const Encoder encoder(config, im);
  auto parts = parallel_encode(references.size(), options.threads, [&](std::size_t i) {
    const ReferenceGenome meta{references[i].taxon_id, references[i].name, {}};
    GenomeEncoder genome(encoder, meta, options.segment_size);
    auto stream = RecordStream::open(references[i].fasta_path, SeqFormat::automatic);
    while (auto rec = stream.next()) genome.segment(rec->bases);
    return genome.finish();
  });
  return assemble(config, std::move(parts), options);
}

std::vector<ReferenceInput> read_reference_manifest(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read reference manifest " + path.string());
  const auto base = path.parent_path();
  std::vector<ReferenceInput> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line.front() == '#') continue;
    std::vector<std::string> cols;
    std::stringstream ss(line);
    std::string col;
    while (std::getline(ss, col, '\t')) cols.push_back(col);
    if (cols.size() != 3) {
      throw ParseError(path.string() + ": expected taxon_id<TAB>name<TAB>fasta_path", line_no);
    }
    ReferenceInput ref;
    try {
      std::size_t used = 0;
      ref.taxon_id = std::stoll(cols[0], &used);
      if (used != cols[0].size()) throw std::invalid_argument("trailing");
    } catch (const std::exception&) {
      throw ParseError(path.string() + ": taxon_id '" + cols[0] + "' is not an integer", line_no);
    }
    ref.name = cols[1];
    std::filesystem::path fasta(cols[2]);
    if (fasta.is_relative() && cols[2] != "-") fasta = base / fasta;
    ref.fasta_path = fasta.string();
    out.push_back(std::move(ref));
  }
  return out;
}

Footprint footprint(const HDRefDB& db) {
  std::vector<std::uint8_t> header;
  ByteWriter w(header);
  write_header(w, db);
  return {header.size(), db.records.size() * packed_bytes(db.config.dimension)};
}

void pack_vector(const HDVector& v, std::span<std::uint8_t> out) {
  const std::size_t n = packed_bytes(v.dimension());
  if (out.size() != n) throw DimensionError("pack_vector: output size mismatch");
  const auto words = v.words();
  for (std::size_t b = 0; b < n; ++b) {
    out[b] = static_cast<std::uint8_t>((words[b / 8] >> (8 * (b % 8))) & 0xFFU);
  }
}

HDVector unpack_vector(std::size_t dimension, std::span<const std::uint8_t> bytes) {
  if (bytes.size() != packed_bytes(dimension)) throw DimensionError("unpack_vector: input size mismatch");
  std::vector<HDVector::word_type> words((dimension + 63) / 64, 0);
  for (std::size_t b = 0; b < bytes.size(); ++b) {
    words[b / 8] |= static_cast<HDVector::word_type>(bytes[b]) << (8 * (b % 8));
  }
  const HDVector probe = HDVector::from_words(dimension, words);
  if (probe.words().back() != words.back()) throw DbFormatError("packed vector has bits set past its dimension");
  return probe;
}

std::vector<std::uint8_t> serialize_refdb(const HDRefDB& db) {
  check_records(db);
  std::vector<std::uint8_t> out;
  const std::size_t vec_bytes = packed_bytes(db.config.dimension);
  ByteWriter w(out);
  write_header(w, db);
  const std::size_t header = out.size();
  out.resize(header + db.records.size() * vec_bytes);
  for (std::size_t i = 0; i < db.records.size(); ++i) {
    pack_vector(db.records[i].vector, std::span(out).subspan(header + i * vec_bytes, vec_bytes));
  }
  return out;
}

HDRefDB deserialize_refdb(std::span<const std::uint8_t> bytes, const HDSpaceConfig* expected) {
  ByteReader r(bytes);
  const auto magic = r.bytes(kDbMagic.size());
  if (!std::equal(magic.begin(), magic.end(), kDbMagic.begin(),
                  [](std::uint8_t a, char b) { return a == static_cast<std::uint8_t>(b); })) {
    throw DbFormatError("not an HD reference database (bad magic)");
  }
  const auto version = r.get<std::uint16_t>();
  if (version != kRefDbFormatVersion) {
    throw DbFormatError("unsupported database format version " + std::to_string(version));
  }
  if (r.get<std::uint16_t>() != 0) throw DbFormatError("unsupported database flags");
  const auto stored_fp = r.get<std::uint64_t>();

  HDRefDB db;
  try {
    db.config = config_from_text(r.string<std::uint32_t>());
  } catch (const ConfigFormatError& e) {
    throw DbFormatError(std::string("embedded config: ") + e.what());
  }
  if (db.config.fingerprint() != stored_fp) {
    throw DbFormatError("header fingerprint " + fingerprint_hex(stored_fp) + " does not match embedded config");
  }
  if (expected != nullptr && expected->fingerprint() != stored_fp) {
    throw ConfigMismatchError("database fingerprint " + fingerprint_hex(stored_fp) +
                              " does not match config fingerprint " + fingerprint_hex(expected->fingerprint()));
  }
  db.build.timestamp = r.get<std::uint64_t>();
  db.build.tool_version = r.string<std::uint16_t>();

  const auto count = r.get<std::uint32_t>();
  const std::size_t vec_bytes = packed_bytes(db.config.dimension);
  db.records.resize(count);
  for (auto& rec : db.records) {
    rec.taxon_id = r.get<std::int64_t>();
    rec.segment = r.get<std::uint32_t>();
    rec.genome_length = r.get<std::uint64_t>();
    rec.name = r.string<std::uint16_t>();
  }
  if (r.remaining() != static_cast<std::size_t>(count) * vec_bytes) {
    throw DbFormatError("payload is " + std::to_string(r.remaining()) + " bytes, expected " +
                        std::to_string(static_cast<std::size_t>(count) * vec_bytes));
  }
  for (auto& rec : db.records) rec.vector = unpack_vector(db.config.dimension, r.bytes(vec_bytes));
  try {
    check_records(db);
  } catch (const DuplicateTaxonError& e) {
    throw DbFormatError(e.what());
  }
  return db;
}

void save_refdb(const HDRefDB& db, const std::filesystem::path& path) {
  const auto bytes = serialize_refdb(db);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write database " + path.string());
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IoError("failed writing database " + path.string());
}

namespace {

std::vector<std::uint8_t> read_file(const std::filesystem::path& path, const char* what) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError(std::string("cannot read ") + what + " " + path.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

}  // namespace

HDRefDB load_refdb(const std::filesystem::path& path, const HDSpaceConfig* expected) {
  const auto bytes = read_file(path, "database");
  try {
    return deserialize_refdb(bytes, expected);
  } catch (const DbFormatError& e) {
    throw DbFormatError(path.string() + ": " + e.what());
  }
}

QueryStoreWriter::QueryStoreWriter(const std::filesystem::path& path, std::uint64_t fingerprint,
                                   std::size_t dimension)
    : out_(path, std::ios::binary | std::ios::trunc), path_(path), dimension_(dimension) {
  if (!out_) throw IoError("cannot write query store " + path.string());
  ByteWriter w(buffer_);
  w.bytes(kQueryMagic.data(), kQueryMagic.size());
  w.put<std::uint16_t>(kQueryFormatVersion);
  w.put<std::uint16_t>(0);
  w.put<std::uint64_t>(fingerprint);
  w.put<std::uint64_t>(dimension);
  out_.write(reinterpret_cast<const char*>(buffer_.data()), static_cast<std::streamsize>(buffer_.size()));
}

void QueryStoreWriter::append(const std::string& id, const HDVector& vector) {
  if (vector.dimension() != dimension_) throw DimensionError("query store: dimension mismatch");
  buffer_.clear();
  ByteWriter w(buffer_);
  w.string<std::uint32_t>(id);
  const std::size_t start = buffer_.size();
  buffer_.resize(start + packed_bytes(dimension_));
  pack_vector(vector, std::span(buffer_).subspan(start));
  out_.write(reinterpret_cast<const char*>(buffer_.data()), static_cast<std::streamsize>(buffer_.size()));
  ++count_;
}

void QueryStoreWriter::close() {
  out_.close();
  if (!out_) throw IoError("failed writing query store " + path_.string());
}

QueryStore load_query_store(const std::filesystem::path& path) {
  const auto bytes = read_file(path, "query store");
  ByteReader r(bytes);
  const auto magic = r.bytes(kQueryMagic.size());
  if (!std::equal(magic.begin(), magic.end(), kQueryMagic.begin(),
                  [](std::uint8_t a, char b) { return a == static_cast<std::uint8_t>(b); })) {
    throw DbFormatError(path.string() + ": not a query store (bad magic)");
  }
  if (r.get<std::uint16_t>() != kQueryFormatVersion) throw DbFormatError(path.string() + ": unsupported version");
  r.get<std::uint16_t>();
  QueryStore store;
  store.fingerprint = r.get<std::uint64_t>();
  store.dimension = static_cast<std::size_t>(r.get<std::uint64_t>());
  if (store.dimension == 0) throw DbFormatError(path.string() + ": zero dimension");
  while (r.remaining() > 0) {
    StoredQuery q;
    q.id = r.string<std::uint32_t>();
    q.vector = unpack_vector(store.dimension, r.bytes(packed_bytes(store.dimension)));
    store.queries.push_back(std::move(q));
  }
  return store;
}

}  // namespace hdprof
