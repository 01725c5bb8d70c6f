// hdprof: build HD reference databases, profile read samples, evaluate
// profiles, estimate accelerator costs, and inspect database files.

#include <CLI11.hpp>
#include <json.hpp>

#include <chrono>
#include <cinttypes>
#include <cstdio>
#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "hdprof/abundance.hpp"
#include "hdprof/accmodel.hpp"
#include "hdprof/errors.hpp"
#include "hdprof/hd_space.hpp"
#include "hdprof/io_ingest.hpp"
#include "hdprof/metrics.hpp"
#include "hdprof/profile.hpp"
#include "hdprof/refdb.hpp"
#include "hdprof/version.hpp"

namespace fs = std::filesystem;
using json = nlohmann::json;
using namespace hdprof;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

unsigned default_threads() { return std::max(1U, std::thread::hardware_concurrency()); }

std::uint64_t build_timestamp() {
  if (const char* env = std::getenv("SOURCE_DATE_EPOCH"); env && *env) {
    try {
      return std::stoull(env);
    } catch (const std::exception&) {
      throw ConfigFormatError(std::string("SOURCE_DATE_EPOCH is not an integer: ") + env);
    }
  }
  return static_cast<std::uint64_t>(std::time(nullptr));
}

json config_json(const HDSpaceConfig& c) {
  json j;
  j["dimension"] = c.dimension;
  j["ngram_size"] = c.ngram_size;
  j["density"] = c.density;
  j["similarity_threshold"] = c.similarity_threshold;
  j["bundling_cap"] = c.bundling_cap ? json(*c.bundling_cap) : json(nullptr);
  j["seed"] = c.seed;
  j["alphabet"] = c.alphabet;
  j["reverse_complement"] = c.reverse_complement;
  j["fingerprint"] = fingerprint_hex(c.fingerprint());
  return j;
}

// Run manifest written next to the primary output.
struct Manifest {
  json doc;
  std::optional<fs::path> path;

  explicit Manifest(const std::string& subcommand) {
    doc["subcommand"] = subcommand;
    doc["tool_version"] = kToolVersion;
    doc["inputs"] = json::object();
    doc["outputs"] = json::object();
    doc["timings_seconds"] = json::object();
  }

  void write() const {
    if (!path) return;
    std::ofstream out(*path);
    out << doc.dump(2) << '\n';
    if (!out) throw IoError("cannot write manifest " + path->string());
  }
};

std::optional<fs::path> manifest_for(const std::string& out, const std::string& explicit_path) {
  if (!explicit_path.empty()) return fs::path(explicit_path);
  if (out.empty() || out == "-") return std::nullopt;
  return fs::path(out + ".manifest.json");
}

// Writes to a file, or to stdout for "-".
class Output {
 public:
  explicit Output(const std::string& path) {
    if (path.empty() || path == "-") return;
    file_.open(path, std::ios::binary);
    if (!file_) throw IoError("cannot open " + path + " for writing");
    name_ = path;
  }
  std::ostream& stream() { return file_.is_open() ? static_cast<std::ostream&>(file_) : std::cout; }
  void close() {
    if (!file_.is_open()) {
      std::cout.flush();
      return;
    }
    file_.close();
    if (!file_) throw IoError("failed writing " + name_);
  }

 private:
  std::ofstream file_;
  std::string name_;
};

// ---- config ---------------------------------------------------------------

struct ConfigArgs {
  std::string out;
  std::size_t dimension = 40'000;
  std::size_t ngram = 16;
  double density = 0.5;
  std::uint64_t seed = 0;
  std::optional<double> z;
  std::optional<double> threshold;
  std::optional<std::uint64_t> cap;
  bool revcomp = false;
};

int cmd_config(const ConfigArgs& a) {
  HDSpaceConfig c;
  c.dimension = a.dimension;
  c.ngram_size = a.ngram;
  c.density = a.density;
  c.seed = a.seed;
  c.bundling_cap = a.cap;
  c.reverse_complement = a.revcomp;
  c.similarity_threshold = a.threshold ? *a.threshold : calibrate_threshold(c, a.z.value_or(6.0));
  c.validate();
  Output out(a.out);
  out.stream() << config_to_text(c);
  out.close();
  std::cerr << "config fingerprint " << fingerprint_hex(c.fingerprint()) << ", threshold "
            << c.similarity_threshold << '\n';
  return 0;
}

// ---- build ----------------------------------------------------------------

struct BuildArgs {
  std::string refs;
  std::string config;
  std::string out;
  std::string manifest;
  std::optional<std::uint64_t> segment_size;
  unsigned threads = default_threads();
};

int cmd_build(const BuildArgs& a) {
  const auto t0 = Clock::now();
  Manifest m("build");
  m.path = manifest_for(a.out, a.manifest);
  const HDSpaceConfig config = a.config.empty() ? default_config() : load_config(a.config);
  const auto refs = read_reference_manifest(a.refs);
  const ItemMemory im = generate_item_memory(config);

  BuildOptions opts;
  opts.segment_size = a.segment_size;
  opts.threads = a.threads;
  opts.timestamp = build_timestamp();
  const auto tb = Clock::now();
  const HDRefDB db = build_refdb(refs, config, im, opts);
  const double build_seconds = seconds_since(tb);
  save_refdb(db, a.out);
  const Footprint fp = footprint(db);

  std::cerr << "built " << db.records.size() << " prototype(s) from " << refs.size() << " genome(s) in "
            << build_seconds << " s\n"
            << "footprint: header " << fp.header_bytes << " B, payload " << fp.payload_bytes << " B, total "
            << fp.total_bytes() << " B\n";

  m.doc["config"] = config_json(config);
  m.doc["threads"] = a.threads;
  m.doc["inputs"]["refs"] = a.refs;
  if (!a.config.empty()) m.doc["inputs"]["config"] = a.config;
  json genomes = json::array();
  for (const auto& r : refs) genomes.push_back({{"taxon_id", r.taxon_id}, {"name", r.name}, {"fasta", r.fasta_path}});
  m.doc["inputs"]["genomes"] = genomes;
  m.doc["outputs"]["db"] = a.out;
  m.doc["segment_size"] = a.segment_size ? json(*a.segment_size) : json(nullptr);
  m.doc["records"] = db.records.size();
  m.doc["footprint"] = {{"header_bytes", fp.header_bytes},
                        {"payload_bytes", fp.payload_bytes},
                        {"total_bytes", fp.total_bytes()}};
  m.doc["timings_seconds"]["build"] = build_seconds;
  m.doc["timings_seconds"]["total"] = seconds_since(t0);
  m.write();
  return 0;
}

// ---- profile --------------------------------------------------------------

struct ProfileArgs {
  std::string db;
  std::string reads;
  std::string out;
  std::string config;
  std::string per_read;
  std::string save_queries;
  std::string manifest;
  std::string format = "auto";
  std::optional<double> threshold;
  unsigned threads = default_threads();
  std::size_t batch_size = 512;
};

int cmd_profile(const ProfileArgs& a) {
  const auto t0 = Clock::now();
  Manifest m("profile");
  m.path = manifest_for(a.out, a.manifest);

  std::optional<HDSpaceConfig> expected;
  if (!a.config.empty()) expected = load_config(a.config);
  const auto tl = Clock::now();
  const HDRefDB db = load_refdb(a.db, expected ? &*expected : nullptr);
  const ItemMemory im = generate_item_memory(db.config);
  const double load_seconds = seconds_since(tl);

  auto reads = RecordStream::open(a.reads, parse_seq_format(a.format));

  std::optional<Output> per_read;
  ProfileOptions opts;
  opts.threshold = a.threshold;
  opts.threads = a.threads;
  opts.batch_size = a.batch_size;
  if (!a.per_read.empty()) {
    per_read.emplace(a.per_read);
    opts.per_read = &per_read->stream();
  }
  std::optional<fs::path> store_path;
  if (!a.save_queries.empty()) {
    fs::create_directories(a.save_queries);
    store_path = fs::path(a.save_queries) / "queries.hdrq";
    opts.query_store = store_path;
  }

  const ProfileResult r = run_profile(db, im, reads, opts);
  if (per_read) per_read->close();

  Output out(a.out);
  write_profile_tsv(out.stream(), r.profile);
  out.close();

  const ThroughputReport tp = throughput_report(r.reads, std::max(r.timings.wall_seconds, 1e-9));
  char line[256];
  std::snprintf(line, sizeof line,
                "profiled %" PRIu64 " reads (%" PRIu64 " unique, %" PRIu64 " multi, %" PRIu64
                " unmapped) at T=%.6f in %.3f s: %.4f MR/m\n",
                r.reads, r.profile.unique_count, r.profile.multi_count, r.profile.unmapped_count, r.threshold,
                r.timings.wall_seconds, tp.mreads_per_minute);
  std::cerr << line;
  if (r.unencodable) std::cerr << r.unencodable << " read(s) had no valid window and count as unmapped\n";

  m.doc["config"] = config_json(db.config);
  m.doc["threshold"] = r.threshold;
  m.doc["threads"] = a.threads;
  m.doc["inputs"]["db"] = a.db;
  m.doc["inputs"]["reads"] = a.reads;
  if (!a.config.empty()) m.doc["inputs"]["config"] = a.config;
  m.doc["outputs"]["profile"] = a.out;
  if (!a.per_read.empty()) m.doc["outputs"]["per_read"] = a.per_read;
  if (store_path) m.doc["outputs"]["queries"] = store_path->string();
  m.doc["counts"] = {{"reads", r.reads},
                     {"bases", r.bases},
                     {"unique", r.profile.unique_count},
                     {"multi", r.profile.multi_count},
                     {"unmapped", r.profile.unmapped_count},
                     {"unencodable", r.unencodable},
                     {"uniform_fallback", r.profile.uniform_fallback_count}};
  m.doc["throughput_mreads_per_minute"] = tp.mreads_per_minute;
  m.doc["timings_seconds"]["load"] = load_seconds;
  m.doc["timings_seconds"]["encode"] = r.timings.encode_seconds;
  m.doc["timings_seconds"]["classify"] = r.timings.classify_seconds;
  m.doc["timings_seconds"]["estimate"] = r.timings.estimate_seconds;
  m.doc["timings_seconds"]["stream_wall"] = r.timings.wall_seconds;
  m.doc["timings_seconds"]["total"] = seconds_since(t0);
  m.write();
  return 0;
}

// ---- eval -----------------------------------------------------------------

struct EvalArgs {
  std::string profile;
  std::string truth;
  std::string out = "-";
  std::string manifest;
  double epsilon = kDefaultPresenceEpsilon;
};

int cmd_eval(const EvalArgs& a) {
  const auto t0 = Clock::now();
  Manifest m("eval");
  m.path = manifest_for(a.out, a.manifest);
  std::ifstream pin(a.profile);
  if (!pin) throw IoError("cannot read " + a.profile);
  const AbundanceProfile profile = read_profile_tsv(pin, a.profile);
  std::ifstream tin(a.truth);
  if (!tin) throw IoError("cannot read " + a.truth);
  const TruthProfile truth = read_truth_tsv(tin, a.truth);
  const EvalReport report = evaluate(profile, truth, a.epsilon);

  Output out(a.out);
  write_eval_tsv(out.stream(), report);
  out.close();
  std::cerr << "precision " << report.precision << ", recall " << report.recall;
  if (report.l1_error) std::cerr << ", L1 " << *report.l1_error;
  std::cerr << '\n';

  m.doc["epsilon"] = a.epsilon;
  m.doc["inputs"]["profile"] = a.profile;
  m.doc["inputs"]["truth"] = a.truth;
  m.doc["outputs"]["report"] = a.out;
  m.doc["threads"] = 1;
  m.doc["timings_seconds"]["total"] = seconds_since(t0);
  m.write();
  return 0;
}

// ---- cost -----------------------------------------------------------------

struct CostArgs {
  std::string db;
  std::string params;
  std::string out = "-";
  std::string manifest;
  std::size_t read_length = 150;
  std::optional<std::size_t> prototypes;
  std::optional<std::size_t> dimension;
  std::optional<std::size_t> ngram;
};

int cmd_cost(const CostArgs& a) {
  const auto t0 = Clock::now();
  Manifest m("cost");
  m.path = manifest_for(a.out, a.manifest);
  HDSpaceConfig config = default_config();
  std::size_t prototypes = 0;
  if (!a.db.empty()) {
    const HDRefDB db = load_refdb(a.db);
    config = db.config;
    prototypes = db.records.size();
  }
  if (a.prototypes) prototypes = *a.prototypes;
  if (a.dimension) config.dimension = *a.dimension;
  if (a.ngram) config.ngram_size = *a.ngram;
  if (prototypes == 0) throw ConfigFormatError("cost: need --db or --prototypes with at least one prototype");
  const CostParams params = a.params.empty() ? CostParams{} : load_cost_params(a.params);

  const CostReport report = cost_report(config.dimension, config.ngram_size, config.bundling_cap,
                                        config.alphabet.size(), prototypes, a.read_length, params);
  Output out(a.out);
  write_cost_tsv(out.stream(), report);
  out.close();
  write_cost_summary(std::cerr, report);

  m.doc["config"] = config_json(config);
  m.doc["read_length"] = a.read_length;
  m.doc["prototypes"] = prototypes;
  if (!a.db.empty()) m.doc["inputs"]["db"] = a.db;
  if (!a.params.empty()) m.doc["inputs"]["params"] = a.params;
  m.doc["outputs"]["report"] = a.out;
  m.doc["threads"] = 1;
  m.doc["timings_seconds"]["total"] = seconds_since(t0);
  m.write();
  return 0;
}

// ---- inspect --------------------------------------------------------------

struct InspectArgs {
  std::string db;
  std::string out = "-";
  std::string manifest;
};

int cmd_inspect(const InspectArgs& a) {
  const auto t0 = Clock::now();
  Manifest m("inspect");
  m.path = manifest_for(a.out, a.manifest);
  const HDRefDB db = load_refdb(a.db);
  const Footprint fp = footprint(db);

  Output out(a.out);
  auto& os = out.stream();
  os << "# config\n" << config_to_text(db.config);
  os << "# build\ntimestamp\t" << db.build.timestamp << "\ntool_version\t" << db.build.tool_version << '\n';
  os << "# footprint\nheader_bytes\t" << fp.header_bytes << "\npayload_bytes\t" << fp.payload_bytes
     << "\ntotal_bytes\t" << fp.total_bytes() << '\n';
  os << "# records\nindex\ttaxon_id\tname\tsegment\tgenome_length\tdensity\n";
  char buf[32];
  for (std::size_t i = 0; i < db.records.size(); ++i) {
    const auto& r = db.records[i];
    std::snprintf(buf, sizeof buf, "%.6f",
                  static_cast<double>(r.vector.popcount()) / static_cast<double>(r.vector.dimension()));
    os << i << '\t' << r.taxon_id << '\t' << r.name << '\t' << r.segment << '\t' << r.genome_length << '\t' << buf
       << '\n';
  }
  out.close();

  m.doc["config"] = config_json(db.config);
  m.doc["inputs"]["db"] = a.db;
  m.doc["outputs"]["report"] = a.out;
  m.doc["threads"] = 1;
  m.doc["timings_seconds"]["total"] = seconds_since(t0);
  m.write();
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"hdprof: hyperdimensional metagenomic profiler"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(kToolVersion));

  ConfigArgs config_args;
  auto* config_cmd = app.add_subcommand("config", "Write an HD space configuration file");
  config_cmd->add_option("--out", config_args.out, "Output path ('-' for stdout)")->required();
  config_cmd->add_option("--dimension", config_args.dimension, "Vector dimension D")->capture_default_str();
  config_cmd->add_option("--ngram", config_args.ngram, "N-gram size N")->capture_default_str();
  config_cmd->add_option("--density", config_args.density, "Fraction of ones in atomic vectors")->capture_default_str();
  config_cmd->add_option("--seed", config_args.seed, "Item memory seed")->capture_default_str();
  auto* z_opt = config_cmd->add_option("--z", config_args.z, "Threshold as z standard deviations above 0.5 (default 6)");
  config_cmd->add_option("--threshold", config_args.threshold, "Explicit similarity threshold")->excludes(z_opt);
  config_cmd->add_option("--bundling-cap", config_args.cap, "Maximum windows bundled per vector");
  config_cmd->add_flag("--reverse-complement", config_args.revcomp, "Also bundle reverse-complement windows");

  BuildArgs build_args;
  auto* build_cmd = app.add_subcommand("build", "Build a reference database");
  build_cmd->add_option("--refs", build_args.refs, "TSV: taxon_id, name, fasta_path")->required();
  build_cmd->add_option("--config", build_args.config, "Config file (defaults when omitted)");
  build_cmd->add_option("--out", build_args.out, "Database path")->required();
  build_cmd->add_option("--segment-size", build_args.segment_size, "Bases per prototype slice");
  build_cmd->add_option("--threads", build_args.threads, "Worker threads")->capture_default_str();
  build_cmd->add_option("--manifest", build_args.manifest, "Run manifest path (default <out>.manifest.json)");

  ProfileArgs profile_args;
  auto* profile_cmd = app.add_subcommand("profile", "Profile a read sample against a database");
  profile_cmd->add_option("--db", profile_args.db, "Database path")->required();
  profile_cmd->add_option("--reads", profile_args.reads, "FASTA/FASTQ, optionally gzip; '-' for stdin")->required();
  profile_cmd->add_option("--out", profile_args.out, "Abundance TSV ('-' for stdout)")->required();
  profile_cmd->add_option("--config", profile_args.config, "Config the database must match");
  profile_cmd->add_option("--threshold", profile_args.threshold, "Override the similarity threshold");
  profile_cmd->add_option("--per-read", profile_args.per_read, "Per-read classification TSV");
  profile_cmd->add_option("--save-queries", profile_args.save_queries, "Directory for the query vector store");
  profile_cmd->add_option("--format", profile_args.format, "auto, fasta or fastq")->capture_default_str();
  profile_cmd->add_option("--threads", profile_args.threads, "Worker threads")->capture_default_str();
  profile_cmd->add_option("--batch-size", profile_args.batch_size, "Reads per work batch")->capture_default_str();
  profile_cmd->add_option("--manifest", profile_args.manifest, "Run manifest path (default <out>.manifest.json)");

  EvalArgs eval_args;
  auto* eval_cmd = app.add_subcommand("eval", "Evaluate a profile against a truth set");
  eval_cmd->add_option("--profile", eval_args.profile, "Profile TSV")->required();
  eval_cmd->add_option("--truth", eval_args.truth, "Truth TSV: taxon[, fraction]")->required();
  eval_cmd->add_option("--epsilon", eval_args.epsilon, "Presence threshold on abundance")->capture_default_str();
  eval_cmd->add_option("--out", eval_args.out, "Report path ('-' for stdout)")->capture_default_str();
  eval_cmd->add_option("--manifest", eval_args.manifest, "Run manifest path");

  CostArgs cost_args;
  auto* cost_cmd = app.add_subcommand("cost", "Estimate accelerator latency, energy and area");
  cost_cmd->add_option("--db", cost_args.db, "Database providing D, N and prototype count");
  cost_cmd->add_option("--read-length", cost_args.read_length, "Read length L")->capture_default_str();
  cost_cmd->add_option("--params", cost_args.params, "Cost parameter overrides (key = value)");
  cost_cmd->add_option("--prototypes", cost_args.prototypes, "Override the prototype count");
  cost_cmd->add_option("--dimension", cost_args.dimension, "Override D");
  cost_cmd->add_option("--ngram", cost_args.ngram, "Override N");
  cost_cmd->add_option("--out", cost_args.out, "Report path ('-' for stdout)")->capture_default_str();
  cost_cmd->add_option("--manifest", cost_args.manifest, "Run manifest path");

  InspectArgs inspect_args;
  auto* inspect_cmd = app.add_subcommand("inspect", "Show a database's config, records and footprint");
  inspect_cmd->add_option("--db", inspect_args.db, "Database path")->required();
  inspect_cmd->add_option("--out", inspect_args.out, "Report path ('-' for stdout)")->capture_default_str();
  inspect_cmd->add_option("--manifest", inspect_args.manifest, "Run manifest path");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  try {
    if (*config_cmd) return cmd_config(config_args);
    if (*build_cmd) return cmd_build(build_args);
    if (*profile_cmd) return cmd_profile(profile_args);
    if (*eval_cmd) return cmd_eval(eval_args);
    if (*cost_cmd) return cmd_cost(cost_args);
    if (*inspect_cmd) return cmd_inspect(inspect_args);
  } catch (const Error& e) {
    std::cerr << "hdprof: " << e.kind() << ": " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "hdprof: error: " << e.what() << '\n';
    return 1;
  }
  return 2;
}
