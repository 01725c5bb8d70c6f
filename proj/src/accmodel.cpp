#include "hdprof/accmodel.hpp"

#include <algorithm>
#include <bit>
#include <cstdio>
#include <fstream>
#include <functional>
#include <map>
#include <ostream>
#include <sstream>

#include "hdprof/errors.hpp"

namespace hdprof {

namespace {

std::size_t ceil_div(std::size_t a, std::size_t b) { return (a + b - 1) / b; }

std::string trim(const std::string& s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

std::string fmt(const char* pattern, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, pattern, v);
  return buf;
}

}  // namespace

void CostParams::validate() const {
  const auto positive = [](double v, const char* name) {
    if (!(v > 0.0)) throw ConfigFormatError(std::string("cost params: ") + name + " must be positive");
  };
  positive(static_cast<double>(array_rows), "array_rows");
  positive(static_cast<double>(array_cols), "array_cols");
  positive(read_latency_ns, "read_latency_ns");
  positive(write_latency_ns, "write_latency_ns");
  positive(adc_latency_ns, "adc_latency_ns");
  positive(adc_energy_pj, "adc_energy_pj");
  positive(static_cast<double>(adc_resolution_bits), "adc_resolution_bits");
  positive(cell_area_f2, "cell_area_f2");
  positive(im_area_mm2, "im_area_mm2");
  positive(encoder_area_mm2, "encoder_area_mm2");
  positive(am_area_mm2, "am_area_mm2");
  positive(similarity_area_mm2, "similarity_area_mm2");
  positive(im_energy_nj, "im_energy_nj");
  positive(encoder_energy_nj, "encoder_energy_nj");
  positive(am_energy_nj, "am_energy_nj");
  positive(similarity_energy_nj, "similarity_energy_nj");
  positive(die_area_mm2, "die_area_mm2");
  positive(static_cast<double>(reference_read_length), "reference_read_length");
  positive(static_cast<double>(reference_ngram_size), "reference_ngram_size");
  positive(static_cast<double>(reference_prototypes), "reference_prototypes");
  positive(static_cast<double>(reference_dimension), "reference_dimension");
  if (reference_read_length < reference_ngram_size) {
    throw ConfigFormatError("cost params: reference_read_length must be >= reference_ngram_size");
  }
  if (array_cols < 2) throw ConfigFormatError("cost params: array_cols must be >= 2");
  if (im_chunk_bits && (!std::has_single_bit(*im_chunk_bits) || *im_chunk_bits >= array_cols)) {
    throw ConfigFormatError("cost params: im_chunk_bits must be a power of two below array_cols");
  }
}

CostParams cost_params_from_text(const std::string& text) {
  CostParams p;
  std::map<std::string, std::function<void(const std::string&)>> setters;
  auto num = [](const std::string& key, const std::string& v) {
    try {
      std::size_t used = 0;
      const double d = std::stod(v, &used);
      if (used != v.size()) throw std::invalid_argument("trailing");
      return d;
    } catch (const std::exception&) {
      throw ConfigFormatError("cost params: '" + key + "' is not a number: '" + v + "'");
    }
  };
  auto bind_double = [&](const char* key, double& field) {
    setters[key] = [&field, key, num](const std::string& v) { field = num(key, v); };
  };
  auto bind_size = [&](const char* key, std::size_t& field) {
    setters[key] = [&field, key, num](const std::string& v) {
      const double d = num(key, v);
      if (d < 0 || d != static_cast<double>(static_cast<std::size_t>(d))) {
        throw ConfigFormatError(std::string("cost params: '") + key + "' must be a non-negative integer");
      }
      field = static_cast<std::size_t>(d);
    };
  };
  bind_size("array_rows", p.array_rows);
  bind_size("array_cols", p.array_cols);
  bind_double("read_latency_ns", p.read_latency_ns);
  bind_double("write_latency_ns", p.write_latency_ns);
  bind_double("adc_latency_ns", p.adc_latency_ns);
  bind_double("adc_energy_pj", p.adc_energy_pj);
  setters["adc_resolution_bits"] = [&](const std::string& v) {
    p.adc_resolution_bits = static_cast<unsigned>(num("adc_resolution_bits", v));
  };
  bind_double("cell_area_f2", p.cell_area_f2);
  bind_double("im_area_mm2", p.im_area_mm2);
  bind_double("encoder_area_mm2", p.encoder_area_mm2);
  bind_double("am_area_mm2", p.am_area_mm2);
  bind_double("similarity_area_mm2", p.similarity_area_mm2);
  bind_double("im_energy_nj", p.im_energy_nj);
  bind_double("encoder_energy_nj", p.encoder_energy_nj);
  bind_double("am_energy_nj", p.am_energy_nj);
  bind_double("similarity_energy_nj", p.similarity_energy_nj);
  bind_double("die_area_mm2", p.die_area_mm2);
  setters["im_chunk_bits"] = [&](const std::string& v) {
    p.im_chunk_bits = static_cast<std::size_t>(num("im_chunk_bits", v));
  };
  bind_size("reference_read_length", p.reference_read_length);
  bind_size("reference_ngram_size", p.reference_ngram_size);
  bind_size("reference_prototypes", p.reference_prototypes);
  bind_size("reference_dimension", p.reference_dimension);

  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    const std::string t = trim(line);
    if (t.empty() || t.front() == '#') continue;
    const auto eq = t.find('=');
    if (eq == std::string::npos) throw ConfigFormatError("cost params: expected 'key = value', got '" + t + "'");
    const std::string key = trim(t.substr(0, eq));
    const auto it = setters.find(key);
    if (it == setters.end()) throw ConfigFormatError("cost params: unknown key '" + key + "'");
    it->second(trim(t.substr(eq + 1)));
  }
  p.validate();
  return p;
}

CostParams load_cost_params(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read cost params " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return cost_params_from_text(buf.str());
}

LayoutPlan plan_layout(std::size_t dimension, std::size_t num_prototypes, const CostParams& params) {
  params.validate();
  if (dimension == 0) throw DimensionError("plan_layout: dimension must be positive");
  LayoutPlan plan;
  // Largest power of two strictly below the column count.
  plan.chunk_bits = params.im_chunk_bits.value_or(std::bit_floor(params.array_cols - 1));
  plan.chunks_per_vector = ceil_div(dimension, plan.chunk_bits);
  plan.im_arrays = plan.chunks_per_vector;
  plan.am_chunk_bits = params.array_rows;
  plan.am_vertical_chunks = ceil_div(dimension, params.array_rows);
  plan.am_columns = num_prototypes * plan.am_vertical_chunks;
  plan.am_array_pairs = ceil_div(plan.am_columns, params.array_cols);
  return plan;
}

EncodeCost encode_cost(std::size_t read_length, std::size_t ngram_size, std::optional<std::uint64_t> bundling_cap,
                       const CostParams& params) {
  params.validate();
  if (ngram_size == 0) throw TooShortError("encode_cost: n-gram size must be positive");
  if (read_length < ngram_size) {
    throw TooShortError("encode_cost: read length " + std::to_string(read_length) + " is below N = " +
                        std::to_string(ngram_size));
  }
  EncodeCost c;
  c.ngrams = read_length - ngram_size + 1;
  if (bundling_cap) c.ngrams = std::min<std::uint64_t>(c.ngrams, *bundling_cap);
  c.row_reads = c.ngrams * ngram_size;
  c.latency_ns = static_cast<double>(c.row_reads) * params.read_latency_ns;

  const double reference_reads = static_cast<double>(
      (params.reference_read_length - params.reference_ngram_size + 1) * params.reference_ngram_size);
  const double scale = static_cast<double>(c.row_reads) / reference_reads;
  c.im_energy_nj = params.im_energy_nj * scale;
  c.encoder_energy_nj = params.encoder_energy_nj * scale;
  c.energy_nj = c.im_energy_nj + c.encoder_energy_nj;

  std::ostringstream f;
  f << "latency = ngrams(" << c.ngrams << ") * N(" << ngram_size << ") * read_latency(" << params.read_latency_ns
    << " ns); energy = (im + encoder unit energy) * row_reads(" << c.row_reads << ") / reference_row_reads("
    << reference_reads << ")";
  c.formula = f.str();
  return c;
}

ClassifyCost classify_cost(std::size_t num_prototypes, std::size_t dimension, const CostParams& params) {
  params.validate();
  if (num_prototypes == 0 || dimension == 0) throw DimensionError("classify_cost: arguments must be positive");
  ClassifyCost c;
  const std::size_t chunks = ceil_div(dimension, params.array_rows);
  c.samples = static_cast<std::uint64_t>(num_prototypes) * chunks;
  c.latency_ns = static_cast<double>(c.samples) * params.adc_latency_ns;
  c.adc_energy_nj = 2.0 * static_cast<double>(c.samples) * params.adc_energy_pj * 1e-3;
  const double reference_samples =
      static_cast<double>(params.reference_prototypes * ceil_div(params.reference_dimension, params.array_rows));
  c.similarity_energy_nj = params.similarity_energy_nj * static_cast<double>(c.samples) / reference_samples;
  c.energy_nj = c.adc_energy_nj + c.similarity_energy_nj;

  std::ostringstream f;
  f << "samples = prototypes(" << num_prototypes << ") * ceil(D / rows)(" << chunks
    << "); latency = samples * adc_latency(" << params.adc_latency_ns
    << " ns); energy = 2 * samples * adc_energy(" << params.adc_energy_pj
    << " pJ) + similarity unit energy * samples / reference_samples(" << reference_samples << ")";
  c.formula = f.str();
  return c;
}

WriteCost write_cost(const LayoutPlan& plan, std::size_t alphabet_size, std::size_t num_prototypes,
                     const CostParams& params) {
  WriteCost w;
  w.im_row_writes = static_cast<std::uint64_t>(alphabet_size) * plan.chunks_per_vector;
  w.am_column_writes = 2ULL * num_prototypes * plan.am_vertical_chunks;
  w.latency_ns = static_cast<double>(w.im_row_writes + w.am_column_writes) * params.write_latency_ns;
  return w;
}

AreaReport area_report(const LayoutPlan& /*plan*/, const CostParams& params) {
  AreaReport r;
  r.units = {
      {"IM", params.im_area_mm2, 0.0, params.im_energy_nj, 0.0},
      {"Encoder", params.encoder_area_mm2, 0.0, params.encoder_energy_nj, 0.0},
      {"AM", params.am_area_mm2, 0.0, params.am_energy_nj, 0.0},
      {"Similarity", params.similarity_area_mm2, 0.0, params.similarity_energy_nj, 0.0},
  };
  for (const auto& u : r.units) {
    r.total_area_mm2 += u.area_mm2;
    r.total_energy_nj += u.energy_nj;
  }
  for (auto& u : r.units) {
    u.area_percent = r.total_area_mm2 > 0.0 ? 100.0 * u.area_mm2 / r.total_area_mm2 : 0.0;
    u.energy_percent = r.total_energy_nj > 0.0 ? 100.0 * u.energy_nj / r.total_energy_nj : 0.0;
  }
  r.die_area_mm2 = params.die_area_mm2;
  return r;
}

CostReport cost_report(std::size_t dimension, std::size_t ngram_size, std::optional<std::uint64_t> bundling_cap,
                       std::size_t alphabet_size, std::size_t num_prototypes, std::size_t read_length,
                       const CostParams& params) {
  CostReport r;
  r.dimension = dimension;
  r.ngram_size = ngram_size;
  r.read_length = read_length;
  r.num_prototypes = num_prototypes;
  r.layout = plan_layout(dimension, num_prototypes, params);
  r.encode = encode_cost(read_length, ngram_size, bundling_cap, params);
  r.classify = classify_cost(num_prototypes, dimension, params);
  r.write = write_cost(r.layout, alphabet_size, num_prototypes, params);
  r.area = area_report(r.layout, params);
  r.pipelined_ns_per_read = std::max(r.encode.latency_ns, r.classify.latency_ns);
  r.mreads_per_minute = 60.0e9 / r.pipelined_ns_per_read / 1e6;
  r.energy_per_read_nj = r.encode.energy_nj + r.classify.energy_nj;
  r.bases_per_joule = static_cast<double>(read_length) / (r.energy_per_read_nj * 1e-9);
  return r;
}

void write_cost_tsv(std::ostream& out, const CostReport& r) {
  out << "quantity\tvalue\tunit\n";
  auto row = [&](const char* name, double v, const char* unit) { out << name << '\t' << fmt("%.6g", v) << '\t' << unit << '\n'; };
  auto count = [&](const char* name, std::uint64_t v, const char* unit) { out << name << '\t' << v << '\t' << unit << '\n'; };
  count("dimension", r.dimension, "bits");
  count("ngram_size", r.ngram_size, "symbols");
  count("read_length", r.read_length, "bases");
  count("prototypes", r.num_prototypes, "vectors");
  count("im_chunk_bits", r.layout.chunk_bits, "bits");
  count("im_chunks_per_vector", r.layout.chunks_per_vector, "chunks");
  count("im_arrays", r.layout.im_arrays, "arrays");
  count("am_chunk_bits", r.layout.am_chunk_bits, "bits");
  count("am_vertical_chunks", r.layout.am_vertical_chunks, "chunks");
  count("am_columns", r.layout.am_columns, "columns");
  count("am_array_pairs", r.layout.am_array_pairs, "pairs");
  count("encode_ngrams", r.encode.ngrams, "ngrams");
  count("encode_row_reads", r.encode.row_reads, "reads");
  row("encode_latency", r.encode.latency_ns, "ns");
  row("encode_energy", r.encode.energy_nj, "nJ");
  count("classify_samples", r.classify.samples, "samples");
  row("classify_latency", r.classify.latency_ns, "ns");
  row("classify_adc_energy", r.classify.adc_energy_nj, "nJ");
  row("classify_similarity_energy", r.classify.similarity_energy_nj, "nJ");
  row("classify_energy", r.classify.energy_nj, "nJ");
  count("write_im_rows", r.write.im_row_writes, "writes");
  count("write_am_columns", r.write.am_column_writes, "writes");
  row("write_latency", r.write.latency_ns, "ns");
  row("pipelined_time_per_read", r.pipelined_ns_per_read, "ns");
  row("throughput", r.mreads_per_minute, "MR/m");
  row("energy_per_read", r.energy_per_read_nj, "nJ");
  row("bases_per_joule", r.bases_per_joule, "bp/J");
  for (const auto& u : r.area.units) {
    out << "area_" << u.unit << '\t' << fmt("%.6g", u.area_mm2) << "\tmm2\n";
    out << "area_share_" << u.unit << '\t' << fmt("%.4f", u.area_percent) << "\t%\n";
  }
  row("area_total", r.area.total_area_mm2, "mm2");
  row("die_area", r.area.die_area_mm2, "mm2");
}

void write_cost_summary(std::ostream& out, const CostReport& r) {
  out << "accelerator cost estimate (D=" << r.dimension << ", N=" << r.ngram_size << ", L=" << r.read_length
      << ", prototypes=" << r.num_prototypes << ")\n";
  out << "  encode:   " << fmt("%.3f", r.encode.latency_ns / 1000.0) << " us/read, "
      << fmt("%.4g", r.encode.energy_nj) << " nJ\n    " << r.encode.formula << '\n';
  out << "  classify: " << fmt("%.3f", r.classify.latency_ns / 1000.0) << " us/query, "
      << fmt("%.4g", r.classify.energy_nj) << " nJ (ADC " << fmt("%.4g", r.classify.adc_energy_nj) << " nJ)\n    "
      << r.classify.formula << '\n';
  out << "  write:    " << fmt("%.3f", r.write.latency_ns / 1000.0) << " us one-time programming\n";
  out << "  pipelined throughput: " << fmt("%.3f", r.mreads_per_minute) << " MR/m, "
      << fmt("%.4g", r.bases_per_joule) << " bp/J\n";
  out << "  area: " << fmt("%.4f", r.area.total_area_mm2) << " mm2 over units (die figure "
      << fmt("%.2f", r.area.die_area_mm2) << " mm2 is reported separately)\n";
  for (const auto& u : r.area.units) {
    out << "    " << u.unit << ": " << fmt("%.4f", u.area_mm2) << " mm2 (" << fmt("%.1f", u.area_percent) << "%)\n";
  }
}

}  // namespace hdprof
