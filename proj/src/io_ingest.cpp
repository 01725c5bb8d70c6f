#include "hdprof/io_ingest.hpp"

#include <zlib.h>

#include <algorithm>
#include <array>
#include <cctype>
#include <cstdio>
#include <ostream>
#include <unistd.h>

#include "hdprof/errors.hpp"

namespace hdprof {

namespace {

constexpr std::size_t kChunk = 1 << 16;

void upper_in_place(std::string& s) {
  for (char& ch : s) ch = static_cast<char>(std::toupper(static_cast<unsigned char>(ch)));
}

std::string header_id(const std::string& line) {
  const auto end = line.find_first_of(" \t", 1);
  return line.substr(1, end == std::string::npos ? std::string::npos : end - 1);
}

}  // namespace

SeqFormat parse_seq_format(const std::string& name) {
  if (name == "auto") return SeqFormat::automatic;
  if (name == "fasta") return SeqFormat::fasta;
  if (name == "fastq") return SeqFormat::fastq;
  throw IoError("unknown sequence format '" + name + "' (expected auto, fasta or fastq)");
}

struct RecordStream::Impl {
  gzFile file = nullptr;
  std::string path;
  SeqFormat format = SeqFormat::automatic;
  std::array<char, kChunk> buffer{};
  std::size_t pos = 0;
  std::size_t len = 0;
  bool eof = false;
  std::size_t line_no = 0;
  std::optional<std::string> pending;  // FASTA header read ahead of its record

  ~Impl() {
    if (file != nullptr) gzclose(file);
  }

  bool fill() {
    if (eof) return false;
    const int got = gzread(file, buffer.data(), static_cast<unsigned>(buffer.size()));
    if (got < 0) {
      int errnum = 0;
      const char* msg = gzerror(file, &errnum);
      throw IoError("read error in " + path + ": " + (msg ? msg : "unknown"));
    }
    if (got == 0) {
      eof = true;
      return false;
    }
    pos = 0;
    len = static_cast<std::size_t>(got);
    return true;
  }

  int peek() {
    if (pos == len && !fill()) return EOF;
    return static_cast<unsigned char>(buffer[pos]);
  }

  // Reads one line without its terminator; false at end of input.
  bool getline(std::string& line) {
    line.clear();
    bool any = false;
    while (true) {
      if (pos == len && !fill()) break;
      any = true;
      const char* begin = buffer.data() + pos;
      const char* end = buffer.data() + len;
      const char* nl = std::find(begin, end, '\n');
      line.append(begin, nl);
      pos = static_cast<std::size_t>(nl - buffer.data());
      if (nl != end) {
        ++pos;
        break;
      }
    }
    if (!any) return false;
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    return true;
  }

  void detect() {
    if (format != SeqFormat::automatic) return;
    while (true) {
      const int c = peek();
      if (c == EOF) {
        format = SeqFormat::fasta;
        return;
      }
      if (c == '>') {
        format = SeqFormat::fasta;
        return;
      }
      if (c == '@') {
        format = SeqFormat::fastq;
        return;
      }
      if (std::isspace(c) == 0) {
        throw ParseError(path + ": cannot detect format, first byte is neither '>' nor '@'", line_no + 1);
      }
      // Skip leading whitespace; count newlines so line numbers stay right.
      if (c == '\n') ++line_no;
      ++pos;
    }
  }

  std::optional<SequenceRecord> next_fasta() {
    std::string header;
    if (pending) {
      header = std::move(*pending);
      pending.reset();
    } else {
      std::string line;
      while (true) {
        if (!getline(line)) return std::nullopt;
        if (!line.empty()) break;
      }
      header = std::move(line);
    }
    if (header.front() != '>') throw ParseError(path + ": expected FASTA header starting with '>'", line_no);
    const std::size_t header_line = line_no;
    SequenceRecord rec{header_id(header), {}};
    if (rec.id.empty()) throw ParseError(path + ": empty record id", header_line);

    std::string line;
    while (getline(line)) {
      if (!line.empty() && line.front() == '>') {
        pending = std::move(line);
        break;
      }
      line.erase(std::remove_if(line.begin(), line.end(),
                                [](unsigned char ch) { return std::isspace(ch) != 0; }),
                 line.end());
      rec.bases += line;
    }
    upper_in_place(rec.bases);
    return rec;
  }

  std::optional<SequenceRecord> next_fastq() {
    std::string header;
    while (true) {
      if (!getline(header)) return std::nullopt;
      if (!header.empty()) break;
    }
    if (header.front() != '@') throw ParseError(path + ": expected FASTQ header starting with '@'", line_no);
    SequenceRecord rec{header_id(header), {}};
    if (rec.id.empty()) throw ParseError(path + ": empty record id", line_no);
    if (!getline(rec.bases)) throw ParseError(path + ": truncated FASTQ record '" + rec.id + "'", line_no);
    std::string plus;
    if (!getline(plus) || plus.empty() || plus.front() != '+') {
      throw ParseError(path + ": expected '+' separator in FASTQ record '" + rec.id + "'", line_no);
    }
    std::string qual;
    if (!getline(qual)) throw ParseError(path + ": missing quality line for '" + rec.id + "'", line_no);
    if (qual.size() != rec.bases.size()) {
      throw ParseError(path + ": sequence and quality lengths differ for '" + rec.id + "' (" +
                           std::to_string(rec.bases.size()) + " vs " + std::to_string(qual.size()) + ")",
                       line_no);
    }
    upper_in_place(rec.bases);
    return rec;
  }
};

RecordStream::RecordStream(std::unique_ptr<Impl> impl) : impl_(std::move(impl)) {}
RecordStream::RecordStream(RecordStream&&) noexcept = default;
RecordStream& RecordStream::operator=(RecordStream&&) noexcept = default;
RecordStream::~RecordStream() = default;

RecordStream RecordStream::open(const std::string& path, SeqFormat format) {
  auto impl = std::make_unique<Impl>();
  impl->path = path == "-" ? std::string("<stdin>") : path;
  impl->format = format;
  if (path == "-") {
    const int fd = ::dup(STDIN_FILENO);
    impl->file = fd < 0 ? nullptr : gzdopen(fd, "rb");
  } else {
    impl->file = gzopen(path.c_str(), "rb");
  }
  if (impl->file == nullptr) throw IoError("cannot open " + impl->path);
  gzbuffer(impl->file, kChunk);
  impl->detect();
  return RecordStream(std::move(impl));
}

std::optional<SequenceRecord> RecordStream::next() {
  return impl_->format == SeqFormat::fastq ? impl_->next_fastq() : impl_->next_fasta();
}

SeqFormat RecordStream::format() const noexcept { return impl_->format; }
const std::string& RecordStream::source() const noexcept { return impl_->path; }

void write_fasta(std::ostream& out, std::span<const SequenceRecord> records, std::size_t width) {
  for (const auto& rec : records) {
    out << '>' << rec.id << '\n';
    if (width == 0) {
      out << rec.bases << '\n';
      continue;
    }
    for (std::size_t i = 0; i < rec.bases.size(); i += width) {
      out << std::string_view(rec.bases).substr(i, width) << '\n';
    }
  }
}

}  // namespace hdprof
