#pragma once

// Streaming FASTA/FASTQ reader. Plain and gzip-compressed files are read
// through zlib, which passes uncompressed input through unchanged.

#include <cstddef>
#include <iosfwd>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>

namespace hdprof {

struct SequenceRecord {
  std::string id;     // header up to the first whitespace
  std::string bases;  // uppercased, unknown symbols kept
};

enum class SeqFormat { automatic, fasta, fastq };

[[nodiscard]] SeqFormat parse_seq_format(const std::string& name);

class RecordStream {
 public:
  // `path` may be "-" for standard input. Throws IoError if unreadable.
  static RecordStream open(const std::string& path, SeqFormat format = SeqFormat::automatic);

  RecordStream(RecordStream&&) noexcept;
  RecordStream& operator=(RecordStream&&) noexcept;
  ~RecordStream();

  // Next record, or nullopt at end of input. Throws ParseError on malformed input.
  std::optional<SequenceRecord> next();

  // Resolved format; fasta for empty input.
  [[nodiscard]] SeqFormat format() const noexcept;
  [[nodiscard]] const std::string& source() const noexcept;

 private:
  struct Impl;
  explicit RecordStream(std::unique_ptr<Impl> impl);
  std::unique_ptr<Impl> impl_;
};

// Writes records as FASTA with bodies wrapped at `width` columns (0 = no wrap).
void write_fasta(std::ostream& out, std::span<const SequenceRecord> records, std::size_t width = 60);

}  // namespace hdprof
