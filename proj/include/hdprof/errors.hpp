#pragma once

// Exception types thrown across the library. Every error derives from
// hdprof::Error so callers can catch the whole family at the CLI boundary.

#include <cstddef>
#include <stdexcept>
#include <string>

namespace hdprof {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
  // Short stable name used in CLI diagnostics.
  [[nodiscard]] virtual const char* kind() const noexcept { return "Error"; }
};

#define HDPROF_DEFINE_ERROR(Name)                                        \
  class Name : public Error {                                            \
   public:                                                               \
    using Error::Error;                                                  \
    [[nodiscard]] const char* kind() const noexcept override { return #Name; } \
  };

HDPROF_DEFINE_ERROR(DimensionError)
HDPROF_DEFINE_ERROR(EmptyBundleError)
HDPROF_DEFINE_ERROR(ConfigFormatError)
HDPROF_DEFINE_ERROR(AmbiguousSymbol)
HDPROF_DEFINE_ERROR(WindowError)
HDPROF_DEFINE_ERROR(TooShortError)
HDPROF_DEFINE_ERROR(EmptyReferenceError)
HDPROF_DEFINE_ERROR(DuplicateTaxonError)
HDPROF_DEFINE_ERROR(DbFormatError)
HDPROF_DEFINE_ERROR(ConfigMismatchError)
HDPROF_DEFINE_ERROR(InternalConsistencyError)
HDPROF_DEFINE_ERROR(IoError)
HDPROF_DEFINE_ERROR(TaxonMappingError)

#undef HDPROF_DEFINE_ERROR

// Malformed input record. Carries the 1-based line number where parsing failed.
class ParseError : public Error {
 public:
  ParseError(const std::string& what, std::size_t line)
      : Error(what + " (line " + std::to_string(line) + ")"), line_(line) {}
  [[nodiscard]] const char* kind() const noexcept override { return "ParseError"; }
  [[nodiscard]] std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

}  // namespace hdprof
