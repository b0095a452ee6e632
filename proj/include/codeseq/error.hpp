#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <utility>

namespace codeseq {

// Base of every error raised by the library. kind() is a stable short name
// used by the CLI's machine-parseable error line.
class Error : public std::runtime_error {
 public:
  Error(std::string kind, const std::string& message)
      : std::runtime_error(message), kind_(std::move(kind)) {}

  const std::string& kind() const noexcept { return kind_; }

 private:
  std::string kind_;
};

#define CODESEQ_DEFINE_ERROR(Name)                                       \
  class Name : public Error {                                            \
   public:                                                               \
    explicit Name(const std::string& message) : Error(#Name, message) {} \
  };

CODESEQ_DEFINE_ERROR(IoError)
CODESEQ_DEFINE_ERROR(ArgumentError)
CODESEQ_DEFINE_ERROR(ConfigError)
CODESEQ_DEFINE_ERROR(StructureError)
CODESEQ_DEFINE_ERROR(TrainError)
CODESEQ_DEFINE_ERROR(DecodeError)
CODESEQ_DEFINE_ERROR(InputError)
CODESEQ_DEFINE_ERROR(CapError)
CODESEQ_DEFINE_ERROR(LengthError)
CODESEQ_DEFINE_ERROR(MathError)
CODESEQ_DEFINE_ERROR(MiningError)
CODESEQ_DEFINE_ERROR(MetricError)
CODESEQ_DEFINE_ERROR(CompatError)

#undef CODESEQ_DEFINE_ERROR

// Errors tied to a byte offset in a source text.
class PositionedError : public Error {
 public:
  PositionedError(std::string kind, const std::string& message, std::size_t offset,
                  int line, int column)
      : Error(std::move(kind), message + " at " + std::to_string(line) + ":" +
                                   std::to_string(column)),
        offset_(offset),
        line_(line),
        column_(column) {}

  std::size_t offset() const noexcept { return offset_; }
  int line() const noexcept { return line_; }
  int column() const noexcept { return column_; }

 private:
  std::size_t offset_;
  int line_;
  int column_;
};

class LexError : public PositionedError {
 public:
  LexError(const std::string& message, std::size_t offset, int line, int column)
      : PositionedError("LexError", message, offset, line, column) {}
};

class ParseError : public PositionedError {
 public:
  ParseError(const std::string& message, std::size_t offset, int line, int column)
      : PositionedError("ParseError", message, offset, line, column) {}
};

}  // namespace codeseq
