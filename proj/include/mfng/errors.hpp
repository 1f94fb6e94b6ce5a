#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace mfng {

enum class Errc {
  NonSymmetric,
  OutOfRangeProbability,
  BadLengths,
  DepthOverflow,
  Domain,
  TooLargeT,
  ExactModeTooLarge,
  TooLargePattern,
  TooLarge,
  AllZeroMeasure,
  Stalled,
  UnsupportedM,
  DegenerateDiagonal,
  ZeroWedges,
  ZeroTargetFeature,
  Overflow,
  Parse,
  Schema,
  Validation,
  Io,
};

inline const char* errc_name(Errc e) {
  switch (e) {
    case Errc::NonSymmetric: return "NonSymmetric";
    case Errc::OutOfRangeProbability: return "OutOfRangeProbability";
    case Errc::BadLengths: return "BadLengths";
    case Errc::DepthOverflow: return "DepthOverflow";
    case Errc::Domain: return "DomainError";
    case Errc::TooLargeT: return "TooLargeT";
    case Errc::ExactModeTooLarge: return "ExactModeTooLarge";
    case Errc::TooLargePattern: return "TooLargePattern";
    case Errc::TooLarge: return "TooLarge";
    case Errc::AllZeroMeasure: return "AllZeroMeasure";
    case Errc::Stalled: return "Stalled";
    case Errc::UnsupportedM: return "UnsupportedM";
    case Errc::DegenerateDiagonal: return "DegenerateDiagonal";
    case Errc::ZeroWedges: return "ZeroWedges";
    case Errc::ZeroTargetFeature: return "ZeroTargetFeature";
    case Errc::Overflow: return "Overflow";
    case Errc::Parse: return "ParseError";
    case Errc::Schema: return "SchemaError";
    case Errc::Validation: return "ValidationError";
    case Errc::Io: return "IoError";
  }
  return "Unknown";
}

/// Every library failure is reported as an Error carrying a machine-readable kind.
class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& what)
      : std::runtime_error(std::string(errc_name(code)) + ": " + what), code_(code) {}

  Errc code() const noexcept { return code_; }

 private:
  Errc code_;
};

/// Malformed input line; `line()` is 1-based.
class ParseError : public Error {
 public:
  ParseError(std::size_t line, const std::string& what)
      : Error(Errc::Parse, "line " + std::to_string(line) + ": " + what), line_(line) {}

  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

}  // namespace mfng
