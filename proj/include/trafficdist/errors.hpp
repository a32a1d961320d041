#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace trafficdist {

// Every failure raised by the library derives from Error and carries a stable
// kind name, used by the CLI summaries and exit-code mapping.
class Error : public std::runtime_error {
 public:
  Error(std::string kind, const std::string& message);

  const std::string& kind() const noexcept { return kind_; }

 private:
  std::string kind_;
};

#define TRAFFICDIST_ERROR(Name)                                        \
  class Name : public Error {                                          \
   public:                                                             \
    explicit Name(const std::string& message) : Error(#Name, message) {} \
  }

TRAFFICDIST_ERROR(EmptyText);
TRAFFICDIST_ERROR(SpanError);
TRAFFICDIST_ERROR(DimensionError);
TRAFFICDIST_ERROR(ValueError);
TRAFFICDIST_ERROR(MissingEmbedding);
TRAFFICDIST_ERROR(ShapeError);
TRAFFICDIST_ERROR(DegenerateVector);
TRAFFICDIST_ERROR(NotApplicable);
TRAFFICDIST_ERROR(MissingDistractors);
TRAFFICDIST_ERROR(AnnotationRequired);
TRAFFICDIST_ERROR(UsageError);

#undef TRAFFICDIST_ERROR

// Malformed input data. line is 1-based; 0 when the position is a byte offset
// or unknown.
class FormatError : public Error {
 public:
  FormatError(const std::string& message, std::size_t line = 0);

  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

}  // namespace trafficdist
