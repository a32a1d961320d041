#include "trafficdist/errors.hpp"

namespace trafficdist {

Error::Error(std::string kind, const std::string& message)
    : std::runtime_error(kind + ": " + message), kind_(std::move(kind)) {}

FormatError::FormatError(const std::string& message, std::size_t line)
    : Error("FormatError",
            line > 0 ? "line " + std::to_string(line) + ": " + message : message),
      line_(line) {}

}  // namespace trafficdist
