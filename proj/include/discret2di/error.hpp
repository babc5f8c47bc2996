#pragma once

#include <stdexcept>
#include <string>

namespace d2d {

enum class ErrorKind {
  kInvalidArgument,
  kIo,
  kParse,
  kSchema,
  kNumeric,
  kMissingMapping,
};

// Every failure surfaced by the library. The CLI prints `what()` on a single
// line prefixed by the kind name.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(message), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

inline const char* to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::kInvalidArgument: return "invalid_argument";
    case ErrorKind::kIo: return "io";
    case ErrorKind::kParse: return "parse";
    case ErrorKind::kSchema: return "schema";
    case ErrorKind::kNumeric: return "numeric";
    case ErrorKind::kMissingMapping: return "missing_mapping";
  }
  return "unknown";
}

}  // namespace d2d
