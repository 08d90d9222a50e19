#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace seqtag {

inline constexpr const char* kToolkitVersion = "0.1.0";

// Error type for all recoverable failures (parse errors, shape mismatches,
// bad configs). The CLI maps these to exit code 1.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

// Collects warnings emitted by lenient operations (skipped annotations,
// snapped boundaries, header mismatches). Callers that pass nullptr get
// the messages on stderr instead.
struct Diag {
  std::vector<std::string> warnings;
  void warn(std::string msg) { warnings.push_back(std::move(msg)); }
};

void emit_warning(Diag* diag, std::string msg);

}  // namespace seqtag
