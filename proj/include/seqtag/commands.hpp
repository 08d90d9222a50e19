#pragma once

#include <string>
#include <vector>

#include "seqtag/config.hpp"

namespace seqtag::cli {

struct RunOutcome {
  std::vector<std::string> inputs;
  std::vector<std::string> outputs;  // includes every written artifact
  std::string summary;               // printed to stdout
};

// Executes one command against a resolved config, writes its artifacts
// and the run manifest into the output directory. Throws seqtag::Error
// on any failure.
RunOutcome run_command(const RunConfig& config);

}  // namespace seqtag::cli
