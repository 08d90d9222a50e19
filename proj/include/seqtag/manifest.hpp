#pragma once

#include <string>
#include <vector>

#include "seqtag/config.hpp"

namespace seqtag::cli {

// Run record written atomically next to the outputs: resolved config,
// input and output digests, toolkit version and wall clock.
struct RunManifest {
  std::string command;
  std::map<std::string, std::string> config;
  std::vector<std::string> inputs;
  std::vector<std::string> outputs;
  double wall_clock_seconds = 0.0;

  void write_file(const std::string& path) const;
};

}  // namespace seqtag::cli
