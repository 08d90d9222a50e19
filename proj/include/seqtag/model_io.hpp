#pragma once

#include <json.hpp>

#include <iosfwd>
#include <string>
#include <vector>

#include "seqtag/numerics.hpp"

namespace seqtag::io {

inline constexpr const char* kModelFormat = "seqtag-model/1";

// Checkpoint container: the magic "SQTG", a little-endian u32 metadata
// length, the JSON metadata, then the parameter blocks named in
// metadata["blocks"] as row-major little-endian f64.
class ModelWriter {
 public:
  explicit ModelWriter(std::string model_type);

  nlohmann::ordered_json& meta() { return meta_; }
  void add_block(const std::string& name, const num::Matrix& values);
  void add_block(const std::string& name, const num::Vector& values);

  void save(std::ostream& out) const;
  // Atomic: writes <path>.tmp and renames into place.
  void save_file(const std::string& path) const;

 private:
  nlohmann::ordered_json meta_;
  std::vector<std::pair<std::string, num::Matrix>> blocks_;
};

class ModelReader {
 public:
  explicit ModelReader(std::istream& in);
  static ModelReader open(const std::string& path, std::string* buffer);

  const nlohmann::json& meta() const { return meta_; }
  std::string model_type() const;

  num::Matrix matrix(const std::string& name) const;
  num::Vector vector(const std::string& name) const;
  bool has_block(const std::string& name) const;

 private:
  nlohmann::json meta_;
  std::map<std::string, num::Matrix> blocks_;
};

std::string model_type_of_file(const std::string& path);

}  // namespace seqtag::io
