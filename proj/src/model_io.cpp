#include "seqtag/model_io.hpp"

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <sstream>

static_assert(std::endian::native == std::endian::little,
              "parameter blocks are written as little-endian f64");

namespace seqtag::io {

namespace {
constexpr char kMagic[4] = {'S', 'Q', 'T', 'G'};
}

ModelWriter::ModelWriter(std::string model_type) {
  meta_["format"] = kModelFormat;
  meta_["type"] = std::move(model_type);
}

void ModelWriter::add_block(const std::string& name, const num::Matrix& values) {
  blocks_.emplace_back(name, values);
}

void ModelWriter::add_block(const std::string& name, const num::Vector& values) {
  num::Matrix m(1, values.size());
  m.row(0) = values.transpose();
  blocks_.emplace_back(name, std::move(m));
}

void ModelWriter::save(std::ostream& out) const {
  nlohmann::ordered_json meta = meta_;
  meta["blocks"] = nlohmann::ordered_json::array();
  for (const auto& [name, m] : blocks_) {
    nlohmann::ordered_json b;
    b["name"] = name;
    b["rows"] = m.rows();
    b["cols"] = m.cols();
    meta["blocks"].push_back(std::move(b));
  }
  const std::string meta_str = meta.dump();
  out.write(kMagic, 4);
  const std::uint32_t len = static_cast<std::uint32_t>(meta_str.size());
  out.write(reinterpret_cast<const char*>(&len), 4);
  out.write(meta_str.data(), static_cast<std::streamsize>(meta_str.size()));
  for (const auto& [name, m] : blocks_) {
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
      for (Eigen::Index c = 0; c < m.cols(); ++c) {
        const double v = m(r, c);
        out.write(reinterpret_cast<const char*>(&v), sizeof(double));
      }
    }
  }
  if (!out) throw Error("model write failed");
}

void ModelWriter::save_file(const std::string& path) const {
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary);
    if (!out) throw Error("cannot open for writing: " + tmp);
    save(out);
  }
  if (std::rename(tmp.c_str(), path.c_str()) != 0)
    throw Error("cannot move " + tmp + " into place");
}

ModelReader::ModelReader(std::istream& in) {
  char magic[4];
  in.read(magic, 4);
  if (!in || std::memcmp(magic, kMagic, 4) != 0)
    throw Error("not a model file (bad magic)");
  std::uint32_t len = 0;
  in.read(reinterpret_cast<char*>(&len), 4);
  std::string meta_str(len, '\0');
  in.read(meta_str.data(), len);
  if (!in) throw Error("truncated model metadata");
  try {
    meta_ = nlohmann::json::parse(meta_str);
  } catch (const nlohmann::json::exception& e) {
    throw Error(std::string("bad model metadata: ") + e.what());
  }
  if (meta_.value("format", "") != kModelFormat)
    throw Error("unsupported model format '" + meta_.value("format", std::string()) + "'");
  for (const auto& b : meta_.at("blocks")) {
    const std::string name = b.at("name").get<std::string>();
    const Eigen::Index rows = b.at("rows").get<Eigen::Index>();
    const Eigen::Index cols = b.at("cols").get<Eigen::Index>();
    num::Matrix m(rows, cols);
    for (Eigen::Index r = 0; r < rows; ++r) {
      for (Eigen::Index c = 0; c < cols; ++c) {
        double v;
        in.read(reinterpret_cast<char*>(&v), sizeof(double));
        m(r, c) = v;
      }
    }
    if (!in) throw Error("truncated parameter block '" + name + "'");
    blocks_.emplace(name, std::move(m));
  }
}

ModelReader ModelReader::open(const std::string& path, std::string* buffer) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open model file: " + path);
  if (buffer) {
    std::ostringstream ss;
    ss << in.rdbuf();
    *buffer = ss.str();
    std::istringstream is(*buffer);
    return ModelReader(is);
  }
  return ModelReader(in);
}

std::string ModelReader::model_type() const { return meta_.value("type", ""); }

num::Matrix ModelReader::matrix(const std::string& name) const {
  const auto it = blocks_.find(name);
  if (it == blocks_.end()) throw Error("model is missing block '" + name + "'");
  return it->second;
}

num::Vector ModelReader::vector(const std::string& name) const {
  const num::Matrix m = matrix(name);
  if (m.rows() != 1) throw Error("block '" + name + "' is not a vector");
  return m.row(0).transpose();
}

bool ModelReader::has_block(const std::string& name) const {
  return blocks_.count(name) > 0;
}

std::string model_type_of_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open model file: " + path);
  return ModelReader(in).model_type();
}

}  // namespace seqtag::io
