#include "seqtag/manifest.hpp"

#include <json.hpp>

#include <cstdio>
#include <fstream>

#include "seqtag/sha256.hpp"

namespace seqtag::cli {

void RunManifest::write_file(const std::string& path) const {
  nlohmann::ordered_json obj;
  obj["format"] = "seqtag-manifest/1";
  obj["toolkit_version"] = kToolkitVersion;
  obj["command"] = command;
  obj["config"] = nlohmann::ordered_json::object();
  for (const auto& [key, value] : config) obj["config"][key] = value;
  auto digest_list = [](const std::vector<std::string>& paths) {
    nlohmann::ordered_json arr = nlohmann::ordered_json::array();
    for (const std::string& p : paths) {
      nlohmann::ordered_json entry;
      entry["path"] = p;
      entry["sha256"] = io::sha256_file_hex(p);
      arr.push_back(std::move(entry));
    }
    return arr;
  };
  obj["inputs"] = digest_list(inputs);
  obj["outputs"] = digest_list(outputs);
  obj["wall_clock_seconds"] = wall_clock_seconds;

  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary);
    if (!out) throw Error("cannot write manifest: " + tmp);
    out << obj.dump(2) << "\n";
  }
  if (std::rename(tmp.c_str(), path.c_str()) != 0)
    throw Error("cannot move manifest into place: " + path);
}

}  // namespace seqtag::cli
