#include "seqtag/config.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>

namespace seqtag::cli {

namespace {

KeySpec str(bool required = false, std::optional<std::string> def = std::nullopt) {
  return {KeyType::String, required, std::move(def), {}};
}
KeySpec path(bool required = false) { return {KeyType::Path, required, std::nullopt, {}}; }
KeySpec num_int(const std::string& def) { return {KeyType::Int, false, def, {}}; }
KeySpec num_double(const std::string& def) { return {KeyType::Double, false, def, {}}; }
KeySpec seed_key() { return {KeyType::UInt64, true, std::nullopt, {}}; }
KeySpec boolean(const std::string& def) { return {KeyType::Bool, false, def, {}}; }
KeySpec choice(std::vector<std::string> choices, std::optional<std::string> def,
               bool required = false) {
  return {KeyType::Enum, required, std::move(def), std::move(choices)};
}

const std::vector<std::string> kEntityTypes = {"CellLine", "Chemical", "Disease", "Gene",
                                               "Species"};

std::map<std::string, KeyRegistry> build_registries() {
  std::map<std::string, KeyRegistry> reg;

  reg["convert"] = {
      {"in", path(true)},
      {"from", choice({"pubtator", "conll", "jsonl"}, std::nullopt, true)},
      {"to", choice({"jsonl", "conll"}, "jsonl")},
      {"split", choice({"train", "dev", "test"}, "train")},
      {"conll_scheme", choice({"iob2", "iobes"}, "iobes")},
      {"aliases", path()},
      {"entity_type", choice(kEntityTypes, std::nullopt)},
      {"name", str()},
      {"out", str(false, "out")},
  };
  reg["stats"] = {
      {"in", path(true)},
      {"from", choice({"pubtator", "conll", "jsonl"}, "jsonl")},
      {"conll_scheme", choice({"iob2", "iobes"}, "iobes")},
      {"aliases", path()},
      {"name", str()},
      {"out", str(false, "out")},
  };
  reg["train-lm"] = {
      {"corpus", path(true)},
      {"direction", choice({"forward", "backward", "both"}, "both")},
      {"hidden", num_int("64")},
      {"embed_dim", num_int("16")},
      {"seq_len", num_int("50")},
      {"batch_size", num_int("8")},
      {"n_splits", num_int("6")},
      {"passes", num_int("1")},
      {"lr", num_double("1.0")},
      {"anneal_factor", num_double("0.5")},
      {"patience", num_int("100")},
      {"min_lr", num_double("1e-4")},
      {"clip_norm", num_double("5.0")},
      {"min_char_freq", num_int("5")},
      {"seed", seed_key()},
      {"out", str(false, "out")},
  };
  reg["train-embed"] = {
      {"in", path(true)},
      {"from", choice({"jsonl", "text"}, "jsonl")},
      {"dim", num_int("200")},
      {"window", num_int("5")},
      {"negatives", num_int("10")},
      {"epochs", num_int("5")},
      {"lr", num_double("0.05")},
      {"min_count", num_int("1")},
      {"ngram_min", num_int("3")},
      {"ngram_max", num_int("6")},
      {"buckets", num_int("262144")},
      {"subsample", num_double("0.0")},
      {"seed", seed_key()},
      {"out", str(false, "out")},
  };
  reg["train-tagger"] = {
      {"train", str(true)},  // comma-separated harmonized files
      {"dev", str(true)},
      {"entity_type", choice(kEntityTypes, std::nullopt, true)},
      {"charlm_fwd", path()},
      {"charlm_bwd", path()},
      {"skipgram", path()},
      {"vectors", path()},
      {"init_model", path()},
      {"epochs", num_int("200")},
      {"batch_size", num_int("32")},
      {"lr", num_double("0.1")},
      {"dropout", num_double("0.5")},
      {"patience", num_int("3")},
      {"anneal_factor", num_double("0.5")},
      {"min_lr", num_double("1e-4")},
      {"hidden", num_int("256")},
      {"crf_mask", boolean("false")},
      {"strict_spans", boolean("false")},
      {"seed", seed_key()},
      {"out", str(false, "out")},
  };
  reg["predict"] = {
      {"model", path(true)},
      {"in", path(true)},
      {"from", choice({"jsonl", "text"}, "jsonl")},
      {"workers", num_int("1")},
      {"out", str(false, "out")},
  };
  reg["evaluate"] = {
      {"gold", path(true)},
      {"pred", path(true)},
      {"entity_type", choice(kEntityTypes, std::nullopt, true)},
      {"mode", choice({"exact", "tolerant", "overlap"}, "tolerant")},
      {"workers", num_int("1")},
      {"out", str(false, "out")},
  };
  reg["compare"] = {
      {"measured", path(true)},
      {"reference", path(true)},
      {"out", str(false, "out")},
  };
  return reg;
}

const std::map<std::string, KeyRegistry>& registries() {
  static const std::map<std::string, KeyRegistry> reg = build_registries();
  return reg;
}

std::string trim(const std::string& s) {
  const auto a = s.find_first_not_of(" \t");
  if (a == std::string::npos) return {};
  const auto b = s.find_last_not_of(" \t");
  return s.substr(a, b - a + 1);
}

void check_type(const std::string& command, const std::string& key, const KeySpec& spec,
                const std::string& value) {
  auto fail = [&](const std::string& expected) {
    throw Error("config for '" + command + "': key '" + key + "' expects " + expected +
                ", got '" + value + "'");
  };
  switch (spec.type) {
    case KeyType::String:
    case KeyType::Path:
      if (value.empty()) fail("a non-empty value");
      break;
    case KeyType::Int: {
      try {
        std::size_t used = 0;
        (void)std::stoll(value, &used);
        if (used != value.size()) fail("an integer");
      } catch (const std::logic_error&) {
        fail("an integer");
      }
      break;
    }
    case KeyType::UInt64: {
      try {
        std::size_t used = 0;
        (void)std::stoull(value, &used);
        if (used != value.size() || value.front() == '-') fail("a non-negative integer");
      } catch (const std::logic_error&) {
        fail("a non-negative integer");
      }
      break;
    }
    case KeyType::Double: {
      try {
        std::size_t used = 0;
        (void)std::stod(value, &used);
        if (used != value.size()) fail("a number");
      } catch (const std::logic_error&) {
        fail("a number");
      }
      break;
    }
    case KeyType::Bool:
      if (value != "true" && value != "false" && value != "0" && value != "1")
        fail("true|false");
      break;
    case KeyType::Enum:
      if (std::find(spec.choices.begin(), spec.choices.end(), value) == spec.choices.end()) {
        std::string expected = "one of {";
        for (std::size_t i = 0; i < spec.choices.size(); ++i)
          expected += (i ? "," : "") + spec.choices[i];
        fail(expected + "}");
      }
      break;
  }
}

}  // namespace

const std::vector<std::string>& known_commands() {
  static const std::vector<std::string> commands = [] {
    std::vector<std::string> out;
    for (const auto& [name, reg] : registries()) out.push_back(name);
    return out;
  }();
  return commands;
}

const KeyRegistry& registry_for(const std::string& command) {
  const auto it = registries().find(command);
  if (it == registries().end()) throw Error("unknown command: '" + command + "'");
  return it->second;
}

RunConfig::RunConfig(std::string command, std::map<std::string, std::string> values)
    : command_(std::move(command)), values_(std::move(values)) {}

bool RunConfig::has(const std::string& key) const { return values_.count(key) > 0; }

std::string RunConfig::get_string(const std::string& key) const {
  const auto it = values_.find(key);
  if (it == values_.end())
    throw Error("config for '" + command_ + "': missing key '" + key + "'");
  return it->second;
}

std::optional<std::string> RunConfig::get_optional(const std::string& key) const {
  const auto it = values_.find(key);
  if (it == values_.end()) return std::nullopt;
  return it->second;
}

int RunConfig::get_int(const std::string& key) const {
  return static_cast<int>(std::stoll(get_string(key)));
}

std::uint64_t RunConfig::get_uint64(const std::string& key) const {
  return std::stoull(get_string(key));
}

double RunConfig::get_double(const std::string& key) const {
  return std::stod(get_string(key));
}

bool RunConfig::get_bool(const std::string& key) const {
  const std::string v = get_string(key);
  return v == "true" || v == "1";
}

std::map<std::string, std::string> parse_config_file(const std::string& path,
                                                     const std::string& command) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open config file: " + path);
  std::map<std::string, std::string> values;
  std::string line, section;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const std::size_t hash = line.find('#');
    if (hash != std::string::npos) line.resize(hash);
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']')
        throw Error(path + ":" + std::to_string(line_no) + ": unterminated section header");
      section = trim(line.substr(1, line.size() - 2));
      if (registries().find(section) == registries().end())
        throw Error(path + ":" + std::to_string(line_no) + ": unknown command section '[" +
                    section + "]'");
      continue;
    }
    const std::size_t eq = line.find('=');
    if (eq == std::string::npos)
      throw Error(path + ":" + std::to_string(line_no) + ": expected 'key = value'");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty())
      throw Error(path + ":" + std::to_string(line_no) + ": empty key");
    // Top-level keys apply to the executing command; section keys apply
    // to their command only.
    if (section.empty() || section == command) values[key] = value;
  }
  return values;
}

RunConfig load_config(const std::string& command, const std::optional<std::string>& path,
                      const std::vector<std::pair<std::string, std::string>>& cli_overrides) {
  const KeyRegistry& registry = registry_for(command);

  std::map<std::string, std::string> values;
  if (path) values = parse_config_file(*path, command);
  for (const auto& [key, value] : cli_overrides) values[key] = value;

  for (const auto& [key, value] : values) {
    const auto spec = registry.find(key);
    if (spec == registry.end())
      throw Error("config for '" + command + "': unknown key '" + key + "'");
    check_type(command, key, spec->second, value);
  }
  for (const auto& [key, spec] : registry) {
    if (values.count(key)) continue;
    if (spec.default_value) {
      values[key] = *spec.default_value;
    } else if (spec.required) {
      throw Error("config for '" + command + "': missing required key '" + key + "'");
    }
  }
  // Resolve paths before execution.
  for (auto& [key, value] : values) {
    const auto spec = registry.find(key);
    if (spec->second.type == KeyType::Path)
      value = std::filesystem::absolute(value).lexically_normal().string();
  }
  return RunConfig(command, std::move(values));
}

}  // namespace seqtag::cli
