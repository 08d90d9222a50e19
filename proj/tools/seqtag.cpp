// Batch front end: convert | stats | train-lm | train-embed | train-tagger
// | predict | evaluate | compare. Exit codes: 0 success, 1 runtime error,
// 2 usage error.

#include <CLI11.hpp>

#include <iostream>

#include "seqtag/commands.hpp"

namespace {

std::string flag_name(const std::string& key) {
  std::string flag = "--" + key;
  for (char& c : flag)
    if (c == '_') c = '-';
  return flag;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"seqtag: sequence-labeling toolkit for biomedical NER"};
  app.require_subcommand(1);

  struct SubState {
    std::string config_path;
    std::map<std::string, std::string> flag_values;
  };
  std::map<std::string, std::shared_ptr<SubState>> states;

  for (const std::string& command : seqtag::cli::known_commands()) {
    CLI::App* sub = app.add_subcommand(command);
    auto state = std::make_shared<SubState>();
    states[command] = state;
    sub->add_option("--config", state->config_path, "key = value config file");
    for (const auto& [key, spec] : seqtag::cli::registry_for(command)) {
      (void)spec;
      sub->add_option(flag_name(key), state->flag_values[key]);
    }
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  const std::string command = app.get_subcommands().front()->get_name();
  const SubState& state = *states[command];
  try {
    std::vector<std::pair<std::string, std::string>> overrides;
    for (const auto& [key, value] : state.flag_values)
      if (!value.empty()) overrides.emplace_back(key, value);
    const seqtag::cli::RunConfig config = seqtag::cli::load_config(
        command,
        state.config_path.empty() ? std::nullopt
                                  : std::make_optional(state.config_path),
        overrides);
    const seqtag::cli::RunOutcome outcome = seqtag::cli::run_command(config);
    if (!outcome.summary.empty()) std::cout << outcome.summary << "\n";
    return 0;
  } catch (const seqtag::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
