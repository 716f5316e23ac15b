#include <CLI11.hpp>
#include <iostream>

#include "commands.hpp"
#include "msacm/errors.hpp"

int main(int argc, char** argv) {
  using namespace msacm::cli;

  CLI::App app{"Markov-switching composite volatility models: simulate, fit, classify, diagnose, compare"};
  app.require_subcommand(0, 1);

  std::optional<std::string> config_path;
  Overrides ov;
  bool init = false;
  app.add_flag("--init", init, "print a config template with every key and its default, then exit");

  const std::vector<std::pair<std::string, std::string>> commands{
      {"simulate", "draw a synthetic market series from the model"},
      {"fit", "estimate a model by quasi-maximum likelihood"},
      {"classify", "group announcements by their effect on the regime probability"},
      {"diagnose", "residual checks for a fitted run"},
      {"compare", "cross-market agreement of classifications and residual cross-correlations"},
  };
  for (const auto& [name, help] : commands) {
    auto* sub = app.add_subcommand(name, help);
    sub->add_option("--config", config_path, "JSON run configuration");
    sub->add_option("--seed", ov.seed, "random seed");
    sub->add_option("--model", ov.model, "amem|amemx|acm|msacm")
        ->check(CLI::IsMember({"amem", "amemx", "acm", "msacm"}));
    sub->add_option("--k", ov.k, "number of regimes")->check(CLI::IsMember({2, 3}));
    sub->add_option("--starts", ov.starts, "optimizer starts")->check(CLI::PositiveNumber);
    sub->add_option("--out", ov.out, "output directory");
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kInputError;
  }

  if (init) {
    std::cout << config_template().dump(2) << '\n';
    return kOk;
  }
  if (app.get_subcommands().empty()) {
    std::cerr << app.help();
    return kInputError;
  }
  const std::string command = app.get_subcommands().front()->get_name();

  RunConfig config;
  try {
    config = load_config(config_path ? std::optional<std::filesystem::path>(*config_path) : std::nullopt, ov);
  } catch (const msacm::InputError& e) {
    std::cerr << "input error: " << e.what() << '\n';
    return kInputError;
  } catch (const std::invalid_argument& e) {
    std::cerr << "input error: " << e.what() << '\n';
    return kInputError;
  }
  return run_command(command, config);
}
