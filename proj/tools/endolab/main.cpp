#include <iostream>
#include <optional>

#include <CLI11.hpp>

#include <endolab/presets.hpp>

#include "endolab/config.hpp"
#include "endolab/runners.hpp"

int main(int argc, char** argv) {
  using namespace endolab::cli;

  CLI::App app{"endolab: partially hyperbolic toral endomorphism experiments"};
  app.set_version_flag("--version", ENDOLAB_VERSION);
  app.require_subcommand(1);

  struct KindArgs {
    std::string config;
    std::optional<std::uint64_t> seed;
    std::string out = ".";
  };
  std::vector<std::pair<CLI::App*, KindArgs>> commands;
  commands.reserve(kinds().size());
  for (const auto& kind : kinds()) {
    commands.emplace_back(app.add_subcommand(kind, "run the " + kind + " experiment"), KindArgs{});
    auto& [sub, args] = commands.back();
    sub->add_option("--config", args.config, "JSON experiment config")->required();
    sub->add_option("--seed", args.seed, "override the config seed");
    sub->add_option("--out", args.out, "output directory")->capture_default_str();
  }

  std::string preset;
  auto* preset_cmd = app.add_subcommand("preset", "print a ready config for a named preset");
  preset_cmd->add_option("name", preset, "preset name (omit to list them)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitConfig;
  }

  if (preset_cmd->parsed()) {
    if (preset.empty()) {
      for (const auto& name : endolab::preset_names()) std::cout << name << '\n';
      return kExitOk;
    }
    try {
      std::cout << preset_config(preset).dump(2) << '\n';
    } catch (const std::exception& e) {
      std::cerr << "config error: " << e.what() << '\n';
      return kExitConfig;
    }
    return kExitOk;
  }

  for (auto& [sub, args] : commands) {
    if (sub->parsed()) {
      return run(sub->get_name(), args.config, args.seed, args.out, std::cout, std::cerr);
    }
  }
  return kExitConfig;
}
