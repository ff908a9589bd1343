#include <iostream>

#include <CLI11.hpp>

#include "drm/cli/commands.hpp"
#include "drm/errors.hpp"

int main(int argc, char** argv) {
  using namespace drm::cli;
  CLI::App app{"Deep Ritz experiments for -Laplace(u) + w u = f on the unit cube"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out_dir;
  bool plot = false;
  for (const std::string& name : command_names()) {
    CLI::App* sub = app.add_subcommand(name);
    sub->add_option("--config", config_path, "JSON configuration file")->required()->check(CLI::ExistingFile);
    sub->add_option("--out", out_dir, "output directory (overrides the config)");
    sub->add_flag("--plot", plot, "also render SVG line charts");
  }
  CLI11_PARSE(app, argc, argv);

  const std::string command = app.get_subcommands().front()->get_name();
  try {
    RunOptions opts;
    if (!out_dir.empty()) opts.out = out_dir;
    opts.plot = plot;
    const CommandOutput r = run_command(command, load_config(config_path), opts);
    std::cout << r.summary.dump(2) << '\n';
    return r.exit_code;
  } catch (const drm::ConfigError& e) {
    std::cerr << "drl: " << e.what() << '\n';
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "drl: " << command << " failed: " << e.what() << '\n';
    return kExitConfig;
  }
}
