#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "cutloc/app.hpp"
#include "cutloc/config.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Obstacle problem with the geodesic distance as obstacle: solve, cut-locus detection, "
               "barrier certificates, Laplacian blow-up and smoothed obstacles."};
  app.usage("cutloc <command> --config <path> [--out <dir>] [--override key=value ...]");

  std::string command;
  std::string config_path;
  std::string out_dir;
  std::vector<std::string> overrides;
  app.add_option("command", command, "solve | detect | barrier | blowup | smooth | all")->required();
  app.add_option("-c,--config", config_path, "configuration file")->required();
  app.add_option("-o,--out", out_dir, "output directory (overrides `out`)");
  app.add_option("--override", overrides, "key=value applied after the config file")->take_all();
  app.footer("Configuration keys and defaults:\n" + cutloc::config_reference());

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  if (!cutloc::is_command(command)) {
    std::cerr << "unknown command '" << command << "'\n\n" << app.help();
    return 2;
  }

  cutloc::RunConfig config;
  try {
    config = cutloc::parse_config(config_path);
    for (const auto& o : overrides) cutloc::apply_override(config, o);
    if (!out_dir.empty()) config.out = out_dir;
  } catch (const std::exception& e) {
    std::cerr << "cutloc: " << e.what() << "\n";
    return 2;
  }

  try {
    const auto outcome = cutloc::run(command, config);
    std::cout << (outcome.ok ? "ok" : "FAILED") << ": " << (outcome.out_dir / "report.json").string() << "\n";
    if (!outcome.error.empty()) std::cerr << "cutloc: " << outcome.error << "\n";
    return outcome.exit_code;
  } catch (const cutloc::LockedError& e) {
    std::cerr << "cutloc: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "cutloc: " << e.what() << "\n";
    return 2;
  }
}
