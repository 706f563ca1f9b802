#include <CLI11.hpp>

#include <iostream>

#include "eventlens/error.hpp"
#include "eventlens/pipeline.hpp"

namespace {

constexpr int kExitValidation = 1;
constexpr int kExitData = 2;
constexpr int kExitUsage = 64;

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"eventlens: event studies, VAR spillovers and propensity-score matching for return panels"};
  app.set_version_flag("--version", "eventlens 0.1.0");

  std::string subcommand;
  std::string config_path;
  std::optional<std::string> out_dir;
  std::optional<std::uint64_t> seed;

  app.add_option("subcommand", subcommand, "one of: synth, event-study, var, granger, irf, ccf, psm, placebo, all")
      ->required()
      ->check(CLI::IsMember(eventlens::kSubcommands));
  app.add_option("-c,--config", config_path, "run configuration (JSON)")->required();
  app.add_option("-o,--out", out_dir, "output directory, overrides config 'out'");
  app.add_option("-s,--seed", seed, "master seed, overrides config 'seed'");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  try {
    eventlens::RunConfig config = eventlens::load_config(config_path);
    if (out_dir) config.out_dir = *out_dir;
    if (seed) {
      config.seed = *seed;
      if (config.synth) config.synth->seed = *seed;
    }
    for (const auto& name : eventlens::run_subcommand(subcommand, config)) {
      std::cout << (config.out_dir / name).string() << '\n';
    }
  } catch (const eventlens::ValidationError& e) {
    std::cerr << "eventlens: invalid input: " << e.what() << '\n';
    return kExitValidation;
  } catch (const eventlens::DataError& e) {
    std::cerr << "eventlens: data error: " << e.what() << '\n';
    return kExitData;
  } catch (const nlohmann::json::exception& e) {
    std::cerr << "eventlens: invalid config: " << e.what() << '\n';
    return kExitValidation;
  } catch (const std::filesystem::filesystem_error& e) {
    std::cerr << "eventlens: " << e.what() << '\n';
    return kExitData;
  }
  return 0;
}
