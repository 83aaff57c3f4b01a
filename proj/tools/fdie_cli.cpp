// Command-line front end: data-driven fault detection, isolation and
// estimation pipelines over discrete-time LTI systems.

#include <CLI11.hpp>

#include "fdie/config.hpp"

int main(int argc, char** argv) {
  CLI::App app{"fdie: data-driven fault detection, isolation and estimation"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out_dir;
  std::uint64_t seed = 0;
  bool has_seed = false;
  int runs = 0;
  bool quiet = false;

  app.add_option("--config", config_path, "config file (key = value text)");
  app.add_option("--out", out_dir, "output directory (overrides config)");
  app.add_option("--seed", seed, "base seed (overrides config)")
      ->each([&](const std::string&) { has_seed = true; });
  app.add_option("--runs", runs, "Monte Carlo runs (overrides config)");
  app.add_flag("--quiet", quiet, "suppress progress output");

  for (const char* name : {"simulate", "identify", "synth", "detect",
                           "isolate", "estimate", "tune", "montecarlo"})
    app.add_subcommand(name);
  auto* repro = app.add_subcommand("repro");
  std::string scenario;
  repro->add_option("scenario", scenario,
                    "example1_fdi | example2_estimation | vtol_comparative")
      ->required();

  CLI11_PARSE(app, argc, argv);

  try {
    fdie::RunConfig cfg = config_path.empty()
                              ? fdie::RunConfig::from_map(
                                    fdie::ConfigMap::parse_text("", "<none>"))
                              : fdie::RunConfig::load(config_path);
    if (!out_dir.empty()) cfg.out_dir = out_dir;
    if (has_seed) cfg.seed = seed;
    if (runs > 0) cfg.n_runs = runs;

    const std::string sub = app.get_subcommands().front()->get_name();
    const std::string command =
        sub == "repro" ? ("repro " + scenario) : sub;
    return fdie::dispatch(command, cfg, quiet);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
