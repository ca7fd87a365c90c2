#include <iostream>

#include "CLI11.hpp"
#include "commands.hpp"

int main(int argc, char** argv) {
  using afc::cli::CommandOptions;

  CLI::App app{"Atomic-frequency-comb storage simulator"};
  app.set_version_flag("--version", AFC_VERSION);
  app.require_subcommand(1);

  CommandOptions opts;
  std::string figure;
  auto add_common = [&](CLI::App* sub, bool config_required) {
    auto* cfg = sub->add_option("--config", opts.config_path, "JSON run configuration");
    if (config_required) cfg->required()->check(CLI::ExistingFile);
    sub->add_option("--seed", opts.seed, "override the configured seed");
    sub->add_option("--out", opts.out_dir, "output directory");
    sub->add_flag("--quiet", opts.quiet, "suppress progress output and warnings");
  };

  add_common(app.add_subcommand("comb", "build an AFC profile and measure its teeth"), true);
  add_common(app.add_subcommand("store", "two-level AFC storage of the input pulse"), true);
  add_common(app.add_subcommand("spinwave", "spin-wave AFC storage, optional decay sweep"), true);
  add_common(app.add_subcommand("t2", "two-pulse photon echo decay and T2 fit"), true);
  add_common(app.add_subcommand("fringe", "interference fringe and visibility fit"), true);
  add_common(app.add_subcommand("sweep", "seeded replicas of a noisy experiment"), true);
  auto* repro = app.add_subcommand("repro", "reproduce a figure from its built-in preset");
  repro->add_option("figure", figure, "fig2, fig4 or fig5")->required()->check(CLI::IsMember({"fig2", "fig4", "fig5"}));
  add_common(repro, false);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : afc::cli::kUsage;
  }
  const std::string command = app.get_subcommands().front()->get_name();
  return afc::cli::execute(command, opts, std::cout, std::cerr, figure);
}
