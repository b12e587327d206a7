#include <CLI11.hpp>
#include <iostream>

#include "erosion/cli.hpp"
#include "erosion/errors.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Erosion of an inclined plane: spectral stability and channelization"};
  app.require_subcommand(1);

  erosion::CommandOptions opt;
  std::string config;
  long long seed = -1;
  std::string input;

  auto add_common = [&](CLI::App* sub, bool needs_out) {
    sub->add_option("--config", config, "key = value configuration file");
    auto* o = sub->add_option("--out", opt.out_dir, "output directory");
    if (needs_out) o->required();
    sub->add_option("--seed", seed, "random seed override");
    sub->add_option("--threads", opt.threads, "worker threads")->check(CLI::PositiveNumber);
    sub->add_flag("--force", opt.force, "overwrite a non-empty output directory");
  };
  auto* simulate = app.add_subcommand("simulate", "run the quasi-stationary solver");
  add_common(simulate, true);
  auto* smap = app.add_subcommand("stability_map", "growth-rate raster over (xi, eta)");
  add_common(smap, true);
  auto* analyze = app.add_subcommand("analyze", "transverse spectrum of an EROG snapshot");
  add_common(analyze, false);
  analyze->add_option("input", input, "EROG file")->required();
  auto* expand = app.add_subcommand("expand", "exact vs asymptotic eigenvalues along a ray");
  add_common(expand, true);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    erosion::RunSettings s = config.empty() ? erosion::parse_config_text("") : erosion::parse_config(config);
    if (seed >= 0) s.sim.rng_seed = static_cast<std::uint64_t>(seed);
    opt.config_path = config;
    if (*simulate)
      erosion::cmd_simulate(s, opt);
    else if (*smap)
      erosion::cmd_stability_map(s, opt);
    else if (*analyze)
      erosion::cmd_analyze(input, s, opt);
    else if (*expand)
      erosion::cmd_expand(s, opt);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return erosion::exit_code_for(e);
  }
  return 0;
}
