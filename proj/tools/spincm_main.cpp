#include <string>

#include "CLI11.hpp"
#include "spincm/runner.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Spin Calogero-Moser chains: simulate, verify, compare"};
  app.require_subcommand(1);

  spincm::RunnerOptions opt;
  std::string suite = "all";

  auto add_common = [&](CLI::App* cmd) {
    cmd->add_option("--out", opt.out_dir, "output directory")
        ->capture_default_str();
    cmd->add_option("--seed", opt.seed, "override the random seed");
    cmd->add_option("--tol", opt.tol, "override the pass tolerance");
  };

  CLI::App* sim =
      app.add_subcommand("simulate", "integrate one configured chain");
  sim->add_option("--config", opt.config_path, "run configuration file")
      ->required();
  sim->add_option("--format", opt.format, "output format: json, csv or both");
  sim->add_flag("--assert-free-flight", opt.assert_free_flight,
                "start from aligned spins and require exactly linear motion");
  add_common(sim);

  CLI::App* ver = app.add_subcommand("verify", "run property suites");
  ver->add_option("suite", suite, "leaf suite, suite group, or 'all'")
      ->capture_default_str();
  ver->add_option("--config", opt.config_path,
                  "optional config; its seed is used unless --seed is given");
  add_common(ver);

  CLI::App* cmp = app.add_subcommand(
      "compare", "numerical integration vs the exact factorization flow");
  cmp->add_option("--config", opt.config_path, "run configuration file")
      ->required();
  cmp->add_option("--format", opt.format, "output format: json, csv or both");
  add_common(cmp);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? spincm::kExitOk : spincm::kExitConfig;
  }

  if (sim->parsed()) return spincm::cmd_simulate(opt);
  if (ver->parsed()) return spincm::cmd_verify(suite, opt);
  return spincm::cmd_compare(opt);
}
