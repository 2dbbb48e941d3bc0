#include "CLI11.hpp"
#include "burgers_rb/commands.hpp"

int main(int argc, char** argv) {
  CLI::App app{
      "Certified reduced-basis solver for the 1D viscous Burgers equation"};

  burgers_rb::CommandOptions opt;
  app.add_option("command", opt.command,
                 "full-solve | offline-build | online-solve | benchmark | "
                 "scm-report")
      ->required();
  app.add_option("--config", opt.config_path, "problem configuration file")
      ->required();
  app.add_option("--model", opt.model_path,
                 "reduced-model file (output of offline-build, input of "
                 "online-solve and scm-report)");
  app.add_option("--out", opt.out_path, "output CSV path");
  CLI::Option* basis =
      app.add_option("--basis", opt.basis, "basis construction method")
          ->check(CLI::IsMember({"pod", "greedy"}));
  app.add_flag("--enrich", opt.enrich,
               "prepend the initial-condition modes to the basis");
  app.add_option("--N", opt.n_override, "override the reduced basis size")
      ->check(CLI::PositiveNumber);
  CLI::Option* seed =
      app.add_option("--seed", opt.seed, "override the parameter-draw seed");

  CLI11_PARSE(app, argc, argv);
  opt.basis_given = basis->count() > 0;
  opt.has_seed = seed->count() > 0;
  return burgers_rb::run_command(opt);
}
