#include <CLI11.hpp>

#include "cli.hpp"

namespace {

void add_common(CLI::App* cmd, pvsim::cli::CommonOptions& opts) {
  cmd->add_option("-c,--config", opts.config_path, "INI config file")
      ->envname("PVSIM_CONFIG")
      ->check(CLI::ExistingFile);
  cmd->add_option("--scenario", opts.scenario, "scenario preset (stc, step_irradiance)");
  cmd->add_option("--duration", opts.duration, "scenario duration [s]");
  cmd->add_option("--seed", opts.seed, "top-level RNG seed");
  cmd->add_option("--out", opts.out_dir, "output directory");
  cmd->add_option("--gamma", opts.gamma, "controller perturbation step");
  cmd->add_option("--model-dir", opts.model_dir, "directory for trained model files");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"PV maximum power point tracking simulation toolkit"};
  app.require_subcommand(1);

  pvsim::cli::CommonOptions sim_opts;
  bool train_if_missing = false;
  bool inverter_trace = false;
  auto* simulate = app.add_subcommand("simulate", "run one scenario, write trace.csv + metrics.txt");
  add_common(simulate, sim_opts);
  simulate->add_option("--controller", sim_opts.controller, "cpoa, ampo or ampo_ann");
  simulate->add_flag("--train-if-missing", train_if_missing,
                     "train and persist estimator models when absent");
  simulate->add_flag("--inverter-trace", inverter_trace,
                     "also emit the open-loop inverter trace CSV");

  pvsim::cli::CommonOptions train_opts;
  auto* train = app.add_subcommand("train", "generate the dataset and train both MPP estimators");
  add_common(train, train_opts);

  pvsim::cli::CommonOptions compare_opts;
  std::string controllers = "cpoa,ampo,ampo_ann";
  auto* compare = app.add_subcommand("compare", "run several controllers on one scenario");
  add_common(compare, compare_opts);
  compare->add_option("--controllers", controllers, "comma-separated controller list");

  pvsim::cli::CommonOptions sweep_opts;
  std::string grid;
  auto* sweep = app.add_subcommand("sweep", "emit P-V/I-V curve families and the MPP locus");
  add_common(sweep, sweep_opts);
  sweep->add_option("--grid", grid, "g_min:g_max:n,t_min:t_max:n (temperatures in deg C)")
      ->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  if (simulate->parsed()) return pvsim::cli::cmd_simulate(sim_opts, train_if_missing, inverter_trace);
  if (train->parsed()) return pvsim::cli::cmd_train(train_opts);
  if (compare->parsed()) return pvsim::cli::cmd_compare(compare_opts, controllers);
  if (sweep->parsed()) return pvsim::cli::cmd_sweep(sweep_opts, grid);
  return 2;
}
