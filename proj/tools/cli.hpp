#pragma once

#include <optional>
#include <string>

namespace pvsim::cli {

/// Options shared by every subcommand. Flags override config-file values,
/// which override the built-in defaults.
struct CommonOptions {
  std::string config_path;               // empty: built-in defaults
  std::optional<std::string> scenario;   // preset name
  std::optional<double> duration;        // [s]
  std::optional<std::string> controller; // cpoa | ampo | ampo_ann
  std::optional<long> seed;
  std::optional<std::string> out_dir;
  std::optional<double> gamma;
  std::optional<std::string> model_dir;
};

/// Exit codes: 0 success, 2 configuration error, 3 runtime/simulation error.
int cmd_simulate(const CommonOptions& opts, bool train_if_missing, bool inverter_trace);
int cmd_train(const CommonOptions& opts);
int cmd_compare(const CommonOptions& opts, const std::string& controllers_csv);
int cmd_sweep(const CommonOptions& opts, const std::string& grid_spec);

}  // namespace pvsim::cli
