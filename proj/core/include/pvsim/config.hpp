#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>

#include "pvsim/sim.hpp"

namespace pvsim {

/// Full run configuration. Sections mirror the module names; every key is
/// validated against the schema and unknown keys are hard errors.
struct RunConfig {
  std::optional<PanelParams> panel; // absent -> shipped default calibration
  BuckParams buck;
  double dt = 1e-5;
  ControllerConfig controller;
  ControllerKind controller_kind = ControllerKind::ampo;
  double sample_period = 1e-3;

  GridSpec grid;
  TrainOptions train;
  int hidden = 10;
  std::filesystem::path model_dir = "models";

  std::string scenario_preset = "stc"; // "stc", "step_irradiance" or "" with segments
  std::optional<double> scenario_duration;
  std::vector<ProfileSegment> scenario_segments;

  std::uint32_t seed = 42;
  std::filesystem::path out_dir = "out";

  InverterConfig inverter;

  ScenarioProfile scenario() const;
  SimConfig sim_config() const;
};

/// Parsed INI-style text: [section] headers, key = value lines, # or ;
/// comments. Duplicate keys within a section are errors.
using IniData = std::map<std::string, std::map<std::string, std::string>>;

IniData parse_ini(const std::string& text);

/// Applies a parsed file over the defaults. Throws ConfigError naming the
/// offending section/key on unknown keys or malformed values.
RunConfig config_from_ini(const IniData& ini);
RunConfig load_config(const std::filesystem::path& path);

/// The [panel] section of a config file for a parameter set.
std::string panel_to_ini(const PanelParams& p);

}  // namespace pvsim
