#include "pvsim/config.hpp"

#include <cctype>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <set>
#include <sstream>

namespace pvsim {
namespace {

std::string trim(const std::string& s) {
  std::size_t a = 0, b = s.size();
  while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
  while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
  return s.substr(a, b - a);
}

double to_double(const std::string& section, const std::string& key, const std::string& value) {
  char* end = nullptr;
  const double x = std::strtod(value.c_str(), &end);
  if (end == value.c_str() || *end != '\0') {
    throw ConfigError("[" + section + "] " + key + ": not a number: '" + value + "'");
  }
  return x;
}

long to_long(const std::string& section, const std::string& key, const std::string& value) {
  char* end = nullptr;
  const long x = std::strtol(value.c_str(), &end, 10);
  if (end == value.c_str() || *end != '\0') {
    throw ConfigError("[" + section + "] " + key + ": not an integer: '" + value + "'");
  }
  return x;
}

std::string full_precision(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

std::vector<ProfileSegment> parse_segments(const std::string& text) {
  std::vector<ProfileSegment> segments;
  std::istringstream in(text);
  std::string part;
  while (std::getline(in, part, ';')) {
    part = trim(part);
    if (part.empty()) continue;
    std::vector<double> f;
    std::istringstream fs(part);
    std::string tok;
    while (std::getline(fs, tok, ':')) {
      f.push_back(to_double("scenario", "segments", trim(tok)));
    }
    if (f.size() == 4) {
      segments.push_back({f[0], f[1], {f[2], f[3]}, {f[2], f[3]}});
    } else if (f.size() == 6) {
      segments.push_back({f[0], f[1], {f[2], f[3]}, {f[4], f[5]}});
    } else {
      throw ConfigError("[scenario] segments: expected t0:t1:g:t_k or t0:t1:g0:t_k0:g1:t_k1");
    }
  }
  if (segments.empty()) throw ConfigError("[scenario] segments: empty");
  return segments;
}

}  // namespace

IniData parse_ini(const std::string& text) {
  IniData data;
  std::istringstream in(text);
  std::string line;
  std::string section;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    line = trim(line);
    if (line.empty() || line[0] == '#' || line[0] == ';') continue;
    if (line.front() == '[') {
      if (line.back() != ']') throw ConfigError("line " + std::to_string(lineno) + ": unterminated section header");
      section = trim(line.substr(1, line.size() - 2));
      if (section.empty()) throw ConfigError("line " + std::to_string(lineno) + ": empty section name");
      data.try_emplace(section);
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("line " + std::to_string(lineno) + ": expected key = value");
    }
    if (section.empty()) {
      throw ConfigError("line " + std::to_string(lineno) + ": key before any [section]");
    }
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty()) throw ConfigError("line " + std::to_string(lineno) + ": empty key");
    if (!data[section].emplace(key, value).second) {
      throw ConfigError("[" + section + "] duplicate key '" + key + "'");
    }
  }
  return data;
}

RunConfig config_from_ini(const IniData& ini) {
  RunConfig cfg;
  const std::set<std::string> known_sections = {"run",    "panel",    "buck",    "controller",
                                                "neural", "scenario", "inverter"};
  for (const auto& [section, keys] : ini) {
    if (!known_sections.count(section)) throw ConfigError("unknown section [" + section + "]");
    for (const auto& [key, value] : keys) {
      auto num = [&] { return to_double(section, key, value); };
      auto integer = [&] { return to_long(section, key, value); };
      bool ok = true;
      if (section == "run") {
        if (key == "seed") cfg.seed = static_cast<std::uint32_t>(integer());
        else if (key == "out_dir") cfg.out_dir = value;
        else ok = false;
      } else if (section == "panel") {
        PanelParams& p = cfg.panel ? *cfg.panel : cfg.panel.emplace();
        if (key == "i_ph_ref") p.i_ph_ref = num();
        else if (key == "i_s_ref") p.i_s_ref = num();
        else if (key == "a") p.a = num();
        else if (key == "r_s") p.r_s = num();
        else if (key == "r_sh") p.r_sh = num();
        else if (key == "n_s") p.n_s = num();
        else if (key == "k_i") p.k_i = num();
        else if (key == "g_ref") p.g_ref = num();
        else if (key == "t_ref") p.t_ref = num();
        else if (key == "e_g") p.e_g = num();
        else ok = false;
      } else if (section == "buck") {
        if (key == "l") cfg.buck.l = num();
        else if (key == "c") cfg.buck.c = num();
        else if (key == "r") cfg.buck.r = num();
        else if (key == "dt") cfg.dt = num();
        else ok = false;
      } else if (section == "controller") {
        if (key == "kind") cfg.controller_kind = controller_kind_from_string(value);
        else if (key == "gamma") cfg.controller.gamma = num();
        else if (key == "gamma_fine") cfg.controller.gamma_fine = num();
        else if (key == "sample_period_s") cfg.sample_period = num();
        else if (key == "dead_band") cfg.controller.dead_band_p = cfg.controller.dead_band_v = num();
        else if (key == "snap_band") cfg.controller.snap_band = num();
        else ok = false;
      } else if (section == "neural") {
        if (key == "hidden") cfg.hidden = static_cast<int>(integer());
        else if (key == "max_epochs") cfg.train.max_epochs = static_cast<int>(integer());
        else if (key == "lambda0") cfg.train.lambda0 = num();
        else if (key == "lambda_up") cfg.train.lambda_up = num();
        else if (key == "lambda_down") cfg.train.lambda_down = num();
        else if (key == "tol") cfg.train.tol = num();
        else if (key == "g_min") cfg.grid.g_min = num();
        else if (key == "g_max") cfg.grid.g_max = num();
        else if (key == "g_step") cfg.grid.g_step = num();
        else if (key == "t_min_c") cfg.grid.t_min_c = num();
        else if (key == "t_max_c") cfg.grid.t_max_c = num();
        else if (key == "t_step_c") cfg.grid.t_step_c = num();
        else if (key == "model_dir") cfg.model_dir = value;
        else ok = false;
      } else if (section == "scenario") {
        if (key == "preset") cfg.scenario_preset = value;
        else if (key == "duration") cfg.scenario_duration = num();
        else if (key == "segments") {
          cfg.scenario_segments = parse_segments(value);
          cfg.scenario_preset.clear();
        } else ok = false;
      } else if (section == "inverter") {
        if (key == "u_dc") cfg.inverter.u_dc = num();
        else if (key == "m") cfg.inverter.m = num();
        else if (key == "f_out") cfg.inverter.f_out = num();
        else if (key == "f_carrier") cfg.inverter.f_carrier = num();
        else if (key == "r_load") cfg.inverter.r_load = num();
        else if (key == "l_load") cfg.inverter.l_load = num();
        else if (key == "duration") cfg.inverter.duration = num();
        else ok = false;
      }
      if (!ok) throw ConfigError("unknown key '" + key + "' in section [" + section + "]");
    }
  }
  if (cfg.panel) {
    if (!(cfg.panel->i_ph_ref > 0.0) || !(cfg.panel->i_s_ref > 0.0)) {
      throw ConfigError("[panel] requires i_ph_ref, i_s_ref, a, r_s and r_sh");
    }
    try {
      cfg.panel->validate();
    } catch (const std::exception& e) {
      throw ConfigError(std::string("[panel] ") + e.what());
    }
  }
  return cfg;
}

RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file: " + path.string());
  std::ostringstream body;
  body << in.rdbuf();
  return config_from_ini(parse_ini(body.str()));
}

ScenarioProfile RunConfig::scenario() const {
  ScenarioProfile profile;
  if (!scenario_segments.empty()) {
    profile.segments = scenario_segments;
    profile.duration = scenario_duration.value_or(scenario_segments.back().t_end);
  } else if (scenario_preset == "stc") {
    profile = ScenarioProfile::stc(scenario_duration.value_or(0.4));
  } else if (scenario_preset == "step_irradiance") {
    profile = ScenarioProfile::step_irradiance(scenario_duration.value_or(1.0));
  } else {
    throw ConfigError("unknown scenario preset: '" + scenario_preset + "'");
  }
  try {
    profile.validate();
  } catch (const std::exception& e) {
    throw ConfigError(std::string("[scenario] ") + e.what());
  }
  return profile;
}

SimConfig RunConfig::sim_config() const {
  SimConfig sim;
  sim.panel = panel ? *panel : PanelParams::shipped_default();
  sim.buck = buck;
  sim.dt = dt;
  sim.controller = controller;
  sim.sample_period = sample_period;
  sim.seed = seed;
  sim.train = train;
  sim.train.seed = seed;
  sim.hidden = hidden;
  sim.grid = grid;
  // the feedforward duty map and the estimate bound follow the plant
  sim.controller.r_load = sim.buck.r;
  sim.controller.v_estimate_max =
      1.2 * open_circuit_voltage(sim.panel, {sim.panel.g_ref, sim.panel.t_ref});
  return sim;
}

std::string panel_to_ini(const PanelParams& p) {
  std::string out = "[panel]\n";
  out += "i_ph_ref = " + full_precision(p.i_ph_ref) + '\n';
  out += "i_s_ref = " + full_precision(p.i_s_ref) + '\n';
  out += "a = " + full_precision(p.a) + '\n';
  out += "r_s = " + full_precision(p.r_s) + '\n';
  out += "r_sh = " + full_precision(p.r_sh) + '\n';
  out += "n_s = " + full_precision(p.n_s) + '\n';
  out += "k_i = " + full_precision(p.k_i) + '\n';
  out += "g_ref = " + full_precision(p.g_ref) + '\n';
  out += "t_ref = " + full_precision(p.t_ref) + '\n';
  out += "e_g = " + full_precision(p.e_g) + '\n';
  return out;
}

}  // namespace pvsim
