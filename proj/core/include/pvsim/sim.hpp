#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "pvsim/buck.hpp"
#include "pvsim/controllers.hpp"
#include "pvsim/inverter.hpp"
#include "pvsim/neural.hpp"
#include "pvsim/pv_model.hpp"

namespace pvsim {

/// One piecewise segment of environmental conditions; linear ramp between
/// the endpoint values, constant when they coincide.
struct ProfileSegment {
  double t_begin = 0.0;
  double t_end = 0.0;
  EnvConditions env_begin;
  EnvConditions env_end;
};

/// Time-varying (G, T) input covering [0, duration] without gaps.
struct ScenarioProfile {
  double duration = 0.0;
  std::vector<ProfileSegment> segments;

  void validate() const;

  static ScenarioProfile constant(const EnvConditions& env, double duration);
  /// 1000 W/m^2 at 25 C.
  static ScenarioProfile stc(double duration = 0.4);
  /// 500 W/m^2 for 0.5 s, then 1000 W/m^2; 25 C throughout.
  static ScenarioProfile step_irradiance(double duration = 1.0, double switch_time = 0.5);
};

/// Right-continuous evaluation: at a switch instant the new segment wins.
EnvConditions profile_eval(const ScenarioProfile& profile, double t);

struct TraceRow {
  double t;
  double g;
  double t_cell;
  double v_pv;
  double i_pv;
  double p_pv;
  double duty;
  double v_out;
  double i_l;
  double p_mpp_oracle;
};

struct SimTrace {
  std::vector<TraceRow> rows;
};

struct SegmentStats {
  double t_begin = 0.0;
  double t_end = 0.0;
  double steady_state_power = 0.0;            // mean P over the final 20%
  double chatter = 0.0;                       // population std of P over the final 20% [W]
  std::optional<double> settle_time;          // within the segment, absolute time
};

struct Metrics {
  std::optional<double> settle_time; // first entry into the +-2% band held 50 samples
  double tracking_efficiency = 0.0;  // integral P_pv / integral P_mpp
  double steady_state_power = 0.0;   // steady power of the final segment
  std::vector<SegmentStats> segments;
};

struct SimConfig {
  PanelParams panel = PanelParams::shipped_default();
  BuckParams buck;
  double dt = 1e-5;            // integrator step [s]
  ControllerConfig controller;
  double sample_period = 1e-3; // controller period [s]
  std::uint32_t seed = 42;     // feeds NN initialization when training on the fly
  TrainOptions train;
  int hidden = 10;             // hidden units of on-the-fly trained estimators
  GridSpec grid;               // training grid of on-the-fly trained estimators
};

/// Trains both MPP estimators from the configured panel; the config seed
/// drives the weight initialization and the train/validation split.
MppEstimators train_estimators(const SimConfig& config);

/// Advances the buck converter at dt and the controller at its period,
/// with the panel coupled quasi-statically to the converter input (the
/// terminal voltage solved so the panel delivers the averaged input
/// current u*i_L each step). Records one row per controller period.
/// For the ANN tracker, pass trained estimators or leave null to train
/// on the fly from the configured panel.
SimTrace run_scenario(const ScenarioProfile& profile, ControllerKind kind,
                      const SimConfig& config, const MppEstimators* nets = nullptr);

Metrics compute_metrics(const SimTrace& trace);

struct ComparisonRow {
  ControllerKind kind;
  Metrics metrics;
};

struct Comparison {
  std::vector<ComparisonRow> rows;
  std::vector<SimTrace> traces; // parallel to rows
};

/// Runs each controller over the identical profile and configuration.
Comparison run_comparison(const ScenarioProfile& profile,
                          std::span<const ControllerKind> kinds, const SimConfig& config,
                          const MppEstimators* nets = nullptr);

/// Open-loop inverter demo: sine-PWM switching over a series RL load fed
/// from a stiff DC bus.
struct InverterConfig {
  double u_dc = 100.0;    // [V]
  double m = 0.8;         // modulation index
  double f_out = 50.0;    // [Hz]
  double f_carrier = 3000.0; // [Hz]
  double r_load = 10.0;   // [ohm]
  double l_load = 10e-3;  // [H]
  double duration = 0.1;  // [s]
  double dt = 1e-6;       // [s]
  int record_stride = 10; // record every N-th integrator step
};

struct InverterTraceRow {
  double t;
  double u_an;
  double u_bn;
  double u_cn;
  double i_a;
  double i_b;
  double i_c;
};

std::vector<InverterTraceRow> run_inverter_trace(const InverterConfig& config);

}  // namespace pvsim
