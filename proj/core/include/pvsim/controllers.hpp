#pragma once

#include <string>
#include <utility>

#include "pvsim/buck.hpp"
#include "pvsim/errors.hpp"

namespace pvsim {

enum class ControllerKind { cpoa, ampo, ampo_ann };

std::string to_string(ControllerKind kind);
ControllerKind controller_kind_from_string(const std::string& name);

/// One sampled panel operating point. Power is kept consistent with v*i.
struct Measurement {
  double v_pv = 0.0;
  double i_pv = 0.0;
  double p_pv = 0.0;

  Measurement() = default;
  Measurement(double v, double i) : v_pv(v), i_pv(i), p_pv(v * i) {}
};

/// Tuning shared by all three trackers.
///
/// `polarity` is the sign of d(v_panel)/d(duty) for the attached converter.
/// With the panel on the buck input, raising the duty draws more current and
/// pulls the panel voltage down, so the shipped plant uses -1.
struct ControllerConfig {
  double gamma = 0.01;       // fixed perturbation step [duty units]
  double gamma_fine = 0.002; // residual correction step of the ANN stage
  double dead_band_p = 1e-6; // [W]
  double dead_band_v = 1e-6; // [V]
  double polarity = -1.0;
  double snap_band = 0.01;   // ANN feedforward re-jump threshold [duty units]
  double r_load = 3.0;       // load resistance behind the buck [ohm]
  double v_estimate_max = 40.0; // plausibility bound for NN voltage estimates

  void validate() const;
};

/// Controller memory carried between sampling periods.
///
/// `prev_delta_sign` stores sign3(dP*dV) of the previous period for the
/// AMPO variants and the last perturbation direction for the classic
/// tracker. `primed` is false until the first sample has been consumed;
/// the first step always probes +gamma, since a converter at rest yields
/// identical measurements forever and no sign logic could get it moving.
struct ControllerState {
  double prev_p = 0.0;
  double prev_v = 0.0;
  int prev_delta_sign = 1;
  DutyCycle u_ctrl{0.0};
  bool primed = false;
  ControllerKind kind = ControllerKind::ampo;

  static ControllerState initial(ControllerKind kind, double u0 = 0.0);
};

/// Three-valued sign with a dead band around zero.
int sign3(double x, double dead_band);

/// Two-sample MPP position state.
struct Delta {
  int value = 0; // -2, 0 or +2
};

/// Collapses two consecutive sign3 values onto the three-valued position
/// state: agreement of nonzero signs keeps its doubled sign, everything
/// else reads "at MPP".
Delta ampo_delta(int prev_sign, int curr_sign);
Delta ampo_delta(double dp, double dv, int prev_sign, const ControllerConfig& cfg);

/// Neural estimate of the maximum power point fed to the ANN tracker.
struct MppEstimate {
  double v_mpp = 0.0;
  double i_mpp = 0.0;
  bool extrapolated = false;
};

/// Classic perturb-and-observe: keep the perturbation direction while the
/// power grows, reverse it when the power falls, hold on no signal.
std::pair<DutyCycle, ControllerState> cpoa_step(const Measurement& m, ControllerState s,
                                                const ControllerConfig& cfg);

/// Sign-based adaptive tracker: two agreeing signs of dP*dV perturb by
/// 2*gamma (the delta-weighted update), a fresh signal probes by gamma,
/// a disagreement or no signal holds the duty.
std::pair<DutyCycle, ControllerState> ampo_step(const Measurement& m, ControllerState s,
                                                const ControllerConfig& cfg);

/// Neural-assisted tracker: jumps to the duty implied by the estimated MPP
/// (u = sqrt(r_load * i_mpp / v_mpp), the buck equilibrium relation), then
/// runs the sign logic with the reduced step around that point.
std::pair<DutyCycle, ControllerState> ampo_ann_step(const Measurement& m,
                                                    const MppEstimate& est, ControllerState s,
                                                    const ControllerConfig& cfg);

/// Dispatch on the state's kind; `est` is only consulted by the ANN tracker.
std::pair<DutyCycle, ControllerState> controller_step(const Measurement& m,
                                                      const MppEstimate& est, ControllerState s,
                                                      const ControllerConfig& cfg);

}  // namespace pvsim
