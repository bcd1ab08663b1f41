#include "pvsim/controllers.hpp"

#include <cmath>
#include <stdexcept>

namespace pvsim {

std::string to_string(ControllerKind kind) {
  switch (kind) {
    case ControllerKind::cpoa: return "cpoa";
    case ControllerKind::ampo: return "ampo";
    case ControllerKind::ampo_ann: return "ampo_ann";
  }
  return "unknown";
}

ControllerKind controller_kind_from_string(const std::string& name) {
  if (name == "cpoa") return ControllerKind::cpoa;
  if (name == "ampo") return ControllerKind::ampo;
  if (name == "ampo_ann") return ControllerKind::ampo_ann;
  throw ConfigError("unknown controller kind: " + name);
}

void ControllerConfig::validate() const {
  if (!(gamma > 0.0) || !(gamma_fine > 0.0)) {
    throw std::invalid_argument("ControllerConfig: gamma and gamma_fine must be positive");
  }
  if (!(dead_band_p >= 0.0) || !(dead_band_v >= 0.0) || !(snap_band > 0.0) || !(r_load > 0.0)) {
    throw std::invalid_argument("ControllerConfig: invalid dead band, snap band or load");
  }
  if (polarity != 1.0 && polarity != -1.0) {
    throw std::invalid_argument("ControllerConfig: polarity must be +1 or -1");
  }
}

ControllerState ControllerState::initial(ControllerKind kind, double u0) {
  ControllerState s;
  s.kind = kind;
  s.u_ctrl = DutyCycle(u0);
  return s;
}

int sign3(double x, double dead_band) {
  if (x > dead_band) return 1;
  if (x < -dead_band) return -1;
  return 0;
}

Delta ampo_delta(int prev_sign, int curr_sign) {
  const int sum = prev_sign + curr_sign;
  return {(sum == 2 || sum == -2) ? sum : 0};
}

Delta ampo_delta(double dp, double dv, int prev_sign, const ControllerConfig& cfg) {
  return ampo_delta(prev_sign, sign3(dp, cfg.dead_band_p) * sign3(dv, cfg.dead_band_v));
}

std::pair<DutyCycle, ControllerState> cpoa_step(const Measurement& m, ControllerState s,
                                                const ControllerConfig& cfg) {
  if (s.kind != ControllerKind::cpoa) throw std::invalid_argument("cpoa_step: wrong kind");
  const double dp = m.p_pv - s.prev_p;
  if (!s.primed) {
    s.primed = true;
    s.u_ctrl = DutyCycle(s.u_ctrl.value() + cfg.gamma * s.prev_delta_sign);
  } else {
    const int sp = sign3(dp, cfg.dead_band_p);
    if (sp < 0) s.prev_delta_sign = -s.prev_delta_sign; // power fell: reverse
    if (sp != 0) s.u_ctrl = DutyCycle(s.u_ctrl.value() + cfg.gamma * s.prev_delta_sign);
  }
  s.prev_p = m.p_pv;
  s.prev_v = m.v_pv;
  return {s.u_ctrl, s};
}

namespace {

// Shared sign-logic update: two agreeing signs perturb by 2*step (the
// delta-weighted move), a fresh signal probes by one step, a disagreement
// (the at-MPP state) or no signal holds.
void ampo_update(ControllerState& s, const Measurement& m, const ControllerConfig& cfg,
                 double step) {
  const double dp = m.p_pv - s.prev_p;
  const double dv = m.v_pv - s.prev_v;
  const int curr = sign3(dp, cfg.dead_band_p) * sign3(dv, cfg.dead_band_v);
  const Delta delta = ampo_delta(s.prev_delta_sign, curr);
  if (delta.value != 0) {
    s.u_ctrl = DutyCycle(s.u_ctrl.value() + step * cfg.polarity * delta.value);
  } else if (curr != 0 && s.prev_delta_sign == 0) {
    s.u_ctrl = DutyCycle(s.u_ctrl.value() + step * cfg.polarity * curr);
  }
  s.prev_delta_sign = curr;
  s.prev_p = m.p_pv;
  s.prev_v = m.v_pv;
}

}  // namespace

std::pair<DutyCycle, ControllerState> ampo_step(const Measurement& m, ControllerState s,
                                                const ControllerConfig& cfg) {
  if (s.kind != ControllerKind::ampo) throw std::invalid_argument("ampo_step: wrong kind");
  if (!s.primed) {
    s.primed = true;
    s.prev_delta_sign = 0;
    s.u_ctrl = DutyCycle(s.u_ctrl.value() + cfg.gamma);
    s.prev_p = m.p_pv;
    s.prev_v = m.v_pv;
  } else {
    ampo_update(s, m, cfg, cfg.gamma);
  }
  return {s.u_ctrl, s};
}

std::pair<DutyCycle, ControllerState> ampo_ann_step(const Measurement& m,
                                                    const MppEstimate& est, ControllerState s,
                                                    const ControllerConfig& cfg) {
  if (s.kind != ControllerKind::ampo_ann) throw std::invalid_argument("ampo_ann_step: wrong kind");
  if (!(est.v_mpp > 0.0) || est.v_mpp > cfg.v_estimate_max || est.i_mpp < 0.0) {
    throw EstimateOutOfRange("ampo_ann_step: estimate outside the plausible panel range");
  }
  // duty implied by the estimate through the buck equilibrium relation
  const double u_ff = std::sqrt(cfg.r_load * est.i_mpp / est.v_mpp);
  if (!s.primed || std::abs(s.u_ctrl.value() - u_ff) > cfg.snap_band) {
    s.u_ctrl = DutyCycle(u_ff);
    s.prev_delta_sign = 0;
    s.primed = true;
    s.prev_p = m.p_pv;
    s.prev_v = m.v_pv;
  } else {
    ampo_update(s, m, cfg, cfg.gamma_fine);
  }
  return {s.u_ctrl, s};
}

std::pair<DutyCycle, ControllerState> controller_step(const Measurement& m,
                                                      const MppEstimate& est, ControllerState s,
                                                      const ControllerConfig& cfg) {
  switch (s.kind) {
    case ControllerKind::cpoa: return cpoa_step(m, s, cfg);
    case ControllerKind::ampo: return ampo_step(m, s, cfg);
    case ControllerKind::ampo_ann: return ampo_ann_step(m, est, s, cfg);
  }
  throw std::logic_error("controller_step: unreachable");
}

}  // namespace pvsim
