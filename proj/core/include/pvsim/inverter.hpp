#pragma once

namespace pvsim {

/// Three-phase switching state; C_i = 1 means the upper switch of leg i
/// conducts.
struct SwitchState {
  bool c_a = false;
  bool c_b = false;
  bool c_c = false;
};

struct LegVoltages {
  double u_ao;
  double u_bo;
  double u_co;
};

/// Phase-to-neutral voltages of a star-connected load. Rows of the
/// conversion matrix sum to zero, so u_an + u_bn + u_cn == 0.
struct PhaseVoltages {
  double u_an;
  double u_bn;
  double u_cn;
};

struct LineVoltages {
  double u_ab;
  double u_bc;
  double u_ca;
};

/// Leg-to-midpoint voltages (c_i - 0.5) * u_dc.
LegVoltages leg_voltages(const SwitchState& s, double u_dc);

/// (1/3) * u_dc * [[2,-1,-1],[-1,2,-1],[-1,-1,2]] * [c_a, c_b, c_c]^T.
PhaseVoltages phase_voltages(const SwitchState& s, double u_dc);

/// Neutral-to-midpoint voltage, the mean of the leg voltages.
double neutral_voltage(const LegVoltages& legs);

/// Pairwise leg differences; they telescope to zero.
LineVoltages line_voltages(const LegVoltages& legs);

/// Naturally sampled sine-triangle modulator: per-phase sine references
/// displaced by 120 degrees against one shared triangular carrier.
SwitchState sine_pwm_switch(double t, double m, double f_out, double f_carrier);

}  // namespace pvsim
