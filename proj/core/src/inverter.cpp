#include "pvsim/inverter.hpp"

#include <cmath>
#include <numbers>

namespace pvsim {

LegVoltages leg_voltages(const SwitchState& s, double u_dc) {
  auto leg = [u_dc](bool c) { return (c ? 0.5 : -0.5) * u_dc; };
  return {leg(s.c_a), leg(s.c_b), leg(s.c_c)};
}

PhaseVoltages phase_voltages(const SwitchState& s, double u_dc) {
  const double a = s.c_a ? 1.0 : 0.0;
  const double b = s.c_b ? 1.0 : 0.0;
  const double c = s.c_c ? 1.0 : 0.0;
  const double third = u_dc / 3.0;
  return {third * (2.0 * a - b - c), third * (-a + 2.0 * b - c), third * (-a - b + 2.0 * c)};
}

double neutral_voltage(const LegVoltages& legs) {
  return (legs.u_ao + legs.u_bo + legs.u_co) / 3.0;
}

LineVoltages line_voltages(const LegVoltages& legs) {
  return {legs.u_ao - legs.u_bo, legs.u_bo - legs.u_co, legs.u_co - legs.u_ao};
}

SwitchState sine_pwm_switch(double t, double m, double f_out, double f_carrier) {
  // triangle in [-1, 1]: -1 at carrier period boundaries, +1 mid-period
  const double frac = f_carrier * t - std::floor(f_carrier * t);
  const double carrier = 1.0 - 4.0 * std::abs(frac - 0.5);

  constexpr double two_pi = 2.0 * std::numbers::pi;
  constexpr double shift = two_pi / 3.0;
  const double phase = two_pi * f_out * t;
  return {m * std::sin(phase) >= carrier, m * std::sin(phase - shift) >= carrier,
          m * std::sin(phase - 2.0 * shift) >= carrier};
}

}  // namespace pvsim
