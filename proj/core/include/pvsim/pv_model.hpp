#pragma once

#include <optional>

#include "pvsim/errors.hpp"

namespace pvsim {

inline constexpr double k_boltzmann = 1.380649e-23;   // J/K
inline constexpr double q_electron = 1.602176634e-19; // C

/// Single-diode panel parameters at reference conditions.
struct PanelParams {
  double i_ph_ref = 0.0; // photo-current at reference [A]
  double i_s_ref = 0.0;  // diode saturation current at reference [A]
  double a = 1.3;        // diode ideality constant
  double r_s = 0.0;      // series resistance [ohm]
  double r_sh = 100.0;   // shunt resistance [ohm]
  double n_s = 36.0;     // series cell count
  double k_i = 0.0023;   // short-circuit temperature coefficient [A/K]
  double g_ref = 1000.0; // reference irradiance [W/m^2]
  double t_ref = 298.15; // reference temperature [K]
  double e_g = 1.12;     // bandgap energy [eV]

  void validate() const;

  /// Default panel calibrated against the shipped targets
  /// (26 V, 4.2692 A, 111 W at STC; V_oc 31.5 V; I_sc 5.8 A; 38 W at 500 W/m^2).
  /// Computed once per process and cached.
  static const PanelParams& shipped_default();
};

/// Ambient operating conditions seen by the panel.
struct EnvConditions {
  double g = 1000.0; // irradiance [W/m^2]
  double t = 298.15; // cell temperature [K]

  void validate() const;
};

/// A point on the panel curve. Power is stored redundantly and kept
/// consistent with v*i on construction.
struct OperatingPoint {
  double v = 0.0;
  double i = 0.0;
  double p = 0.0;

  OperatingPoint() = default;
  OperatingPoint(double v_, double i_);
};

struct EffectiveSources {
  double i_ph; // irradiance/temperature-scaled photo-current [A]
  double i_s;  // temperature-scaled saturation current [A]
  double v_t;  // module thermal voltage n_s*K*T/q [V]
};

EffectiveSources effective_sources(const PanelParams& params, const EnvConditions& env);

/// Panel current at terminal voltage v, by damped Newton on the implicit
/// diode equation. Residual below 1e-9 A or NonConvergence.
double solve_current(const PanelParams& params, const EnvConditions& env, double v);

/// Inverse of solve_current: terminal voltage at which the panel delivers
/// current i, clamped at 0 when i exceeds the short-circuit current.
double solve_voltage(const PanelParams& params, const EnvConditions& env, double i);

double power_at(const PanelParams& params, const EnvConditions& env, double v);

/// Open-circuit voltage found by bisection on I(v) = 0.
double open_circuit_voltage(const PanelParams& params, const EnvConditions& env);

/// Brute-force maximum power point: 2000-point sweep of [0, V_oc] followed
/// by golden-section refinement of the bracketing interval.
OperatingPoint mpp_oracle(const PanelParams& params, const EnvConditions& env);

/// Fits {i_ph_ref, i_s_ref, a, r_s, r_sh} so that at STC the maximum power
/// point, open-circuit voltage and short-circuit current each match within
/// 1%. An optional anchor pins the maximum power at half irradiance (within
/// 10%). Throws CalibrationFailure when the targets cannot be met.
PanelParams calibrate(const OperatingPoint& target, double v_oc, double i_sc,
                      std::optional<double> p_at_half_irradiance = std::nullopt);

}  // namespace pvsim
