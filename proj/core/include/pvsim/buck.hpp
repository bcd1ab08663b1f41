#pragma once

#include <algorithm>

#include "pvsim/errors.hpp"

namespace pvsim {

/// Averaged buck converter constants. The gains 1/L, 1/C and 1/(RC) are
/// recomputed on demand so they can never go stale.
struct BuckParams {
  double l = 1e-3;   // inductance [H]
  double c = 100e-6; // capacitance [F]
  double r = 3.0;    // load resistance [ohm]

  double k1() const { return 1.0 / l; }
  double k2() const { return 1.0 / c; }
  double k3() const { return 1.0 / (r * c); }

  void validate() const;
};

struct BuckState {
  double i_l = 0.0;   // inductor current [A]
  double v_out = 0.0; // output voltage [V], clamped at 0
};

/// Duty cycle saturated into [0, 1] on every write.
class DutyCycle {
 public:
  DutyCycle() = default;
  explicit DutyCycle(double u) : u_(std::clamp(u, 0.0, 1.0)) {}
  double value() const { return u_; }

 private:
  double u_ = 0.0;
};

struct BuckDerivatives {
  double di_l;   // [A/s]
  double dv_out; // [V/s]
};

BuckDerivatives derivatives(const BuckState& state, DutyCycle u, double v_in,
                            const BuckParams& params);

/// One classical RK4 step with u and v_in held constant. The step must
/// satisfy dt <= 0.1*min(l/r, r*c) or UnstableStep is thrown.
BuckState step(const BuckState& state, DutyCycle u, double v_in, double dt,
               const BuckParams& params);

/// Zero of the averaged dynamics: (u*v_in/r, u*v_in).
BuckState equilibrium(DutyCycle u, double v_in, const BuckParams& params);

}  // namespace pvsim
