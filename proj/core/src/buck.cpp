#include "pvsim/buck.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace pvsim {

void BuckParams::validate() const {
  if (!(l > 0.0) || !(c > 0.0) || !(r > 0.0)) {
    throw std::invalid_argument("BuckParams: l, c and r must be positive");
  }
}

BuckDerivatives derivatives(const BuckState& state, DutyCycle u, double v_in,
                            const BuckParams& params) {
  return {params.k1() * u.value() * v_in - params.k1() * state.v_out,
          params.k2() * state.i_l - params.k3() * state.v_out};
}

BuckState step(const BuckState& state, DutyCycle u, double v_in, double dt,
               const BuckParams& params) {
  if (!(dt > 0.0)) throw std::invalid_argument("step: dt must be positive");
  const double guard = 0.1 * std::min(params.l / params.r, params.r * params.c);
  if (dt > guard) {
    throw UnstableStep("buck step: dt exceeds 0.1*min(l/r, r*c)");
  }

  auto f = [&](const BuckState& x) { return derivatives(x, u, v_in, params); };
  const BuckDerivatives k1 = f(state);
  const BuckDerivatives k2 = f({state.i_l + 0.5 * dt * k1.di_l, state.v_out + 0.5 * dt * k1.dv_out});
  const BuckDerivatives k3 = f({state.i_l + 0.5 * dt * k2.di_l, state.v_out + 0.5 * dt * k2.dv_out});
  const BuckDerivatives k4 = f({state.i_l + dt * k3.di_l, state.v_out + dt * k3.dv_out});

  BuckState next;
  next.i_l = state.i_l + dt / 6.0 * (k1.di_l + 2.0 * k2.di_l + 2.0 * k3.di_l + k4.di_l);
  next.v_out = state.v_out + dt / 6.0 * (k1.dv_out + 2.0 * k2.dv_out + 2.0 * k3.dv_out + k4.dv_out);
  next.v_out = std::max(next.v_out, 0.0); // ideal diode clamp
  return next;
}

BuckState equilibrium(DutyCycle u, double v_in, const BuckParams& params) {
  params.validate();
  return {u.value() * v_in / params.r, u.value() * v_in};
}

}  // namespace pvsim
