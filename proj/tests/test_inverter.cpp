#include <doctest.h>

#include <array>
#include <cmath>
#include <numbers>
#include <random>
#include <set>

#include "pvsim/inverter.hpp"

using namespace pvsim;

namespace {

std::array<SwitchState, 8> all_states() {
  std::array<SwitchState, 8> states;
  for (int k = 0; k < 8; ++k) states[k] = {(k & 4) != 0, (k & 2) != 0, (k & 1) != 0};
  return states;
}

}  // namespace

TEST_CASE("leg voltages are half-bus excursions") {
  const LegVoltages low = leg_voltages({false, false, false}, 1.0);
  CHECK(low.u_ao == -0.5);
  CHECK(low.u_bo == -0.5);
  CHECK(low.u_co == -0.5);

  const LegVoltages high = leg_voltages({true, true, true}, 400.0);
  CHECK(high.u_ao == 200.0);
  CHECK(high.u_bo == 200.0);
  CHECK(high.u_co == 200.0);

  const LegVoltages mixed = leg_voltages({true, false, false}, 2.0);
  CHECK(mixed.u_ao == 1.0);
  CHECK(mixed.u_bo == -1.0);
  CHECK(mixed.u_co == -1.0);
}

TEST_CASE("phase voltages from the conversion matrix") {
  const PhaseVoltages v = phase_voltages({true, false, false}, 3.0);
  CHECK(v.u_an == doctest::Approx(2.0));
  CHECK(v.u_bn == doctest::Approx(-1.0));
  CHECK(v.u_cn == doctest::Approx(-1.0));

  const PhaseVoltages zero = phase_voltages({true, true, true}, 537.0);
  CHECK(zero.u_an == 0.0);
  CHECK(zero.u_bn == 0.0);
  CHECK(zero.u_cn == 0.0);
}

TEST_CASE("phase voltages equal leg voltages minus the neutral shift") {
  for (const SwitchState& s : all_states()) {
    const LegVoltages legs = leg_voltages(s, 1.0);
    const double u_no = neutral_voltage(legs);
    const PhaseVoltages v = phase_voltages(s, 1.0);
    CHECK(v.u_an == doctest::Approx(legs.u_ao - u_no).epsilon(1e-12));
    CHECK(v.u_bn == doctest::Approx(legs.u_bo - u_no).epsilon(1e-12));
    CHECK(v.u_cn == doctest::Approx(legs.u_co - u_no).epsilon(1e-12));
  }
}

TEST_CASE("neutral voltage special cases") {
  CHECK(neutral_voltage(leg_voltages({true, true, true}, 2.0)) == doctest::Approx(1.0));
  CHECK(neutral_voltage({1.5, -1.5, 0.0}) == doctest::Approx(0.0));
}

TEST_CASE("line voltages telescope to zero") {
  const LineVoltages l = line_voltages({1.0, 0.0, 0.0});
  CHECK(l.u_ab == 1.0);
  CHECK(l.u_bc == 0.0);
  CHECK(l.u_ca == -1.0);

  const LineVoltages eq = line_voltages({3.3, 3.3, 3.3});
  CHECK(eq.u_ab == 0.0);
  CHECK(eq.u_bc == 0.0);
  CHECK(eq.u_ca == 0.0);

  std::mt19937 rng(3);
  std::uniform_real_distribution<double> u(-100.0, 100.0);
  for (int k = 0; k < 50; ++k) {
    const LineVoltages r = line_voltages({u(rng), u(rng), u(rng)});
    // telescoping identity, up to roundoff of the differences
    CHECK(std::abs(r.u_ab + r.u_bc + r.u_ca) < 1e-12 * 100.0);
  }
}

TEST_CASE("all eight states stay on the canonical voltage levels and sum to zero") {
  std::mt19937 rng(11);
  std::uniform_real_distribution<double> bus(1.0, 800.0);
  for (int rep = 0; rep < 20; ++rep) {
    const double u_dc = bus(rng);
    for (const SwitchState& s : all_states()) {
      const PhaseVoltages v = phase_voltages(s, u_dc);
      CHECK(std::abs(v.u_an + v.u_bn + v.u_cn) <= 1e-12 * u_dc);
      for (double phase : {v.u_an, v.u_bn, v.u_cn}) {
        const double scaled = phase / u_dc * 3.0; // in {0, +-1, +-2}
        CHECK(std::abs(scaled - std::round(scaled)) < 1e-12);
        CHECK(std::abs(std::round(scaled)) <= 2.0);
      }
    }
  }
}

TEST_CASE("zero reference gives half duty on every leg") {
  const double f_c = 3000.0;
  const int samples = 10000;
  int on = 0;
  for (int k = 0; k < samples; ++k) {
    if (sine_pwm_switch(k / (f_c * samples), 0.0, 50.0, f_c).c_a) ++on;
  }
  CHECK(std::abs(on / double(samples) - 0.5) < 0.01);
}

TEST_CASE("pwm fundamental amplitude is m*u_dc/2") {
  const double m = 0.8, f_out = 50.0, f_c = 3000.0, u_dc = 100.0;
  const double period = 1.0 / f_out;
  const int n = 200000;
  const double dt = period / n;
  double a1 = 0.0, b1 = 0.0;
  for (int k = 0; k < n; ++k) {
    const double t = k * dt;
    const double u_an = phase_voltages(sine_pwm_switch(t, m, f_out, f_c), u_dc).u_an;
    a1 += u_an * std::sin(2.0 * std::numbers::pi * f_out * t) * dt;
    b1 += u_an * std::cos(2.0 * std::numbers::pi * f_out * t) * dt;
  }
  const double amplitude = 2.0 / period * std::hypot(a1, b1);
  CHECK(amplitude == doctest::Approx(m * u_dc / 2.0).epsilon(0.05));
}

TEST_CASE("modulator is pure in time") {
  for (double t : {0.0, 1.23e-4, 0.5, 0.7771}) {
    const SwitchState a = sine_pwm_switch(t, 0.8, 50.0, 3000.0);
    const SwitchState b = sine_pwm_switch(t, 0.8, 50.0, 3000.0);
    CHECK(a.c_a == b.c_a);
    CHECK(a.c_b == b.c_b);
    CHECK(a.c_c == b.c_c);
  }
}
