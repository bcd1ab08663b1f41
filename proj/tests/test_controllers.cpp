#include <doctest.h>

#include <cmath>
#include <random>

#include "pvsim/controllers.hpp"
#include "pvsim/pv_model.hpp"

using namespace pvsim;

namespace {

const EnvConditions stc{1000.0, 298.15};

// quasi-static plant with the panel voltage commanded directly: v = u * v_oc,
// so raising the duty raises the voltage (polarity +1)
struct StaticPlant {
  const PanelParams& panel = PanelParams::shipped_default();
  double v_oc = open_circuit_voltage(panel, stc);

  Measurement measure(double duty) const {
    const double v = duty * v_oc;
    return {v, solve_current(panel, stc, v)};
  }
};

ControllerConfig static_config() {
  ControllerConfig cfg;
  cfg.polarity = 1.0;
  return cfg;
}

}  // namespace

TEST_CASE("sign3") {
  CHECK(sign3(5.3, 1e-6) == 1);
  CHECK(sign3(0.0, 1e-6) == 0);
  CHECK(sign3(-1e-12, 1e-6) == 0); // dead band
  CHECK(sign3(-0.2, 1e-6) == -1);
}

TEST_CASE("ampo delta over all nine sign pairs") {
  for (int prev : {-1, 0, 1}) {
    for (int curr : {-1, 0, 1}) {
      const int d = ampo_delta(prev, curr).value;
      CHECK((d == -2 || d == 0 || d == 2));
      if (prev == curr && prev != 0) {
        CHECK(d == 2 * curr);
      } else {
        CHECK(d == 0);
      }
    }
  }
  CHECK(ampo_delta(-1, -1).value == -2); // left of the peak
  CHECK(ampo_delta(-1, +1).value == 0);  // at the peak
  CHECK(ampo_delta(+1, -1).value == 0);
  CHECK(ampo_delta(+1, +1).value == +2); // right of the peak
}

TEST_CASE("classic tracker keeps direction on rising power and holds on no signal") {
  const ControllerConfig cfg = static_config();
  ControllerState s = ControllerState::initial(ControllerKind::cpoa, 0.5);
  s.primed = true;
  s.prev_p = 50.0;
  s.prev_v = 20.0;
  s.prev_delta_sign = 1; // previous move was +gamma

  auto [up, s1] = cpoa_step(Measurement(21.0, 51.0 / 21.0), s, cfg);
  CHECK(up.value() == doctest::Approx(0.5 + cfg.gamma));

  auto [hold, s2] = cpoa_step(Measurement(20.0, 50.0 / 20.0), s, cfg);
  CHECK(hold.value() == 0.5); // dP inside the dead band

  auto [down, s3] = cpoa_step(Measurement(21.0, 49.0 / 21.0), s, cfg);
  CHECK(down.value() == doctest::Approx(0.5 - cfg.gamma)); // power fell: reversed
}

TEST_CASE("classic tracker oscillates near the maximum power point") {
  const StaticPlant plant;
  const ControllerConfig cfg = static_config();
  ControllerState s = ControllerState::initial(ControllerKind::cpoa, 20.0 / plant.v_oc);
  DutyCycle duty = s.u_ctrl;
  const double v_mpp = mpp_oracle(plant.panel, stc).v;

  for (int k = 0; k < 300; ++k) std::tie(duty, s) = cpoa_step(plant.measure(duty.value()), s, cfg);
  for (int k = 0; k < 50; ++k) {
    std::tie(duty, s) = cpoa_step(plant.measure(duty.value()), s, cfg);
    CHECK(std::abs(duty.value() * plant.v_oc - v_mpp) <= 2.0 * cfg.gamma * plant.v_oc);
  }
}

TEST_CASE("adaptive tracker holds at the peak state") {
  const ControllerConfig cfg = static_config();
  ControllerState s = ControllerState::initial(ControllerKind::ampo, 0.6);
  s.primed = true;
  s.prev_p = 100.0;
  s.prev_v = 25.0;
  s.prev_delta_sign = +1;

  // power falls while voltage rises: sign flips, delta = 0, duty held
  auto [duty, s1] = ampo_step(Measurement(25.5, 99.0 / 25.5), s, cfg);
  CHECK(duty.value() == 0.6);
  CHECK(s1.prev_delta_sign == -1);
}

TEST_CASE("adaptive tracker leaves duty unchanged on identical measurements") {
  const ControllerConfig cfg = static_config();
  const StaticPlant plant;
  ControllerState s = ControllerState::initial(ControllerKind::ampo, 0.7);
  DutyCycle duty = s.u_ctrl;
  // prime with real samples, then freeze the plant
  std::tie(duty, s) = ampo_step(plant.measure(duty.value()), s, cfg);
  std::tie(duty, s) = ampo_step(plant.measure(duty.value()), s, cfg);
  const Measurement frozen = plant.measure(duty.value());
  std::tie(duty, s) = ampo_step(frozen, s, cfg); // may still act on history
  const double before = duty.value();
  std::tie(duty, s) = ampo_step(frozen, s, cfg); // two identical in a row: hold
  CHECK(duty.value() == before);
  std::tie(duty, s) = ampo_step(frozen, s, cfg);
  CHECK(duty.value() == before);
}

TEST_CASE("duty stays saturated under random measurements") {
  const ControllerConfig cfg = static_config();
  std::mt19937 rng(5);
  std::uniform_real_distribution<double> uv(0.0, 40.0);
  std::uniform_real_distribution<double> ui(0.0, 6.0);
  for (ControllerKind kind : {ControllerKind::cpoa, ControllerKind::ampo}) {
    ControllerState s = ControllerState::initial(kind, 0.99);
    DutyCycle duty = s.u_ctrl;
    for (int k = 0; k < 500; ++k) {
      const Measurement m(uv(rng), ui(rng));
      std::tie(duty, s) = controller_step(m, {}, s, cfg);
      CHECK(duty.value() >= 0.0);
      CHECK(duty.value() <= 1.0);
    }
  }
}

TEST_CASE("adaptive tracker climbs within 5% of the peak from a grid of starts") {
  const StaticPlant plant;
  const ControllerConfig cfg = static_config();
  const double p_mpp = mpp_oracle(plant.panel, stc).p;
  for (int k = 0; k < 20; ++k) {
    const double v0 = 5.0 + 25.0 * k / 19.0;
    ControllerState s = ControllerState::initial(ControllerKind::ampo, v0 / plant.v_oc);
    DutyCycle duty = s.u_ctrl;
    for (int it = 0; it < 200; ++it) {
      std::tie(duty, s) = ampo_step(plant.measure(duty.value()), s, cfg);
    }
    const double p_final = plant.measure(duty.value()).p_pv;
    CAPTURE(v0);
    CHECK(p_final >= 0.95 * p_mpp);
  }
}

TEST_CASE("adaptive tracker raises power from the left of the peak") {
  const StaticPlant plant;
  const ControllerConfig cfg = static_config();
  ControllerState s = ControllerState::initial(ControllerKind::ampo, 20.0 / plant.v_oc);
  DutyCycle duty = s.u_ctrl;
  const double p0 = plant.measure(duty.value()).p_pv;
  for (int it = 0; it < 30; ++it) std::tie(duty, s) = ampo_step(plant.measure(duty.value()), s, cfg);
  CHECK(plant.measure(duty.value()).p_pv > p0);
  CHECK(duty.value() * plant.v_oc > 20.0); // moved toward 26 V
}

TEST_CASE("neural tracker rejects implausible estimates") {
  const ControllerConfig cfg = static_config();
  ControllerState s = ControllerState::initial(ControllerKind::ampo_ann, 0.5);
  CHECK_THROWS_AS(ampo_ann_step(Measurement(26.0, 4.0), {55.0, 4.0, false}, s, cfg),
                  EstimateOutOfRange);
  CHECK_THROWS_AS(ampo_ann_step(Measurement(26.0, 4.0), {-1.0, 4.0, false}, s, cfg),
                  EstimateOutOfRange);
}

TEST_CASE("neural tracker is a fixed point on a consistent estimate") {
  ControllerConfig cfg = static_config();
  cfg.r_load = 3.0;
  const double v = 26.0, i = 4.2;
  const double u = std::sqrt(cfg.r_load * i / v); // feedforward duty of this point
  ControllerState s = ControllerState::initial(ControllerKind::ampo_ann, u);
  s.primed = true;
  s.prev_p = v * i;
  s.prev_v = v;
  s.prev_delta_sign = 0;

  auto [duty, s1] = ampo_ann_step(Measurement(v, i), {v, i, false}, s, cfg);
  CHECK(duty.value() == u); // no snap, no signal: held
}

TEST_CASE("neural tracker jumps to the feedforward duty when far away") {
  ControllerConfig cfg = static_config();
  cfg.r_load = 3.0;
  ControllerState s = ControllerState::initial(ControllerKind::ampo_ann, 0.0);
  auto [duty, s1] = ampo_ann_step(Measurement(31.5, 0.0), {26.0, 4.27, false}, s, cfg);
  CHECK(duty.value() == doctest::Approx(std::sqrt(3.0 * 4.27 / 26.0)));
}

TEST_CASE("controller kind names round-trip") {
  for (ControllerKind kind :
       {ControllerKind::cpoa, ControllerKind::ampo, ControllerKind::ampo_ann}) {
    CHECK(controller_kind_from_string(to_string(kind)) == kind);
  }
  CHECK_THROWS_AS(controller_kind_from_string("nope"), ConfigError);
}
