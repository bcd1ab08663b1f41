#include <benchmark/benchmark.h>

#include "pvsim/sim.hpp"

using namespace pvsim;

namespace {

const EnvConditions stc{1000.0, 298.15};

void BM_SolveCurrent(benchmark::State& state) {
  const PanelParams& p = PanelParams::shipped_default();
  double v = 0.0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(solve_current(p, stc, v));
    v = v < 30.0 ? v + 0.1 : 0.0;
  }
}
BENCHMARK(BM_SolveCurrent);

void BM_SolveVoltage(benchmark::State& state) {
  const PanelParams& p = PanelParams::shipped_default();
  double i = 0.0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(solve_voltage(p, stc, i));
    i = i < 5.5 ? i + 0.05 : 0.0;
  }
}
BENCHMARK(BM_SolveVoltage);

void BM_MppOracle(benchmark::State& state) {
  const PanelParams& p = PanelParams::shipped_default();
  for (auto _ : state) {
    benchmark::DoNotOptimize(mpp_oracle(p, stc));
  }
}
BENCHMARK(BM_MppOracle);

void BM_BuckStep(benchmark::State& state) {
  const BuckParams p;
  BuckState s{1.0, 10.0};
  for (auto _ : state) {
    s = step(s, DutyCycle(0.7), 26.0, 1e-5, p);
    benchmark::DoNotOptimize(s);
  }
}
BENCHMARK(BM_BuckStep);

void BM_AmpoStep(benchmark::State& state) {
  const ControllerConfig cfg;
  ControllerState s = ControllerState::initial(ControllerKind::ampo, 0.5);
  DutyCycle duty = s.u_ctrl;
  double v = 25.0;
  for (auto _ : state) {
    std::tie(duty, s) = ampo_step(Measurement(v, 4.0), s, cfg);
    v = v < 27.0 ? v + 0.01 : 25.0;
    benchmark::DoNotOptimize(duty);
  }
}
BENCHMARK(BM_AmpoStep);

void BM_LmEpoch(benchmark::State& state) {
  Dataset data;
  for (int g = 0; g < 20; ++g) {
    for (int t = 0; t < 10; ++t) {
      data.rows.push_back({200.0 + 40.0 * g, 288.15 + 6.0 * t, 20.0 + 0.006 * g * 40.0,
                           1.0 + 0.0045 * g * 40.0});
    }
  }
  TrainOptions opts;
  opts.max_epochs = 1;
  for (auto _ : state) {
    MlpNetwork net = init_network(10, 42);
    benchmark::DoNotOptimize(lm_train(net, data, Target::v_mpp, opts));
  }
}
BENCHMARK(BM_LmEpoch);

void BM_ScenarioStc(benchmark::State& state) {
  const SimConfig cfg;
  const ScenarioProfile profile = ScenarioProfile::stc(0.02);
  for (auto _ : state) {
    benchmark::DoNotOptimize(run_scenario(profile, ControllerKind::ampo, cfg));
  }
}
BENCHMARK(BM_ScenarioStc);

}  // namespace

BENCHMARK_MAIN();
