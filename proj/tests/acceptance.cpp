// Acceptance suite: exercises the full toolkit end to end and prints one
// pass/fail line per criterion. Exits nonzero if any criterion fails.

#include <array>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <random>
#include <string>
#include <vector>

#include "pvsim/csv.hpp"
#include "pvsim/sim.hpp"

using namespace pvsim;

namespace {

int failures = 0;

void report(int index, const std::string& name, bool pass, const std::string& detail) {
  std::printf("[%s] criterion %d: %s  (%s)\n", pass ? "PASS" : "FAIL", index, name.c_str(),
              detail.c_str());
  if (!pass) ++failures;
}

std::string fmt(const char* format, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, format, args...);
  return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

struct TimedRun {
  SimTrace trace;
  Metrics metrics;
  double wall_s;
};

TimedRun timed_run(const ScenarioProfile& profile, ControllerKind kind, const SimConfig& cfg,
                   const MppEstimators* nets) {
  const auto t0 = std::chrono::steady_clock::now();
  SimTrace trace = run_scenario(profile, kind, cfg, nets);
  const double wall = seconds_since(t0);
  Metrics m = compute_metrics(trace);
  return {std::move(trace), std::move(m), wall};
}

bool within(double got, double want, double tol_rel) {
  return std::abs(got - want) <= tol_rel * want;
}

}  // namespace

int main() {
  const SimConfig cfg; // shipped defaults: calibrated panel, 1 mH / 100 uF / 3 ohm buck
  const MppEstimators nets = train_estimators(cfg);

  const ScenarioProfile stc = ScenarioProfile::stc();
  const TimedRun cpoa = timed_run(stc, ControllerKind::cpoa, cfg, nullptr);
  const TimedRun ampo = timed_run(stc, ControllerKind::ampo, cfg, nullptr);
  const TimedRun ann = timed_run(stc, ControllerKind::ampo_ann, cfg, &nets);

  // 1. steady state at standard conditions, runtime bounded
  {
    const double p_ampo = ampo.metrics.steady_state_power;
    const double p_ann = ann.metrics.steady_state_power;
    const double slowest = std::max({cpoa.wall_s, ampo.wall_s, ann.wall_s});
    const bool pass = within(p_ampo, 111.0, 0.02) && within(p_ann, 111.0, 0.02) && slowest < 10.0;
    report(1, "STC steady state within 2% of 111 W", pass,
           fmt("ampo %.2f W, ampo_ann %.2f W, slowest run %.2f s", p_ampo, p_ann, slowest));
  }

  // 2. the neural stage at least halves the settle time from duty 0
  {
    const bool settled = ampo.metrics.settle_time && ann.metrics.settle_time;
    const double t_ampo = settled ? *ampo.metrics.settle_time : -1.0;
    const double t_ann = settled ? *ann.metrics.settle_time : -1.0;
    const bool pass = settled && t_ann <= 0.5 * t_ampo;
    report(2, "settle time: ampo_ann <= 0.5 x ampo", pass,
           fmt("ampo %.3f s, ampo_ann %.3f s", t_ampo, t_ann));
  }

  // 3. irradiance step: segment steady powers near 38 W and 111 W
  const ScenarioProfile step_profile = ScenarioProfile::step_irradiance();
  const TimedRun step_ampo = timed_run(step_profile, ControllerKind::ampo, cfg, nullptr);
  const TimedRun step_ann = timed_run(step_profile, ControllerKind::ampo_ann, cfg, &nets);
  {
    bool pass = step_ampo.metrics.segments.size() == 2 && step_ann.metrics.segments.size() == 2;
    std::string detail = "missing segments";
    if (pass) {
      const auto& sa = step_ampo.metrics.segments;
      const auto& sn = step_ann.metrics.segments;
      pass = within(sa[0].steady_state_power, 38.0, 0.10) &&
             within(sa[1].steady_state_power, 111.0, 0.02) &&
             within(sn[0].steady_state_power, 38.0, 0.10) &&
             within(sn[1].steady_state_power, 111.0, 0.02);
      detail = fmt("ampo %.2f/%.2f W, ampo_ann %.2f/%.2f W", sa[0].steady_state_power,
                   sa[1].steady_state_power, sn[0].steady_state_power, sn[1].steady_state_power);
    }
    report(3, "step scenario steady powers (38 W +-10%, 111 W +-2%)", pass, detail);
  }

  // 4. chattering: the neural stage is strictly quieter on both presets
  {
    const double stc_ampo = ampo.metrics.segments.back().chatter;
    const double stc_ann = ann.metrics.segments.back().chatter;
    bool pass = stc_ann < stc_ampo;
    for (std::size_t k = 0; k < 2; ++k) {
      pass = pass && step_ann.metrics.segments[k].chatter < step_ampo.metrics.segments[k].chatter;
    }
    report(4, "chatter: std(ampo_ann) < std(ampo) on both presets", pass,
           fmt("stc %.4f vs %.4f W; step %.4f/%.4f vs %.4f/%.4f W", stc_ann, stc_ampo,
               step_ann.metrics.segments[0].chatter, step_ann.metrics.segments[1].chatter,
               step_ampo.metrics.segments[0].chatter, step_ampo.metrics.segments[1].chatter));
  }

  // 5. estimator fidelity and gradient correctness
  {
    const Dataset data = generate_dataset(cfg.panel, cfg.grid);
    TrainOptions opts = cfg.train;
    opts.seed = cfg.seed;
    MlpNetwork v_net = init_network(cfg.hidden, cfg.seed);
    MlpNetwork i_net = init_network(cfg.hidden, cfg.seed);
    const TrainReport rv = lm_train(v_net, data, Target::v_mpp, opts);
    const TrainReport ri = lm_train(i_net, data, Target::i_mpp, opts);

    double worst_grad = 0.0;
    std::mt19937 rng(99);
    std::uniform_real_distribution<double> ux(-1.0, 1.0);
    for (int rep = 0; rep < 100; ++rep) {
      MlpNetwork net = init_network(3 + rep % 6, 5000 + rep);
      const std::array<double, 2> x{ux(rng), ux(rng)};
      const std::vector<double> jac = jacobian(net, std::span(&x, 1));
      auto param = [&net](int k) -> double& {
        const int h = net.hidden;
        if (k < 2 * h) return net.w1[k];
        if (k < 3 * h) return net.b1[k - 2 * h];
        if (k < 4 * h) return net.w2[k - 3 * h];
        return net.b2;
      };
      for (int k = 0; k < net.n_params(); ++k) {
        double& w = param(k);
        const double keep = w;
        const double h = 1e-6;
        w = keep + h;
        const double fp = forward_normalized(net, x);
        w = keep - h;
        const double fm = forward_normalized(net, x);
        w = keep;
        const double fd = (fp - fm) / (2.0 * h);
        worst_grad = std::max(worst_grad, std::abs(jac[k] - fd) / std::max(std::abs(fd), 1e-6));
      }
    }
    const bool pass = rv.validation_max_rel_err < 0.01 && ri.validation_max_rel_err < 0.01 &&
                      worst_grad < 1e-5;
    report(5, "NN fidelity < 1% and gradient check < 1e-5", pass,
           fmt("val err v %.2e, i %.2e; worst gradient deviation %.2e",
               rv.validation_max_rel_err, ri.validation_max_rel_err, worst_grad));
  }

  // 6. model correctness suite
  {
    // implicit-solver residual over random draws
    std::mt19937 rng(7);
    std::uniform_real_distribution<double> u01(0.0, 1.0);
    double worst_residual = 0.0;
    for (int k = 0; k < 1000; ++k) {
      PanelParams p = cfg.panel;
      p.i_ph_ref = 1.0 + 9.0 * u01(rng);
      p.i_s_ref = std::pow(10.0, -16.0 + 8.0 * u01(rng));
      p.a = 0.7 + 1.3 * u01(rng);
      p.r_s = u01(rng);
      p.r_sh = 5.0 + 495.0 * u01(rng);
      const EnvConditions env{100.0 + 1100.0 * u01(rng), 278.0 + 80.0 * u01(rng)};
      const double v = u01(rng) * open_circuit_voltage(p, env);
      const double i = solve_current(p, env, v);
      const EffectiveSources s = effective_sources(p, env);
      const double residual = s.i_ph - s.i_s * std::expm1((v + p.r_s * i) / (p.a * s.v_t)) -
                              (v + p.r_s * i) / p.r_sh - i;
      worst_residual = std::max(worst_residual, std::abs(residual));
    }

    // single-peak power curves across the plotted condition families
    bool unimodal = true;
    auto count_maxima = [&](const EnvConditions& env) {
      const double v_oc = open_circuit_voltage(cfg.panel, env);
      std::vector<double> power(500);
      for (int k = 0; k < 500; ++k) power[k] = power_at(cfg.panel, env, v_oc * k / 499);
      int maxima = 0;
      for (int k = 1; k < 499; ++k) {
        if (power[k] >= power[k - 1] && power[k] > power[k + 1]) ++maxima;
      }
      return maxima;
    };
    for (double tc = 25.0; tc <= 75.0; tc += 10.0) {
      unimodal = unimodal && count_maxima({1000.0, tc + 273.15}) == 1;
    }
    for (double g = 200.0; g <= 1000.0; g += 100.0) {
      unimodal = unimodal && count_maxima({g, 298.15}) == 1;
    }

    // integrator order via step halving
    const BuckParams bp{1e-3, 1e-4, 10.0};
    auto integrate = [&](double dt, long n) {
      BuckState s;
      for (long k = 0; k < n; ++k) s = step(s, DutyCycle(0.7), 26.0, dt, bp);
      return s;
    };
    const double horizon = 2e-3;
    const BuckState ref = integrate(horizon / 2048, 2048);
    const BuckState coarse = integrate(horizon / 256, 256);
    const BuckState fine = integrate(horizon / 512, 512);
    const double ratio = std::hypot(coarse.i_l - ref.i_l, coarse.v_out - ref.v_out) /
                         std::hypot(fine.i_l - ref.i_l, fine.v_out - ref.v_out);

    // inverter switch-state table
    bool inverter_ok = true;
    for (int k = 0; k < 8; ++k) {
      const SwitchState s{(k & 4) != 0, (k & 2) != 0, (k & 1) != 0};
      const PhaseVoltages v = phase_voltages(s, 700.0);
      inverter_ok = inverter_ok && std::abs(v.u_an + v.u_bn + v.u_cn) <= 1e-12 * 700.0;
      for (double phase : {v.u_an, v.u_bn, v.u_cn}) {
        const double scaled = phase / 700.0 * 3.0;
        inverter_ok = inverter_ok && std::abs(scaled - std::round(scaled)) < 1e-12 &&
                      std::abs(std::round(scaled)) <= 2.0;
      }
    }

    // three-valued sign logic over every sign pair
    bool delta_ok = true;
    for (int prev : {-1, 0, 1}) {
      for (int curr : {-1, 0, 1}) {
        const int d = ampo_delta(prev, curr).value;
        const int want = (prev == curr && prev != 0) ? 2 * curr : 0;
        delta_ok = delta_ok && d == want;
      }
    }

    const bool pass = worst_residual < 1e-9 && unimodal && ratio > 12.0 && ratio < 20.0 &&
                      inverter_ok && delta_ok;
    report(6, "model correctness suite", pass,
           fmt("residual %.2e A, unimodal %d, rk4 ratio %.1f, inverter %d, delta %d",
               worst_residual, unimodal ? 1 : 0, ratio, inverter_ok ? 1 : 0, delta_ok ? 1 : 0));
  }

  // 7. determinism of the full comparison pipeline
  {
    const std::array<ControllerKind, 3> kinds = {ControllerKind::cpoa, ControllerKind::ampo,
                                                 ControllerKind::ampo_ann};
    const Comparison a = run_comparison(stc, kinds, cfg);
    const Comparison b = run_comparison(stc, kinds, cfg);
    bool pass = comparison_to_csv(a) == comparison_to_csv(b);
    for (std::size_t k = 0; k < kinds.size(); ++k) {
      pass = pass && trace_to_csv(a.traces[k]) == trace_to_csv(b.traces[k]);
    }
    report(7, "repeated comparison is byte-identical", pass,
           pass ? "all CSVs match" : "output mismatch");
  }

  std::printf("%s: %d of 7 criteria failed\n", failures == 0 ? "OK" : "FAILED", failures);
  return failures == 0 ? 0 : 1;
}
