#include "pvsim/sim.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <stdexcept>

namespace pvsim {

void ScenarioProfile::validate() const {
  if (!(duration >= 0.0)) throw std::invalid_argument("ScenarioProfile: negative duration");
  if (segments.empty()) throw std::invalid_argument("ScenarioProfile: no segments");
  if (segments.front().t_begin != 0.0) {
    throw std::invalid_argument("ScenarioProfile: first segment must start at 0");
  }
  for (std::size_t k = 0; k < segments.size(); ++k) {
    const auto& s = segments[k];
    if (!(s.t_begin < s.t_end)) {
      throw std::invalid_argument("ScenarioProfile: segment times must increase");
    }
    if (k + 1 < segments.size() && segments[k + 1].t_begin != s.t_end) {
      throw std::invalid_argument("ScenarioProfile: segments must cover the duration without gaps");
    }
    s.env_begin.validate();
    s.env_end.validate();
  }
  if (segments.back().t_end < duration) {
    throw std::invalid_argument("ScenarioProfile: segments end before the duration");
  }
}

ScenarioProfile ScenarioProfile::constant(const EnvConditions& env, double duration) {
  return {duration, {{0.0, std::max(duration, 1e-12), env, env}}};
}

ScenarioProfile ScenarioProfile::stc(double duration) {
  return constant({1000.0, 298.15}, duration);
}

ScenarioProfile ScenarioProfile::step_irradiance(double duration, double switch_time) {
  const EnvConditions low{500.0, 298.15};
  const EnvConditions high{1000.0, 298.15};
  return {duration, {{0.0, switch_time, low, low}, {switch_time, duration, high, high}}};
}

EnvConditions profile_eval(const ScenarioProfile& profile, double t) {
  if (t < 0.0 || t > profile.duration) {
    throw OutOfRange("profile_eval: t outside [0, duration]");
  }
  for (const auto& s : profile.segments) {
    // right-continuous: the segment starting at t wins at a switch instant
    const bool last = &s == &profile.segments.back();
    if (t >= s.t_begin && (t < s.t_end || last)) {
      const double span = s.t_end - s.t_begin;
      const double w = span > 0.0 ? std::clamp((t - s.t_begin) / span, 0.0, 1.0) : 0.0;
      return {s.env_begin.g + w * (s.env_end.g - s.env_begin.g),
              s.env_begin.t + w * (s.env_end.t - s.env_begin.t)};
    }
  }
  throw OutOfRange("profile_eval: no segment covers t");
}

MppEstimators train_estimators(const SimConfig& config) {
  const Dataset data = generate_dataset(config.panel, config.grid);
  TrainOptions opts = config.train;
  opts.seed = config.seed;
  MppEstimators nets{init_network(config.hidden, config.seed),
                     init_network(config.hidden, config.seed)};
  lm_train(nets.v_net, data, Target::v_mpp, opts);
  lm_train(nets.i_net, data, Target::i_mpp, opts);
  return nets;
}

namespace {

class OracleCache {
 public:
  explicit OracleCache(const PanelParams& params) : params_(params) {}

  const OperatingPoint& at(const EnvConditions& env) {
    const auto key = std::make_pair(env.g, env.t);
    auto it = cache_.find(key);
    if (it == cache_.end()) it = cache_.emplace(key, mpp_oracle(params_, env)).first;
    return it->second;
  }

 private:
  const PanelParams& params_;
  std::map<std::pair<double, double>, OperatingPoint> cache_;
};

}  // namespace

SimTrace run_scenario(const ScenarioProfile& profile, ControllerKind kind,
                      const SimConfig& config, const MppEstimators* nets) {
  profile.validate();
  config.panel.validate();
  config.buck.validate();
  config.controller.validate();
  if (!(config.sample_period > 0.0) || !(config.dt > 0.0)) {
    throw std::invalid_argument("run_scenario: periods must be positive");
  }

  SimTrace trace;
  if (profile.duration <= 0.0) return trace;

  MppEstimators trained;
  if (kind == ControllerKind::ampo_ann && nets == nullptr) {
    trained = train_estimators(config);
    nets = &trained;
  }

  const long n_periods = static_cast<long>(std::floor(profile.duration / config.sample_period + 1e-9));
  const int substeps = static_cast<int>(std::llround(config.sample_period / config.dt));
  trace.rows.reserve(n_periods + 1);

  OracleCache oracle(config.panel);
  BuckState state;
  ControllerState ctl = ControllerState::initial(kind);
  DutyCycle duty(0.0);

  for (long k = 0; k <= n_periods; ++k) {
    const double t = std::min(k * config.sample_period, profile.duration);
    const EnvConditions env = profile_eval(profile, t);

    // quasi-static input coupling: the panel terminal settles where it
    // delivers the averaged converter input current u*i_L
    const double v_pv = solve_voltage(config.panel, env, duty.value() * state.i_l);
    const double i_pv = solve_current(config.panel, env, v_pv);
    const Measurement m(v_pv, i_pv);
    const OperatingPoint& mpp = oracle.at(env);
    trace.rows.push_back({t, env.g, env.t, v_pv, i_pv, m.p_pv, duty.value(), state.v_out,
                          state.i_l, mpp.p});

    MppEstimate est;
    if (kind == ControllerKind::ampo_ann) est = estimate_mpp(*nets, env);
    std::tie(duty, ctl) = controller_step(m, est, ctl, config.controller);

    if (k == n_periods) break;
    for (int j = 0; j < substeps; ++j) {
      const double t_sub = std::min(t + j * config.dt, profile.duration);
      const EnvConditions env_sub = profile_eval(profile, t_sub);
      const double v_in = solve_voltage(config.panel, env_sub, duty.value() * state.i_l);
      state = step(state, duty, v_in, config.dt, config.buck);
    }
  }
  return trace;
}

namespace {

struct Band {
  static bool contains(const TraceRow& row) {
    return std::abs(row.p_pv - row.p_mpp_oracle) <= 0.02 * row.p_mpp_oracle;
  }
};

std::optional<double> settle_time_of(std::span<const TraceRow> rows) {
  constexpr int hold = 50;
  int run = 0;
  for (std::size_t k = 0; k < rows.size(); ++k) {
    run = Band::contains(rows[k]) ? run + 1 : 0;
    if (run == hold) return rows[k + 1 - hold].t;
  }
  return std::nullopt;
}

}  // namespace

Metrics compute_metrics(const SimTrace& trace) {
  if (trace.rows.empty()) throw EmptyTrace("compute_metrics: empty trace");
  const auto& rows = trace.rows;

  Metrics m;
  m.settle_time = settle_time_of(rows);

  double num = 0.0, den = 0.0;
  for (std::size_t k = 1; k < rows.size(); ++k) {
    const double dt = rows[k].t - rows[k - 1].t;
    num += 0.5 * (rows[k].p_pv + rows[k - 1].p_pv) * dt;
    den += 0.5 * (rows[k].p_mpp_oracle + rows[k - 1].p_mpp_oracle) * dt;
  }
  m.tracking_efficiency = rows.size() == 1 ? rows[0].p_pv / rows[0].p_mpp_oracle
                                           : (den > 0.0 ? num / den : 0.0);

  // maximal runs of constant (g, t_cell)
  std::size_t begin = 0;
  for (std::size_t k = 1; k <= rows.size(); ++k) {
    const bool boundary = k == rows.size() || rows[k].g != rows[k - 1].g ||
                          rows[k].t_cell != rows[k - 1].t_cell;
    if (!boundary) continue;
    const std::size_t len = k - begin;
    const std::size_t window = std::max<std::size_t>(1, len / 5);
    double mean = 0.0;
    for (std::size_t j = k - window; j < k; ++j) mean += rows[j].p_pv;
    mean /= static_cast<double>(window);
    double var = 0.0;
    for (std::size_t j = k - window; j < k; ++j) {
      var += (rows[j].p_pv - mean) * (rows[j].p_pv - mean);
    }
    var /= static_cast<double>(window); // population std
    m.segments.push_back({rows[begin].t, rows[k - 1].t, mean, std::sqrt(var),
                          settle_time_of(std::span(rows).subspan(begin, len))});
    begin = k;
  }
  m.steady_state_power = m.segments.back().steady_state_power;
  return m;
}

Comparison run_comparison(const ScenarioProfile& profile,
                          std::span<const ControllerKind> kinds, const SimConfig& config,
                          const MppEstimators* nets) {
  Comparison out;
  MppEstimators trained;
  if (nets == nullptr &&
      std::find(kinds.begin(), kinds.end(), ControllerKind::ampo_ann) != kinds.end()) {
    trained = train_estimators(config);
    nets = &trained;
  }
  for (ControllerKind kind : kinds) {
    SimTrace trace = run_scenario(profile, kind, config, nets);
    out.rows.push_back({kind, compute_metrics(trace)});
    out.traces.push_back(std::move(trace));
  }
  return out;
}

std::vector<InverterTraceRow> run_inverter_trace(const InverterConfig& config) {
  if (!(config.dt > 0.0) || !(config.duration >= 0.0) || !(config.l_load > 0.0) ||
      !(config.r_load > 0.0) || config.record_stride < 1) {
    throw std::invalid_argument("run_inverter_trace: malformed configuration");
  }
  std::vector<InverterTraceRow> rows;
  const long n = static_cast<long>(std::llround(config.duration / config.dt));
  rows.reserve(n / config.record_stride + 1);
  double i_a = 0.0, i_b = 0.0, i_c = 0.0;
  for (long k = 0; k <= n; ++k) {
    const double t = k * config.dt;
    const PhaseVoltages u =
        phase_voltages(sine_pwm_switch(t, config.m, config.f_out, config.f_carrier), config.u_dc);
    if (k % config.record_stride == 0) {
      rows.push_back({t, u.u_an, u.u_bn, u.u_cn, i_a, i_b, i_c});
    }
    // explicit Euler; the RL time constant is far above dt
    i_a += config.dt * (u.u_an - config.r_load * i_a) / config.l_load;
    i_b += config.dt * (u.u_bn - config.r_load * i_b) / config.l_load;
    i_c += config.dt * (u.u_cn - config.r_load * i_c) / config.l_load;
  }
  return rows;
}

}  // namespace pvsim
