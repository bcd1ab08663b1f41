#include "cli.hpp"

#include <cstdio>
#include <exception>
#include <filesystem>
#include <sstream>
#include <vector>

#include "pvsim/config.hpp"
#include "pvsim/csv.hpp"

namespace pvsim::cli {
namespace {

namespace fs = std::filesystem;

constexpr int exit_ok = 0;
constexpr int exit_config = 2;
constexpr int exit_runtime = 3;

RunConfig resolve_config(const CommonOptions& opts) {
  RunConfig cfg = opts.config_path.empty() ? RunConfig{} : load_config(opts.config_path);
  if (opts.scenario) {
    cfg.scenario_preset = *opts.scenario;
    cfg.scenario_segments.clear();
  }
  if (opts.duration) cfg.scenario_duration = *opts.duration;
  if (opts.controller) cfg.controller_kind = controller_kind_from_string(*opts.controller);
  if (opts.seed) cfg.seed = static_cast<std::uint32_t>(*opts.seed);
  if (opts.out_dir) cfg.out_dir = *opts.out_dir;
  if (opts.gamma) cfg.controller.gamma = *opts.gamma;
  if (opts.model_dir) cfg.model_dir = *opts.model_dir;
  return cfg;
}

bool models_present(const RunConfig& cfg) {
  return fs::exists(cfg.model_dir / "v_net.json") && fs::exists(cfg.model_dir / "i_net.json");
}

MppEstimators load_models(const RunConfig& cfg) {
  return {load_network(cfg.model_dir / "v_net.json"), load_network(cfg.model_dir / "i_net.json")};
}

struct TrainedPair {
  MppEstimators nets;
  TrainReport v_report;
  TrainReport i_report;
};

TrainedPair train_models(const RunConfig& cfg, const SimConfig& sim) {
  const Dataset data = generate_dataset(sim.panel, cfg.grid);
  TrainOptions opts = cfg.train;
  opts.seed = cfg.seed;
  TrainedPair out{{init_network(cfg.hidden, cfg.seed), init_network(cfg.hidden, cfg.seed)}, {}, {}};
  out.v_report = lm_train(out.nets.v_net, data, Target::v_mpp, opts);
  out.i_report = lm_train(out.nets.i_net, data, Target::i_mpp, opts);
  return out;
}

void persist_models(const RunConfig& cfg, const MppEstimators& nets) {
  fs::create_directories(cfg.model_dir);
  save_network(nets.v_net, cfg.model_dir / "v_net.json");
  save_network(nets.i_net, cfg.model_dir / "i_net.json");
}

template <typename Fn>
int guarded(Fn&& body) {
  try {
    return body();
  } catch (const ConfigError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return exit_config;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return exit_runtime;
  }
}

}  // namespace

int cmd_simulate(const CommonOptions& opts, bool train_if_missing, bool inverter_trace) {
  return guarded([&] {
    const RunConfig cfg = resolve_config(opts);
    const ScenarioProfile profile = cfg.scenario();
    const SimConfig sim = cfg.sim_config();

    MppEstimators nets;
    const MppEstimators* nets_ptr = nullptr;
    if (cfg.controller_kind == ControllerKind::ampo_ann) {
      if (models_present(cfg)) {
        nets = load_models(cfg);
        nets_ptr = &nets;
      } else if (train_if_missing) {
        nets = train_models(cfg, sim).nets;
        persist_models(cfg, nets);
        nets_ptr = &nets;
      } // otherwise run_scenario trains on the fly without persisting
    }

    const SimTrace trace = run_scenario(profile, cfg.controller_kind, sim, nets_ptr);
    const Metrics metrics = compute_metrics(trace);
    atomic_write(cfg.out_dir / "trace.csv", trace_to_csv(trace));
    atomic_write(cfg.out_dir / "metrics.txt", metrics_to_text(metrics));
    Comparison single;
    single.rows.push_back({cfg.controller_kind, metrics});
    atomic_write(cfg.out_dir / "metrics.csv", comparison_to_csv(single));
    if (inverter_trace) {
      atomic_write(cfg.out_dir / "inverter_trace.csv",
                   inverter_trace_to_csv(run_inverter_trace(cfg.inverter)));
    }
    std::printf("%s: %zu rows -> %s\n", to_string(cfg.controller_kind).c_str(),
                trace.rows.size(), (cfg.out_dir / "trace.csv").string().c_str());
    std::fputs(metrics_to_text(metrics).c_str(), stdout);
    return exit_ok;
  });
}

int cmd_train(const CommonOptions& opts) {
  return guarded([&] {
    const RunConfig cfg = resolve_config(opts);
    const SimConfig sim = cfg.sim_config();
    const Dataset data = generate_dataset(sim.panel, cfg.grid);
    atomic_write(cfg.out_dir / "dataset.csv", dataset_to_csv(data));

    const TrainedPair trained = train_models(cfg, sim);
    if (trained.v_report.accepted_losses.size() < 2 ||
        trained.i_report.accepted_losses.size() < 2) {
      std::fprintf(stderr, "error: not trained (no accepted optimizer step)\n");
      return exit_runtime;
    }
    persist_models(cfg, trained.nets);

    std::string report = "net,step,loss\n";
    for (std::size_t k = 0; k < trained.v_report.accepted_losses.size(); ++k) {
      report += "v," + std::to_string(k) + ',' + format_double(trained.v_report.accepted_losses[k]) + '\n';
    }
    for (std::size_t k = 0; k < trained.i_report.accepted_losses.size(); ++k) {
      report += "i," + std::to_string(k) + ',' + format_double(trained.i_report.accepted_losses[k]) + '\n';
    }
    atomic_write(cfg.out_dir / "train_report.csv", report);

    std::printf("v_net: epochs=%d validation_max_rel_err=%s\n", trained.v_report.epochs,
                format_double(trained.v_report.validation_max_rel_err).c_str());
    std::printf("i_net: epochs=%d validation_max_rel_err=%s\n", trained.i_report.epochs,
                format_double(trained.i_report.validation_max_rel_err).c_str());
    std::printf("models written to %s\n", cfg.model_dir.string().c_str());
    return exit_ok;
  });
}

int cmd_compare(const CommonOptions& opts, const std::string& controllers_csv) {
  return guarded([&] {
    std::vector<ControllerKind> kinds;
    std::istringstream in(controllers_csv);
    std::string tok;
    while (std::getline(in, tok, ',')) {
      if (!tok.empty()) kinds.push_back(controller_kind_from_string(tok));
    }
    if (kinds.empty()) throw ConfigError("compare: empty controller list");

    const RunConfig cfg = resolve_config(opts);
    const ScenarioProfile profile = cfg.scenario();
    const SimConfig sim = cfg.sim_config();

    MppEstimators nets;
    const MppEstimators* nets_ptr = nullptr;
    if (std::find(kinds.begin(), kinds.end(), ControllerKind::ampo_ann) != kinds.end() &&
        models_present(cfg)) {
      nets = load_models(cfg);
      nets_ptr = &nets;
    }

    const Comparison cmp = run_comparison(profile, kinds, sim, nets_ptr);
    for (std::size_t k = 0; k < cmp.rows.size(); ++k) {
      atomic_write(cfg.out_dir / ("trace_" + to_string(cmp.rows[k].kind) + ".csv"),
                   trace_to_csv(cmp.traces[k]));
    }
    atomic_write(cfg.out_dir / "comparison.csv", comparison_to_csv(cmp));
    std::fputs(metrics_table(cmp).c_str(), stdout);
    return exit_ok;
  });
}

int cmd_sweep(const CommonOptions& opts, const std::string& grid_spec) {
  return guarded([&] {
    // g_min:g_max:n,t_min:t_max:n with temperatures in degrees C
    double g0 = 0, g1 = 0, t0 = 0, t1 = 0;
    int ng = 0, nt = 0;
    if (std::sscanf(grid_spec.c_str(), "%lf:%lf:%d,%lf:%lf:%d", &g0, &g1, &ng, &t0, &t1, &nt) != 6 ||
        ng < 1 || nt < 1) {
      throw ConfigError("sweep: --grid expects g_min:g_max:n,t_min:t_max:n");
    }
    const RunConfig cfg = resolve_config(opts);
    const SimConfig sim = cfg.sim_config();

    std::string locus = "g,t_c,v_mpp,i_mpp,p_mpp\n";
    for (int gi = 0; gi < ng; ++gi) {
      const double g = ng == 1 ? g0 : g0 + (g1 - g0) * gi / (ng - 1);
      for (int ti = 0; ti < nt; ++ti) {
        const double tc = nt == 1 ? t0 : t0 + (t1 - t0) * ti / (nt - 1);
        const EnvConditions env{g, tc + 273.15};
        char name[80];
        std::snprintf(name, sizeof name, "curve_g%g_t%g.csv", g, tc);
        atomic_write(cfg.out_dir / name, curve_to_csv(sim.panel, env, 500));
        const OperatingPoint mpp = mpp_oracle(sim.panel, env);
        locus += format_double(g) + ',' + format_double(tc) + ',' + format_double(mpp.v) + ',' +
                 format_double(mpp.i) + ',' + format_double(mpp.p) + '\n';
      }
    }
    atomic_write(cfg.out_dir / "mpp_locus.csv", locus);
    std::printf("%d curve files + mpp_locus.csv -> %s\n", ng * nt, cfg.out_dir.string().c_str());
    return exit_ok;
  });
}

}  // namespace pvsim::cli
