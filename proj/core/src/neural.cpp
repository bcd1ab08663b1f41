#include "pvsim/neural.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <random>

#include <json.hpp>

namespace pvsim {
namespace {

double normalize(double x, double lo, double hi) {
  return hi > lo ? 2.0 * (x - lo) / (hi - lo) - 1.0 : 0.0;
}

double denormalize(double y, double lo, double hi) { return (y + 1.0) * 0.5 * (hi - lo) + lo; }

std::array<double, 2> normalize_input(const MlpNetwork& net, double g, double t) {
  return {normalize(g, net.in_min[0], net.in_max[0]), normalize(t, net.in_min[1], net.in_max[1])};
}

// Cholesky factorization in place; false when the matrix is not positive
// definite. Solves L L^T x = b.
bool cholesky_solve(std::vector<double>& a, std::vector<double>& b, int n) {
  for (int j = 0; j < n; ++j) {
    double d = a[j * n + j];
    for (int k = 0; k < j; ++k) d -= a[j * n + k] * a[j * n + k];
    if (!(d > 0.0)) return false;
    const double ljj = std::sqrt(d);
    a[j * n + j] = ljj;
    for (int i = j + 1; i < n; ++i) {
      double s = a[i * n + j];
      for (int k = 0; k < j; ++k) s -= a[i * n + k] * a[j * n + k];
      a[i * n + j] = s / ljj;
    }
  }
  for (int i = 0; i < n; ++i) {
    double s = b[i];
    for (int k = 0; k < i; ++k) s -= a[i * n + k] * b[k];
    b[i] = s / a[i * n + i];
  }
  for (int i = n - 1; i >= 0; --i) {
    double s = b[i];
    for (int k = i + 1; k < n; ++k) s -= a[k * n + i] * b[k];
    b[i] = s / a[i * n + i];
  }
  return true;
}

}  // namespace

MlpNetwork init_network(int hidden, std::uint32_t seed) {
  if (hidden < 1) throw std::invalid_argument("init_network: hidden must be >= 1");
  MlpNetwork net;
  net.hidden = hidden;
  std::mt19937 rng(seed);
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  const double in_scale = 1.0 / std::sqrt(2.0);
  const double hid_scale = 1.0 / std::sqrt(static_cast<double>(hidden));
  net.w1.resize(2 * hidden);
  net.b1.resize(hidden);
  net.w2.resize(hidden);
  for (auto& w : net.w1) w = unit(rng) * in_scale;
  for (auto& b : net.b1) b = unit(rng) * in_scale;
  for (auto& w : net.w2) w = unit(rng) * hid_scale;
  net.b2 = unit(rng) * hid_scale;
  return net;
}

double forward_normalized(const MlpNetwork& net, const std::array<double, 2>& x) {
  const bool linear = net.activation == Activation::identity;
  double y = net.b2;
  for (int h = 0; h < net.hidden; ++h) {
    const double z = net.w1[2 * h] * x[0] + net.w1[2 * h + 1] * x[1] + net.b1[h];
    y += net.w2[h] * (linear ? z : std::tanh(z));
  }
  return y;
}

Prediction forward(const MlpNetwork& net, double g, double t) {
  Prediction out;
  const double in[2] = {g, t};
  for (int d = 0; d < 2; ++d) {
    const double range = net.in_max[d] - net.in_min[d];
    if (in[d] < net.in_min[d] - 0.2 * range || in[d] > net.in_max[d] + 0.2 * range) {
      out.extrapolated = true;
    }
  }
  out.value = denormalize(forward_normalized(net, normalize_input(net, g, t)), net.out_min,
                          net.out_max);
  return out;
}

std::vector<double> jacobian(const MlpNetwork& net,
                             std::span<const std::array<double, 2>> x_norm) {
  const int n = static_cast<int>(x_norm.size());
  const int np = net.n_params();
  std::vector<double> jac(static_cast<std::size_t>(n) * np);
  for (int r = 0; r < n; ++r) {
    double* row = jac.data() + static_cast<std::size_t>(r) * np;
    const auto& x = x_norm[r];
    for (int h = 0; h < net.hidden; ++h) {
      const double z = net.w1[2 * h] * x[0] + net.w1[2 * h + 1] * x[1] + net.b1[h];
      const double act = net.activation == Activation::identity ? z : std::tanh(z);
      const double dact = net.activation == Activation::identity ? 1.0 : 1.0 - act * act;
      row[2 * h] = net.w2[h] * dact * x[0];
      row[2 * h + 1] = net.w2[h] * dact * x[1];
      row[2 * net.hidden + h] = net.w2[h] * dact;
      row[3 * net.hidden + h] = act;
    }
    row[4 * net.hidden] = 1.0;
  }
  return jac;
}

Dataset generate_dataset(const PanelParams& params, const GridSpec& grid) {
  if (!(grid.g_step > 0.0) || !(grid.t_step_c > 0.0) || grid.g_max < grid.g_min ||
      grid.t_max_c < grid.t_min_c) {
    throw std::invalid_argument("generate_dataset: malformed grid");
  }
  const int ng = static_cast<int>(std::llround((grid.g_max - grid.g_min) / grid.g_step)) + 1;
  const int nt = static_cast<int>(std::llround((grid.t_max_c - grid.t_min_c) / grid.t_step_c)) + 1;
  Dataset data;
  data.rows.reserve(static_cast<std::size_t>(ng) * nt);
  for (int gi = 0; gi < ng; ++gi) {
    const double g = grid.g_min + grid.g_step * gi;
    for (int ti = 0; ti < nt; ++ti) {
      const double t = grid.t_min_c + grid.t_step_c * ti + 273.15;
      const OperatingPoint mpp = mpp_oracle(params, {g, t});
      data.rows.push_back({g, t, mpp.v, mpp.i});
    }
  }
  return data;
}

namespace {

struct Split {
  std::vector<std::size_t> train;
  std::vector<std::size_t> validation;
};

Split split_80_20(std::size_t n, std::uint32_t seed) {
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  std::mt19937 rng(seed);
  std::shuffle(idx.begin(), idx.end(), rng);
  const std::size_t ntr = std::max<std::size_t>(1, (n * 8) / 10);
  return {{idx.begin(), idx.begin() + ntr}, {idx.begin() + ntr, idx.end()}};
}

double target_of(const DatasetRow& row, Target target) {
  return target == Target::v_mpp ? row.v_mpp : row.i_mpp;
}

double max_rel_err(const MlpNetwork& net, const Dataset& data,
                   const std::vector<std::size_t>& idx, Target target) {
  double worst = 0.0;
  for (std::size_t k : idx) {
    const auto& row = data.rows[k];
    const double want = target_of(row, target);
    const double got = forward(net, row.g, row.t).value;
    worst = std::max(worst, std::abs(got - want) / std::abs(want));
  }
  return worst;
}

}  // namespace

TrainReport lm_train(MlpNetwork& net, const Dataset& data, Target target,
                     const TrainOptions& opts) {
  if (data.rows.empty()) throw std::invalid_argument("lm_train: empty dataset");
  constexpr double lambda_max = 1e10;

  const Split split = split_80_20(data.rows.size(), opts.seed);

  // normalization constants from the training split only
  net.in_min = {data.rows[split.train[0]].g, data.rows[split.train[0]].t};
  net.in_max = net.in_min;
  net.out_min = net.out_max = target_of(data.rows[split.train[0]], target);
  for (std::size_t k : split.train) {
    const auto& row = data.rows[k];
    net.in_min = {std::min(net.in_min[0], row.g), std::min(net.in_min[1], row.t)};
    net.in_max = {std::max(net.in_max[0], row.g), std::max(net.in_max[1], row.t)};
    net.out_min = std::min(net.out_min, target_of(row, target));
    net.out_max = std::max(net.out_max, target_of(row, target));
  }

  const int n = static_cast<int>(split.train.size());
  const int np = net.n_params();
  std::vector<std::array<double, 2>> x(n);
  std::vector<double> y(n);
  for (int k = 0; k < n; ++k) {
    const auto& row = data.rows[split.train[k]];
    x[k] = normalize_input(net, row.g, row.t);
    y[k] = normalize(target_of(row, target), net.out_min, net.out_max);
  }

  auto pack = [&net] {
    std::vector<double> w;
    w.reserve(net.n_params());
    w.insert(w.end(), net.w1.begin(), net.w1.end());
    w.insert(w.end(), net.b1.begin(), net.b1.end());
    w.insert(w.end(), net.w2.begin(), net.w2.end());
    w.push_back(net.b2);
    return w;
  };
  auto unpack = [&net](const std::vector<double>& w) {
    std::copy_n(w.begin(), net.w1.size(), net.w1.begin());
    std::copy_n(w.begin() + net.w1.size(), net.b1.size(), net.b1.begin());
    std::copy_n(w.begin() + net.w1.size() + net.b1.size(), net.w2.size(), net.w2.begin());
    net.b2 = w.back();
  };
  auto loss_of = [&](const std::vector<double>& w) {
    unpack(w);
    double loss = 0.0;
    for (int k = 0; k < n; ++k) {
      const double r = forward_normalized(net, x[k]) - y[k];
      loss += r * r;
    }
    return loss;
  };

  std::vector<double> w = pack();
  double loss = loss_of(w);
  double lambda = opts.lambda0;

  TrainReport report;
  report.accepted_losses.push_back(loss);
  report.converged = loss <= opts.tol; // already an exact fit
  bool any_accepted = false;

  for (int epoch = 0; epoch < opts.max_epochs && !report.converged; ++epoch) {
    report.epochs = epoch + 1;
    unpack(w);
    const std::vector<double> jac = jacobian(net, x);
    std::vector<double> grad(np, 0.0);
    std::vector<double> jtj(static_cast<std::size_t>(np) * np, 0.0);
    for (int k = 0; k < n; ++k) {
      const double* row = jac.data() + static_cast<std::size_t>(k) * np;
      const double r = forward_normalized(net, x[k]) - y[k];
      for (int p = 0; p < np; ++p) {
        grad[p] += row[p] * r;
        for (int q = p; q < np; ++q) jtj[static_cast<std::size_t>(p) * np + q] += row[p] * row[q];
      }
    }
    for (int p = 0; p < np; ++p) {
      for (int q = 0; q < p; ++q) {
        jtj[static_cast<std::size_t>(p) * np + q] = jtj[static_cast<std::size_t>(q) * np + p];
      }
    }

    bool accepted = false;
    for (int tries = 0; tries < 60 && lambda <= lambda_max; ++tries) {
      std::vector<double> a = jtj;
      std::vector<double> dw(np);
      for (int p = 0; p < np; ++p) {
        a[static_cast<std::size_t>(p) * np + p] += lambda;
        dw[p] = -grad[p];
      }
      const bool factored = cholesky_solve(a, dw, np);
      if (factored) {
        std::vector<double> w_next = w;
        for (int p = 0; p < np; ++p) w_next[p] += dw[p];
        const double loss_next = loss_of(w_next);
        if (loss_next < loss) {
          const double improvement = loss - loss_next;
          w = std::move(w_next);
          loss = loss_next;
          lambda = std::max(lambda / opts.lambda_down, 1e-15);
          report.accepted_losses.push_back(loss);
          any_accepted = true;
          accepted = true;
          if (improvement < opts.tol) report.converged = true;
          break;
        }
      }
      const double lambda_next = lambda * opts.lambda_up;
      if (lambda_next == lambda) break; // lambda_up == 1: retrying cannot help
      lambda = lambda_next;
    }
    if (!accepted) {
      if (!any_accepted && lambda > lambda_max) {
        throw TrainingDiverged("lm_train: damping overflowed before any accepted step");
      }
      break;
    }
    if (report.converged) break;
  }

  unpack(w);
  report.final_lambda = lambda;
  report.train_max_rel_err = max_rel_err(net, data, split.train, target);
  report.validation_max_rel_err =
      split.validation.empty() ? 0.0 : max_rel_err(net, data, split.validation, target);
  return report;
}

MppEstimate estimate_mpp(const MppEstimators& nets, const EnvConditions& env) {
  const Prediction v = forward(nets.v_net, env.g, env.t);
  const Prediction i = forward(nets.i_net, env.g, env.t);
  return {v.value, i.value, v.extrapolated || i.extrapolated};
}

void save_network(const MlpNetwork& net, const std::filesystem::path& path) {
  nlohmann::json j;
  j["format_version"] = 1;
  j["layers"] = {2, net.hidden, 1};
  j["activation"] = net.activation == Activation::identity ? "identity" : "tanh";
  j["in_min"] = net.in_min;
  j["in_max"] = net.in_max;
  j["out_min"] = net.out_min;
  j["out_max"] = net.out_max;
  j["w1"] = net.w1;
  j["b1"] = net.b1;
  j["w2"] = net.w2;
  j["b2"] = net.b2;
  std::ofstream out(path);
  if (!out) throw std::runtime_error("save_network: cannot open " + path.string());
  out << j.dump(2) << '\n';
}

MlpNetwork load_network(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("load_network: cannot open " + path.string());
  nlohmann::json j;
  in >> j;
  if (j.at("format_version").get<int>() != 1) {
    throw std::runtime_error("load_network: unsupported format version");
  }
  const auto layers = j.at("layers").get<std::vector<int>>();
  if (layers.size() != 3 || layers[0] != 2 || layers[2] != 1) {
    throw std::runtime_error("load_network: expected a 2-H-1 network");
  }
  MlpNetwork net;
  net.hidden = layers[1];
  const auto activation = j.at("activation").get<std::string>();
  if (activation == "identity") {
    net.activation = Activation::identity;
  } else if (activation != "tanh") {
    throw std::runtime_error("load_network: unknown activation: " + activation);
  }
  net.in_min = j.at("in_min").get<std::array<double, 2>>();
  net.in_max = j.at("in_max").get<std::array<double, 2>>();
  net.out_min = j.at("out_min").get<double>();
  net.out_max = j.at("out_max").get<double>();
  net.w1 = j.at("w1").get<std::vector<double>>();
  net.b1 = j.at("b1").get<std::vector<double>>();
  net.w2 = j.at("w2").get<std::vector<double>>();
  net.b2 = j.at("b2").get<double>();
  if (net.w1.size() != static_cast<std::size_t>(2 * net.hidden) ||
      net.b1.size() != static_cast<std::size_t>(net.hidden) ||
      net.w2.size() != static_cast<std::size_t>(net.hidden)) {
    throw std::runtime_error("load_network: weight sizes do not match the layer sizes");
  }
  return net;
}

}  // namespace pvsim
