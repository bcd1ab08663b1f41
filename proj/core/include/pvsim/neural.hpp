#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "pvsim/controllers.hpp"
#include "pvsim/errors.hpp"
#include "pvsim/pv_model.hpp"

namespace pvsim {

enum class Activation { tanh_fn, identity };

/// Feedforward 2-H-1 network with tanh hidden units (identity available for
/// linear problems), identity output and min-max normalization of inputs and
/// target to [-1, 1]. Normalization constants are fitted on the training
/// split only.
struct MlpNetwork {
  int hidden = 10;
  Activation activation = Activation::tanh_fn;
  std::vector<double> w1; // hidden x 2, row-major
  std::vector<double> b1; // hidden
  std::vector<double> w2; // 1 x hidden
  double b2 = 0.0;
  std::array<double, 2> in_min{0.0, 0.0};
  std::array<double, 2> in_max{1.0, 1.0};
  double out_min = 0.0;
  double out_max = 1.0;

  int n_params() const { return 4 * hidden + 1; }
};

/// Weights drawn uniformly in +-1/sqrt(fan_in) from the given seed.
MlpNetwork init_network(int hidden, std::uint32_t seed);

struct Prediction {
  double value = 0.0;
  bool extrapolated = false; // input beyond +-20% of the training range
};

Prediction forward(const MlpNetwork& net, double g, double t);

/// Normalized-space forward pass used by training and the jacobian.
double forward_normalized(const MlpNetwork& net, const std::array<double, 2>& x_norm);

struct DatasetRow {
  double g;     // [W/m^2]
  double t;     // [K]
  double v_mpp; // [V]
  double i_mpp; // [A]
};

struct Dataset {
  std::vector<DatasetRow> rows;
};

/// Cartesian (G, T) grid labeled by the brute-force MPP oracle.
/// Grids are inclusive of both endpoints.
struct GridSpec {
  double g_min = 200.0, g_max = 1000.0, g_step = 50.0;   // [W/m^2]
  double t_min_c = 15.0, t_max_c = 75.0, t_step_c = 5.0; // [deg C]
};

Dataset generate_dataset(const PanelParams& params, const GridSpec& grid = {});

enum class Target { v_mpp, i_mpp };

/// Row-major [n_samples x n_params] derivatives of the normalized network
/// output with respect to every weight and bias, by backpropagation.
/// Parameter order: w1 row-major, b1, w2, b2.
std::vector<double> jacobian(const MlpNetwork& net,
                             std::span<const std::array<double, 2>> x_norm);

struct TrainOptions {
  int max_epochs = 500;
  double lambda0 = 1e-3;
  double lambda_up = 10.0;
  double lambda_down = 10.0;
  double tol = 1e-10; // stop when an accepted step improves the loss by less
  std::uint32_t seed = 42;
};

struct TrainReport {
  int epochs = 0;                      // outer iterations attempted
  std::vector<double> accepted_losses; // strictly decreasing, includes initial loss
  double final_lambda = 0.0;
  bool converged = false;
  double train_max_rel_err = 1.0;
  double validation_max_rel_err = 1.0;
};

/// Levenberg-Marquardt on the sum-of-squares residual of the normalized
/// predictions. The dataset is split 80/20 train/validation with the seeded
/// shuffle; a step is accepted only when it strictly decreases the loss.
/// Throws TrainingDiverged when lambda exceeds 1e10 before any step was
/// accepted.
TrainReport lm_train(MlpNetwork& net, const Dataset& data, Target target,
                     const TrainOptions& opts = {});

/// The two estimators of the neural MPP stage.
struct MppEstimators {
  MlpNetwork v_net;
  MlpNetwork i_net;
};

/// Pair of forward passes; extrapolation flags are OR-ed into the result.
MppEstimate estimate_mpp(const MppEstimators& nets, const EnvConditions& env);

/// Self-describing JSON model files (layer sizes, normalization constants,
/// row-major weights, format version).
void save_network(const MlpNetwork& net, const std::filesystem::path& path);
MlpNetwork load_network(const std::filesystem::path& path);

}  // namespace pvsim
