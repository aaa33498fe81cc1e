#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace lakeopt {

enum class Activation { kLogSigmoid, kLinear };

// Feedforward network with log-sigmoid hidden layers and a linear scalar
// output. Weight matrix l has shape layer_sizes[l] x layer_sizes[l+1],
// row-major. Immutable in use: forward and input_gradient are pure.
struct MlpModel {
  std::vector<std::string> input_names;
  std::string output_name;
  std::vector<int> layer_sizes;  // [n_in, hidden..., 1]
  std::vector<std::vector<double>> weights;
  std::vector<std::vector<double>> biases;
  Activation hidden_activation = Activation::kLogSigmoid;
  Activation output_activation = Activation::kLinear;

  int input_size() const { return layer_sizes.empty() ? 0 : layer_sizes.front(); }
  int layer_count() const { return static_cast<int>(weights.size()); }
  int input_index(std::string_view name) const;  // throws kLookup

  // Checks shape chaining, name/size agreement and parameter finiteness.
  void validate() const;

  double forward(std::span<const double> x) const;
  // Exact reverse-mode gradient of forward with respect to the input vector.
  std::vector<double> input_gradient(std::span<const double> x) const;
};

// Weights ~ seeded uniform(-s, s) with s = weight_init_scale / sqrt(fan_in);
// biases zero.
MlpModel init_model(std::vector<std::string> input_names, std::string output_name,
                    std::span<const int> hidden_sizes, std::uint64_t seed,
                    double weight_init_scale = 1.0);

struct TrainingSet {
  std::vector<std::vector<double>> inputs;  // standardized
  std::vector<double> targets;              // standardized
  std::size_t size() const { return targets.size(); }
};

struct TrainConfig {
  int epochs = 3000;
  double learning_rate = 0.05;
  int batch_size = 32;
  std::uint64_t seed = 1;
  double validation_fraction = 0.15;  // chronological tail split
  double weight_init_scale = 1.0;
  int early_stop_patience = 200;      // epochs without validation improvement
};

struct TrainReport {
  double train_mse = 0.0;
  double validation_mse = 0.0;
  double r2 = 0.0;                  // on the held-out tail
  std::vector<double> loss_curve;   // training MSE per epoch
  int epochs_run = 0;
};

// Mini-batch gradient descent with momentum 0.9 on MSE. Single-threaded,
// deterministic per (initial model, config). Returns the parameters with the
// best validation MSE seen, which is never worse than at epoch 0.
std::pair<MlpModel, TrainReport> train(const MlpModel& model, const TrainingSet& data,
                                       const TrainConfig& config);

// 1 - SSE/SST; throws kNumeric for constant targets.
double evaluate_r2(const MlpModel& model, const TrainingSet& data);

double mean_squared_error(const MlpModel& model, const TrainingSet& data);

// JSON model file: {schema_version, input_names, output_name, layer_sizes,
// activations, weights, biases}; round-trips parameters bit-exactly.
std::string model_to_json(const MlpModel& model);
MlpModel model_from_json(const std::string& text);
void save_model(const MlpModel& model, const std::string& path);
MlpModel load_model(const std::string& path);

struct SurfaceGrid {
  std::string var_i;
  std::string var_j;
  int resolution = 0;
  double fixed_value = 0.5;
  std::vector<double> axis;    // shared uniform [0,1] grid, size = resolution
  std::vector<double> values;  // row-major, rows indexed by var_i's grid
};

// Predictions over a 2-D slice of the unit cube with every other input held
// at fixed_value.
SurfaceGrid response_surface_grid(const MlpModel& model, std::string_view var_i,
                                  std::string_view var_j, double fixed_value = 0.5,
                                  int resolution = 25);

}  // namespace lakeopt
