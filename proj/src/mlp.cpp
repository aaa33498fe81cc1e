#include "lakeopt/mlp.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>

#include <json.hpp>

#include "lakeopt/errors.hpp"
#include "lakeopt/rng.hpp"

namespace lakeopt {

namespace {

double log_sigmoid(double z) { return 1.0 / (1.0 + std::exp(-z)); }

// Activations of every layer for input x; slot 0 is x itself.
std::vector<std::vector<double>> forward_pass(const MlpModel& m,
                                              std::span<const double> x) {
  std::vector<std::vector<double>> acts;
  acts.reserve(m.weights.size() + 1);
  acts.emplace_back(x.begin(), x.end());
  for (int l = 0; l < m.layer_count(); ++l) {
    int in = m.layer_sizes[l];
    int out = m.layer_sizes[l + 1];
    const auto& w = m.weights[l];
    const auto& b = m.biases[l];
    std::vector<double> next(static_cast<std::size_t>(out));
    const auto& prev = acts.back();
    for (int j = 0; j < out; ++j) {
      double z = b[static_cast<std::size_t>(j)];
      for (int i = 0; i < in; ++i)
        z += prev[static_cast<std::size_t>(i)] *
             w[static_cast<std::size_t>(i) * out + j];
      bool hidden = l + 1 < m.layer_count();
      next[static_cast<std::size_t>(j)] = hidden ? log_sigmoid(z) : z;
    }
    acts.push_back(std::move(next));
  }
  return acts;
}

void check_input(const MlpModel& m, std::span<const double> x) {
  if (static_cast<int>(x.size()) != m.input_size())
    throw_error(ErrorCode::kInvalidArgument,
                "input has " + std::to_string(x.size()) + " values, model expects " +
                    std::to_string(m.input_size()));
}

}  // namespace

int MlpModel::input_index(std::string_view name) const {
  for (std::size_t i = 0; i < input_names.size(); ++i)
    if (input_names[i] == name) return static_cast<int>(i);
  throw_error(ErrorCode::kLookup,
              "\"" + std::string(name) + "\" is not a model input");
}

void MlpModel::validate() const {
  if (layer_sizes.size() < 2)
    throw_error(ErrorCode::kIntegrity, "model needs at least input and output layers");
  if (layer_sizes.back() != 1)
    throw_error(ErrorCode::kIntegrity, "output layer must have size 1");
  for (int s : layer_sizes)
    if (s < 1) throw_error(ErrorCode::kIntegrity, "layer sizes must be positive");
  if (static_cast<int>(input_names.size()) != layer_sizes.front())
    throw_error(ErrorCode::kIntegrity,
                "input_names length does not match the input layer size");
  std::size_t layers = layer_sizes.size() - 1;
  if (weights.size() != layers || biases.size() != layers)
    throw_error(ErrorCode::kIntegrity, "weight/bias layer count mismatch");
  for (std::size_t l = 0; l < layers; ++l) {
    std::size_t in = static_cast<std::size_t>(layer_sizes[l]);
    std::size_t out = static_cast<std::size_t>(layer_sizes[l + 1]);
    if (weights[l].size() != in * out)
      throw_error(ErrorCode::kIntegrity,
                  "weight matrix " + std::to_string(l) + " has " +
                      std::to_string(weights[l].size()) + " entries, expected " +
                      std::to_string(in * out));
    if (biases[l].size() != out)
      throw_error(ErrorCode::kIntegrity,
                  "bias vector " + std::to_string(l) + " has wrong length");
    for (double v : weights[l])
      if (!std::isfinite(v))
        throw_error(ErrorCode::kIntegrity, "non-finite weight in layer " + std::to_string(l));
    for (double v : biases[l])
      if (!std::isfinite(v))
        throw_error(ErrorCode::kIntegrity, "non-finite bias in layer " + std::to_string(l));
  }
}

double MlpModel::forward(std::span<const double> x) const {
  check_input(*this, x);
  return forward_pass(*this, x).back().front();
}

std::vector<double> MlpModel::input_gradient(std::span<const double> x) const {
  check_input(*this, x);
  auto acts = forward_pass(*this, x);
  // Reverse pass: delta over layer l+1 activations -> delta over layer l.
  std::vector<double> delta = {1.0};
  for (int l = layer_count() - 1; l >= 0; --l) {
    int in = layer_sizes[l];
    int out = layer_sizes[l + 1];
    const auto& w = weights[l];
    bool hidden = l + 1 < layer_count();
    if (hidden) {
      const auto& a = acts[static_cast<std::size_t>(l + 1)];
      for (int j = 0; j < out; ++j)
        delta[static_cast<std::size_t>(j)] *=
            a[static_cast<std::size_t>(j)] * (1.0 - a[static_cast<std::size_t>(j)]);
    }
    std::vector<double> prev(static_cast<std::size_t>(in), 0.0);
    for (int i = 0; i < in; ++i) {
      double acc = 0.0;
      for (int j = 0; j < out; ++j)
        acc += w[static_cast<std::size_t>(i) * out + j] * delta[static_cast<std::size_t>(j)];
      prev[static_cast<std::size_t>(i)] = acc;
    }
    delta = std::move(prev);
  }
  return delta;
}

MlpModel init_model(std::vector<std::string> input_names, std::string output_name,
                    std::span<const int> hidden_sizes, std::uint64_t seed,
                    double weight_init_scale) {
  if (input_names.empty())
    throw_error(ErrorCode::kInvalidArgument, "input_names must not be empty");
  if (hidden_sizes.empty())
    throw_error(ErrorCode::kInvalidArgument, "hidden_sizes must not be empty");
  if (!(weight_init_scale > 0.0))
    throw_error(ErrorCode::kInvalidArgument, "weight_init_scale must be positive");
  MlpModel m;
  m.input_names = std::move(input_names);
  m.output_name = std::move(output_name);
  m.layer_sizes.push_back(static_cast<int>(m.input_names.size()));
  for (int h : hidden_sizes) {
    if (h < 1)
      throw_error(ErrorCode::kInvalidArgument, "hidden layer sizes must be positive");
    m.layer_sizes.push_back(h);
  }
  m.layer_sizes.push_back(1);
  Rng rng(seed);
  for (std::size_t l = 0; l + 1 < m.layer_sizes.size(); ++l) {
    std::size_t in = static_cast<std::size_t>(m.layer_sizes[l]);
    std::size_t out = static_cast<std::size_t>(m.layer_sizes[l + 1]);
    double scale = weight_init_scale / std::sqrt(static_cast<double>(in));
    std::vector<double> w(in * out);
    for (auto& v : w) v = rng.uniform(-scale, scale);
    m.weights.push_back(std::move(w));
    m.biases.emplace_back(out, 0.0);
  }
  m.validate();
  return m;
}

double mean_squared_error(const MlpModel& model, const TrainingSet& data) {
  if (data.size() == 0)
    throw_error(ErrorCode::kInvalidArgument, "empty evaluation set");
  double acc = 0.0;
  for (std::size_t i = 0; i < data.size(); ++i) {
    double e = model.forward(data.inputs[i]) - data.targets[i];
    acc += e * e;
  }
  return acc / static_cast<double>(data.size());
}

double evaluate_r2(const MlpModel& model, const TrainingSet& data) {
  if (data.size() < 2)
    throw_error(ErrorCode::kInvalidArgument, "R^2 needs at least two pairs");
  double mean = std::accumulate(data.targets.begin(), data.targets.end(), 0.0) /
                static_cast<double>(data.size());
  double sse = 0.0, sst = 0.0;
  for (std::size_t i = 0; i < data.size(); ++i) {
    double e = model.forward(data.inputs[i]) - data.targets[i];
    sse += e * e;
    double d = data.targets[i] - mean;
    sst += d * d;
  }
  if (sst <= 0.0)
    throw_error(ErrorCode::kNumeric, "R^2 is undefined for constant targets");
  return 1.0 - sse / sst;
}

namespace {

struct Gradients {
  std::vector<std::vector<double>> weights;
  std::vector<std::vector<double>> biases;

  explicit Gradients(const MlpModel& m) {
    for (std::size_t l = 0; l < m.weights.size(); ++l) {
      weights.emplace_back(m.weights[l].size(), 0.0);
      biases.emplace_back(m.biases[l].size(), 0.0);
    }
  }
  void zero() {
    for (auto& w : weights) std::fill(w.begin(), w.end(), 0.0);
    for (auto& b : biases) std::fill(b.begin(), b.end(), 0.0);
  }
};

// Accumulates dLoss/dparams for one sample into g; returns squared error.
double backprop_sample(const MlpModel& m, std::span<const double> x, double target,
                       Gradients& g) {
  auto acts = forward_pass(m, x);
  double err = acts.back().front() - target;
  std::vector<double> delta = {2.0 * err};  // d(err^2)/d(output)
  for (int l = m.layer_count() - 1; l >= 0; --l) {
    int in = m.layer_sizes[l];
    int out = m.layer_sizes[l + 1];
    bool hidden = l + 1 < m.layer_count();
    if (hidden) {
      const auto& a = acts[static_cast<std::size_t>(l + 1)];
      for (int j = 0; j < out; ++j)
        delta[static_cast<std::size_t>(j)] *=
            a[static_cast<std::size_t>(j)] * (1.0 - a[static_cast<std::size_t>(j)]);
    }
    const auto& prev = acts[static_cast<std::size_t>(l)];
    auto& gw = g.weights[static_cast<std::size_t>(l)];
    auto& gb = g.biases[static_cast<std::size_t>(l)];
    for (int j = 0; j < out; ++j) {
      double d = delta[static_cast<std::size_t>(j)];
      gb[static_cast<std::size_t>(j)] += d;
      for (int i = 0; i < in; ++i)
        gw[static_cast<std::size_t>(i) * out + j] += prev[static_cast<std::size_t>(i)] * d;
    }
    const auto& w = m.weights[static_cast<std::size_t>(l)];
    std::vector<double> prev_delta(static_cast<std::size_t>(in), 0.0);
    for (int i = 0; i < in; ++i) {
      double acc = 0.0;
      for (int j = 0; j < out; ++j)
        acc += w[static_cast<std::size_t>(i) * out + j] * delta[static_cast<std::size_t>(j)];
      prev_delta[static_cast<std::size_t>(i)] = acc;
    }
    delta = std::move(prev_delta);
  }
  return err * err;
}

}  // namespace

std::pair<MlpModel, TrainReport> train(const MlpModel& model, const TrainingSet& data,
                                       const TrainConfig& config) {
  if (data.inputs.size() != data.targets.size())
    throw_error(ErrorCode::kInvalidArgument, "inputs/targets size mismatch");
  if (data.size() < 24)
    throw_error(ErrorCode::kInvalidArgument,
                "training needs at least 24 samples, got " + std::to_string(data.size()));
  if (config.epochs < 1)
    throw_error(ErrorCode::kInvalidArgument, "epochs must be at least 1");
  if (!(config.validation_fraction > 0.0 && config.validation_fraction < 0.5))
    throw_error(ErrorCode::kInvalidArgument, "validation_fraction must be in (0, 0.5)");
  if (!(config.learning_rate > 0.0))
    throw_error(ErrorCode::kInvalidArgument, "learning_rate must be positive");
  if (config.batch_size < 1)
    throw_error(ErrorCode::kInvalidArgument, "batch_size must be at least 1");

  const std::size_t n = data.size();
  // Chronological split: the tail is held out, so adjacent months do not leak
  // between the two sets.
  std::size_t n_val = std::max<std::size_t>(
      1, static_cast<std::size_t>(std::lround(config.validation_fraction *
                                              static_cast<double>(n))));
  std::size_t n_train = n - n_val;

  TrainingSet val;
  val.inputs.assign(data.inputs.begin() + static_cast<std::ptrdiff_t>(n_train),
                    data.inputs.end());
  val.targets.assign(data.targets.begin() + static_cast<std::ptrdiff_t>(n_train),
                     data.targets.end());

  MlpModel current = model;
  Gradients velocity(current);
  Gradients grads(current);
  Rng rng(config.seed);

  auto validation_mse = [&](const MlpModel& m) {
    double acc = 0.0;
    for (std::size_t i = 0; i < val.size(); ++i) {
      double e = m.forward(val.inputs[i]) - val.targets[i];
      acc += e * e;
    }
    return acc / static_cast<double>(val.size());
  };

  MlpModel best = current;
  double best_val = validation_mse(current);  // epoch-0 baseline
  int since_best = 0;

  TrainReport report;
  report.loss_curve.reserve(static_cast<std::size_t>(config.epochs));

  std::vector<std::size_t> order(n_train);
  std::iota(order.begin(), order.end(), std::size_t{0});

  constexpr double kMomentum = 0.9;
  double train_mse = 0.0;
  for (int epoch = 1; epoch <= config.epochs; ++epoch) {
    // Seeded Fisher-Yates shuffle.
    for (std::size_t i = n_train; i > 1; --i) {
      std::size_t j = static_cast<std::size_t>(rng.uniform_int(static_cast<int>(i)));
      std::swap(order[i - 1], order[j]);
    }
    double epoch_sse = 0.0;
    for (std::size_t begin = 0; begin < n_train;
         begin += static_cast<std::size_t>(config.batch_size)) {
      std::size_t end = std::min(n_train, begin + static_cast<std::size_t>(config.batch_size));
      grads.zero();
      for (std::size_t k = begin; k < end; ++k) {
        std::size_t idx = order[k];
        epoch_sse += backprop_sample(current, data.inputs[idx], data.targets[idx], grads);
      }
      double inv = 1.0 / static_cast<double>(end - begin);
      for (std::size_t l = 0; l < current.weights.size(); ++l) {
        auto& w = current.weights[l];
        auto& b = current.biases[l];
        auto& vw = velocity.weights[l];
        auto& vb = velocity.biases[l];
        for (std::size_t k = 0; k < w.size(); ++k) {
          vw[k] = kMomentum * vw[k] - config.learning_rate * grads.weights[l][k] * inv;
          w[k] += vw[k];
        }
        for (std::size_t k = 0; k < b.size(); ++k) {
          vb[k] = kMomentum * vb[k] - config.learning_rate * grads.biases[l][k] * inv;
          b[k] += vb[k];
        }
      }
    }
    train_mse = epoch_sse / static_cast<double>(n_train);
    if (!std::isfinite(train_mse))
      throw_error(ErrorCode::kNumeric,
                  "training diverged at epoch " + std::to_string(epoch) +
                      " (learning rate " + std::to_string(config.learning_rate) + ")");
    report.loss_curve.push_back(train_mse);
    report.epochs_run = epoch;

    double vmse = validation_mse(current);
    if (!std::isfinite(vmse))
      throw_error(ErrorCode::kNumeric,
                  "training diverged at epoch " + std::to_string(epoch) +
                      " (learning rate " + std::to_string(config.learning_rate) + ")");
    if (vmse < best_val) {
      best_val = vmse;
      best = current;
      since_best = 0;
    } else if (++since_best >= config.early_stop_patience) {
      break;
    }
  }

  report.train_mse = train_mse;
  report.validation_mse = best_val;
  try {
    report.r2 = evaluate_r2(best, val);
  } catch (const Error&) {
    report.r2 = std::numeric_limits<double>::quiet_NaN();
  }
  return {std::move(best), std::move(report)};
}

namespace {

const char* activation_name(Activation a) {
  return a == Activation::kLogSigmoid ? "logsigmoid" : "linear";
}

Activation activation_from_name(const std::string& name) {
  if (name == "logsigmoid") return Activation::kLogSigmoid;
  if (name == "linear") return Activation::kLinear;
  throw_error(ErrorCode::kParse, "unknown activation \"" + name + "\"");
}

}  // namespace

std::string model_to_json(const MlpModel& model) {
  model.validate();
  nlohmann::json j;
  j["schema_version"] = 1;
  j["input_names"] = model.input_names;
  j["output_name"] = model.output_name;
  j["layer_sizes"] = model.layer_sizes;
  std::vector<std::string> acts;
  for (std::size_t l = 0; l + 1 < model.layer_sizes.size(); ++l)
    acts.emplace_back(l + 2 < model.layer_sizes.size()
                          ? activation_name(model.hidden_activation)
                          : activation_name(model.output_activation));
  j["activations"] = acts;
  nlohmann::json weights = nlohmann::json::array();
  for (std::size_t l = 0; l < model.weights.size(); ++l) {
    std::size_t out = static_cast<std::size_t>(model.layer_sizes[l + 1]);
    nlohmann::json matrix = nlohmann::json::array();
    for (std::size_t i = 0; i < static_cast<std::size_t>(model.layer_sizes[l]); ++i) {
      nlohmann::json row = nlohmann::json::array();
      for (std::size_t k = 0; k < out; ++k) row.push_back(model.weights[l][i * out + k]);
      matrix.push_back(std::move(row));
    }
    weights.push_back(std::move(matrix));
  }
  j["weights"] = std::move(weights);
  j["biases"] = model.biases;
  return j.dump(2);
}

MlpModel model_from_json(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw_error(ErrorCode::kParse, std::string("malformed model file: ") + e.what());
  }
  MlpModel m;
  try {
    if (j.at("schema_version").get<int>() != 1)
      throw_error(ErrorCode::kParse, "unsupported model schema version");
    m.input_names = j.at("input_names").get<std::vector<std::string>>();
    m.output_name = j.at("output_name").get<std::string>();
    m.layer_sizes = j.at("layer_sizes").get<std::vector<int>>();
    auto acts = j.at("activations").get<std::vector<std::string>>();
    if (!acts.empty()) {
      m.hidden_activation = activation_from_name(acts.front());
      m.output_activation = activation_from_name(acts.back());
      if (acts.size() + 1 != m.layer_sizes.size())
        throw_error(ErrorCode::kIntegrity, "activation list length mismatch");
    }
    for (const auto& matrix : j.at("weights")) {
      std::vector<double> flat;
      std::size_t cols = 0;
      for (const auto& row : matrix) {
        if (cols == 0) cols = row.size();
        if (row.size() != cols)
          throw_error(ErrorCode::kIntegrity, "ragged weight matrix");
        for (const auto& v : row) flat.push_back(v.get<double>());
      }
      m.weights.push_back(std::move(flat));
    }
    m.biases = j.at("biases").get<std::vector<std::vector<double>>>();
  } catch (const nlohmann::json::exception& e) {
    throw_error(ErrorCode::kParse, std::string("malformed model file: ") + e.what());
  }
  m.validate();
  return m;
}

void save_model(const MlpModel& model, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out)
    throw_error(ErrorCode::kIo, "cannot open \"" + path + "\" for writing");
  out << model_to_json(model) << '\n';
  if (!out)
    throw_error(ErrorCode::kIo, "failed writing \"" + path + "\"");
}

MlpModel load_model(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in)
    throw_error(ErrorCode::kIo, "cannot open \"" + path + "\" for reading");
  std::stringstream buffer;
  buffer << in.rdbuf();
  return model_from_json(buffer.str());
}

SurfaceGrid response_surface_grid(const MlpModel& model, std::string_view var_i,
                                  std::string_view var_j, double fixed_value,
                                  int resolution) {
  if (var_i == var_j)
    throw_error(ErrorCode::kInvalidArgument, "surface variables must differ");
  if (resolution < 2)
    throw_error(ErrorCode::kInvalidArgument, "resolution must be at least 2");
  int ii = model.input_index(var_i);
  int jj = model.input_index(var_j);
  SurfaceGrid grid;
  grid.var_i = std::string(var_i);
  grid.var_j = std::string(var_j);
  grid.resolution = resolution;
  grid.fixed_value = fixed_value;
  grid.axis.resize(static_cast<std::size_t>(resolution));
  for (int a = 0; a < resolution; ++a)
    grid.axis[static_cast<std::size_t>(a)] =
        static_cast<double>(a) / static_cast<double>(resolution - 1);
  std::vector<double> x(static_cast<std::size_t>(model.input_size()), fixed_value);
  grid.values.resize(static_cast<std::size_t>(resolution) *
                     static_cast<std::size_t>(resolution));
  for (int a = 0; a < resolution; ++a) {
    x[static_cast<std::size_t>(ii)] = grid.axis[static_cast<std::size_t>(a)];
    for (int b = 0; b < resolution; ++b) {
      x[static_cast<std::size_t>(jj)] = grid.axis[static_cast<std::size_t>(b)];
      grid.values[static_cast<std::size_t>(a) * resolution + b] = model.forward(x);
    }
  }
  return grid;
}

}  // namespace lakeopt
