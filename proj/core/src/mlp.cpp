#include "fedsim/mlp.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <string>

#include "fedsim/error.hpp"
#include "fedsim/rng.hpp"

namespace fedsim {

Activation parse_activation(std::string_view name) {
  if (name == "tanh") return Activation::kTanh;
  if (name == "relu") return Activation::kRelu;
  throw PreconditionError("unknown activation '" + std::string(name) + "'");
}

std::string_view to_string(Activation a) {
  return a == Activation::kTanh ? "tanh" : "relu";
}

std::size_t MlpModel::param_count(std::span<const std::size_t> layer_sizes) {
  std::size_t n = 0;
  for (std::size_t l = 0; l + 1 < layer_sizes.size(); ++l) {
    n += layer_sizes[l] * layer_sizes[l + 1] + layer_sizes[l + 1];
  }
  return n;
}

namespace {

void validate_layers(const std::vector<std::size_t>& layers) {
  if (layers.size() < 2) throw PreconditionError("mlp: need at least input and output layers");
  for (std::size_t s : layers) {
    if (s == 0) throw PreconditionError("mlp: layer sizes must be positive");
  }
}

// Per-call scratch space: post-activation values per layer and backprop deltas.
struct Workspace {
  explicit Workspace(const std::vector<std::size_t>& layers)
      : acts(layers.size()), deltas(layers.size()) {
    for (std::size_t l = 0; l < layers.size(); ++l) {
      acts[l].resize(layers[l]);
      deltas[l].resize(layers[l]);
    }
  }
  std::vector<std::vector<double>> acts;
  std::vector<std::vector<double>> deltas;
};

// Fills ws.acts; the last entry holds the raw logits.
void run_forward(const std::vector<std::size_t>& layers, Activation act,
                 std::span<const double> params, std::span<const double> x,
                 Workspace& ws) {
  std::copy(x.begin(), x.end(), ws.acts[0].begin());
  std::size_t offset = 0;
  const std::size_t last = layers.size() - 1;
  for (std::size_t l = 0; l < last; ++l) {
    const std::size_t in = layers[l];
    const std::size_t out = layers[l + 1];
    const double* w = params.data() + offset;
    const double* b = w + in * out;
    const auto& a_in = ws.acts[l];
    auto& a_out = ws.acts[l + 1];
    for (std::size_t j = 0; j < out; ++j) {
      double z = b[j];
      const double* row = w + j * in;
      for (std::size_t i = 0; i < in; ++i) z += row[i] * a_in[i];
      if (l + 1 < last) {
        z = act == Activation::kTanh ? std::tanh(z) : std::max(z, 0.0);
      }
      a_out[j] = z;
    }
    offset += in * out + out;
  }
}

// Numerically stable log-sum-exp of the logits.
double log_sum_exp(std::span<const double> logits) {
  const double m = *std::max_element(logits.begin(), logits.end());
  double s = 0.0;
  for (double z : logits) s += std::exp(z - m);
  return m + std::log(s);
}

void softmax_into(std::span<const double> logits, std::span<double> out) {
  const double m = *std::max_element(logits.begin(), logits.end());
  double s = 0.0;
  for (std::size_t i = 0; i < logits.size(); ++i) {
    out[i] = std::exp(logits[i] - m);
    s += out[i];
  }
  for (double& p : out) p /= s;
}

void check_input(const MlpModel& model, std::size_t dims) {
  if (dims != model.input_dim()) {
    throw ShapeError("mlp: input has " + std::to_string(dims) +
                     " features, model expects " + std::to_string(model.input_dim()));
  }
}

void check_dataset(const MlpModel& model, const LabeledDataset& data, const char* what) {
  if (data.empty()) throw PreconditionError(std::string(what) + ": empty dataset");
  check_input(model, data.dims());
  if (data.num_classes() > model.num_classes()) {
    throw ShapeError(std::string(what) + ": dataset has more classes than the model");
  }
}

// Adds the mean-loss gradient over rows `rows` of `data` into `grad`.
void accumulate_gradient(const MlpModel& model, std::span<const double> params,
                         const LabeledDataset& data, std::span<const std::size_t> rows,
                         Workspace& ws, std::span<double> grad) {
  const auto& layers = model.layer_sizes();
  const std::size_t last = layers.size() - 1;
  const double inv_n = 1.0 / static_cast<double>(rows.size());

  std::vector<std::size_t> offsets(last);
  for (std::size_t l = 0, off = 0; l < last; ++l) {
    offsets[l] = off;
    off += layers[l] * layers[l + 1] + layers[l + 1];
  }

  for (std::size_t r : rows) {
    run_forward(layers, model.activation(), params, data.features(r), ws);
    softmax_into(ws.acts[last], ws.deltas[last]);
    ws.deltas[last][data.label(r)] -= 1.0;

    for (std::size_t l = last; l-- > 0;) {
      const std::size_t in = layers[l];
      const std::size_t out = layers[l + 1];
      const double* w = params.data() + offsets[l];
      double* gw = grad.data() + offsets[l];
      double* gb = gw + in * out;
      const auto& a_in = ws.acts[l];
      const auto& delta = ws.deltas[l + 1];
      for (std::size_t j = 0; j < out; ++j) {
        const double d = delta[j] * inv_n;
        gb[j] += d;
        double* grow = gw + j * in;
        for (std::size_t i = 0; i < in; ++i) grow[i] += d * a_in[i];
      }
      if (l == 0) break;
      auto& prev = ws.deltas[l];
      std::fill(prev.begin(), prev.end(), 0.0);
      for (std::size_t j = 0; j < out; ++j) {
        const double* row = w + j * in;
        const double d = delta[j];
        for (std::size_t i = 0; i < in; ++i) prev[i] += row[i] * d;
      }
      for (std::size_t i = 0; i < in; ++i) {
        const double a = a_in[i];
        prev[i] *= model.activation() == Activation::kTanh ? 1.0 - a * a
                                                            : (a > 0.0 ? 1.0 : 0.0);
      }
    }
  }
}

}  // namespace

MlpModel::MlpModel(std::vector<std::size_t> layer_sizes, Activation activation)
    : layers_(std::move(layer_sizes)), activation_(activation) {
  validate_layers(layers_);
  params_ = ParamVector::zeros(param_count(layers_), ShapeId::layered(layers_));
}

MlpModel::MlpModel(std::vector<std::size_t> layer_sizes, Activation activation,
                   ParamVector params)
    : MlpModel(std::move(layer_sizes), activation) {
  set_params(std::move(params));
}

MlpModel MlpModel::initialized(std::vector<std::size_t> layer_sizes,
                               Activation activation, std::uint64_t seed) {
  MlpModel model(std::move(layer_sizes), activation);
  Rng rng = make_rng(seed);
  auto p = model.params_.values();
  std::size_t offset = 0;
  for (std::size_t l = 0; l + 1 < model.layers_.size(); ++l) {
    const std::size_t in = model.layers_[l];
    const std::size_t out = model.layers_[l + 1];
    const double limit = std::sqrt(6.0 / static_cast<double>(in + out));
    std::uniform_real_distribution<double> dist(-limit, limit);
    for (std::size_t k = 0; k < in * out; ++k) p[offset + k] = dist(rng);
    offset += in * out + out;
  }
  return model;
}

void MlpModel::set_params(ParamVector params) {
  if (params.shape() != shape() || params.size() != params_.size()) {
    throw ShapeError("mlp: parameter vector does not match architecture");
  }
  params_ = std::move(params);
}

MlpModel MlpModel::with_params(ParamVector params) const {
  MlpModel copy(layers_, activation_);
  copy.set_params(std::move(params));
  return copy;
}

void SgdConfig::validate() const {
  if (!(learning_rate >= 0.0) || !std::isfinite(learning_rate)) {
    throw PreconditionError("sgd: learning_rate must be a finite nonnegative number");
  }
  if (!(momentum >= 0.0 && momentum < 1.0)) {
    throw PreconditionError("sgd: momentum must be in [0, 1)");
  }
  if (batch_size == 0) throw PreconditionError("sgd: batch_size must be positive");
  if (local_epochs == 0) throw PreconditionError("sgd: local_epochs must be positive");
}

std::vector<double> forward(const MlpModel& model, std::span<const double> x) {
  check_input(model, x.size());
  Workspace ws(model.layer_sizes());
  run_forward(model.layer_sizes(), model.activation(), model.params().values(), x, ws);
  std::vector<double> probs(model.num_classes());
  softmax_into(ws.acts.back(), probs);
  return probs;
}

double dataset_loss(const MlpModel& model, const LabeledDataset& data) {
  check_dataset(model, data, "dataset_loss");
  Workspace ws(model.layer_sizes());
  double total = 0.0;
  for (std::size_t i = 0; i < data.size(); ++i) {
    run_forward(model.layer_sizes(), model.activation(), model.params().values(),
                data.features(i), ws);
    const auto& logits = ws.acts.back();
    total += log_sum_exp(logits) - logits[data.label(i)];
  }
  return total / static_cast<double>(data.size());
}

double accuracy(const MlpModel& model, const LabeledDataset& data) {
  check_dataset(model, data, "accuracy");
  Workspace ws(model.layer_sizes());
  std::size_t correct = 0;
  for (std::size_t i = 0; i < data.size(); ++i) {
    run_forward(model.layer_sizes(), model.activation(), model.params().values(),
                data.features(i), ws);
    const auto& logits = ws.acts.back();
    const auto best = static_cast<std::size_t>(
        std::max_element(logits.begin(), logits.end()) - logits.begin());
    if (best == data.label(i)) ++correct;
  }
  return static_cast<double>(correct) / static_cast<double>(data.size());
}

ParamVector gradient(const MlpModel& model, const LabeledDataset& batch) {
  check_dataset(model, batch, "gradient");
  Workspace ws(model.layer_sizes());
  std::vector<std::size_t> rows(batch.size());
  std::iota(rows.begin(), rows.end(), std::size_t{0});
  ParamVector grad = ParamVector::zeros_like(model.params());
  accumulate_gradient(model, model.params().values(), batch, rows, ws, grad.values());
  return grad;
}

ParamVector train_local(const MlpModel& model, const LabeledDataset& data,
                        const SgdConfig& cfg, std::uint64_t seed) {
  check_dataset(model, data, "train_local");
  cfg.validate();

  const auto& base = model.params();
  ParamVector delta = ParamVector::zeros_like(base);
  ParamVector work = base;
  ParamVector velocity = ParamVector::zeros_like(base);
  ParamVector grad = ParamVector::zeros_like(base);
  Workspace ws(model.layer_sizes());
  Rng rng = make_rng(seed);

  std::vector<std::size_t> order(data.size());
  std::iota(order.begin(), order.end(), std::size_t{0});

  for (std::size_t epoch = 0; epoch < cfg.local_epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    for (std::size_t start = 0; start < order.size(); start += cfg.batch_size) {
      const std::size_t len = std::min(cfg.batch_size, order.size() - start);
      std::fill(grad.values().begin(), grad.values().end(), 0.0);
      accumulate_gradient(model, work.values(), data,
                          std::span<const std::size_t>(order).subspan(start, len), ws,
                          grad.values());
      velocity *= cfg.momentum;
      velocity += grad;
      delta.axpy(-cfg.learning_rate, velocity);
      // Working point is recomputed from the base so the returned delta is
      // exactly the accumulated step sum.
      for (std::size_t i = 0; i < work.size(); ++i) work[i] = base[i] + delta[i];
    }
  }
  return require_finite(delta, "train_local");
}

}  // namespace fedsim
