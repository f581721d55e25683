#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

#include "fedsim/dataset.hpp"
#include "fedsim/param_vector.hpp"

namespace fedsim {

enum class Activation { kTanh, kRelu };

Activation parse_activation(std::string_view name);
std::string_view to_string(Activation a);

/// Fully connected softmax classifier.
///
/// Parameters are flattened layer by layer. For the layer mapping `in` units
/// to `out` units the block is the `out x in` weight matrix in row-major order
/// (row j holds the weights feeding output unit j) followed by the `out`
/// biases. Hidden layers apply the activation; the last layer emits logits.
class MlpModel {
 public:
  MlpModel(std::vector<std::size_t> layer_sizes, Activation activation);
  MlpModel(std::vector<std::size_t> layer_sizes, Activation activation,
           ParamVector params);

  /// Glorot-uniform weights drawn from `seed`, zero biases.
  static MlpModel initialized(std::vector<std::size_t> layer_sizes,
                              Activation activation, std::uint64_t seed);

  static std::size_t param_count(std::span<const std::size_t> layer_sizes);

  const std::vector<std::size_t>& layer_sizes() const noexcept { return layers_; }
  Activation activation() const noexcept { return activation_; }
  std::size_t input_dim() const noexcept { return layers_.front(); }
  std::size_t num_classes() const noexcept { return layers_.back(); }
  ShapeId shape() const noexcept { return params_.shape(); }

  const ParamVector& params() const noexcept { return params_; }
  void set_params(ParamVector params);
  /// Same architecture, different parameters.
  MlpModel with_params(ParamVector params) const;

 private:
  std::vector<std::size_t> layers_;
  Activation activation_;
  ParamVector params_;
};

struct SgdConfig {
  double learning_rate = 0.01;
  double momentum = 0.9;
  std::size_t batch_size = 32;
  std::size_t local_epochs = 5;

  void validate() const;
};

/// Softmax output for one input.
std::vector<double> forward(const MlpModel& model, std::span<const double> x);

/// Mean cross-entropy over the dataset.
double dataset_loss(const MlpModel& model, const LabeledDataset& data);

/// Fraction of samples whose arg-max prediction equals the label.
double accuracy(const MlpModel& model, const LabeledDataset& data);

/// Exact gradient of the mean cross-entropy over `batch`.
ParamVector gradient(const MlpModel& model, const LabeledDataset& batch);

/// Runs `cfg.local_epochs` epochs of shuffled mini-batch SGD with momentum
/// starting from `model` and returns the parameter delta. The final partial
/// batch of each epoch is kept.
ParamVector train_local(const MlpModel& model, const LabeledDataset& data,
                        const SgdConfig& cfg, std::uint64_t seed);

}  // namespace fedsim
