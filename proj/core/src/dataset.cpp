#include "fedsim/dataset.hpp"

#include <string>

#include "fedsim/error.hpp"

namespace fedsim {

LabeledDataset::LabeledDataset(std::size_t dims, std::size_t num_classes,
                               std::vector<double> features,
                               std::vector<std::size_t> labels)
    : dims_(dims),
      num_classes_(num_classes),
      features_(std::move(features)),
      labels_(std::move(labels)) {
  if (dims_ == 0) throw PreconditionError("dataset: dims must be positive");
  if (num_classes_ == 0) throw PreconditionError("dataset: num_classes must be positive");
  if (features_.size() != labels_.size() * dims_) {
    throw ShapeError("dataset: feature rows do not match label count");
  }
  for (std::size_t i = 0; i < labels_.size(); ++i) {
    if (labels_[i] >= num_classes_) {
      throw PreconditionError("dataset: label " + std::to_string(labels_[i]) +
                              " at row " + std::to_string(i) + " out of range");
    }
  }
}

LabeledDataset LabeledDataset::subset(std::span<const std::size_t> indices) const {
  std::vector<double> feats;
  feats.reserve(indices.size() * dims_);
  std::vector<std::size_t> labels;
  labels.reserve(indices.size());
  for (std::size_t idx : indices) {
    if (idx >= size()) throw PreconditionError("dataset: subset index out of range");
    auto row = features(idx);
    feats.insert(feats.end(), row.begin(), row.end());
    labels.push_back(labels_[idx]);
  }
  LabeledDataset out;
  out.dims_ = dims_;
  out.num_classes_ = num_classes_;
  out.features_ = std::move(feats);
  out.labels_ = std::move(labels);
  return out;
}

std::vector<std::size_t> LabeledDataset::class_counts() const {
  std::vector<std::size_t> counts(num_classes_, 0);
  for (std::size_t l : labels_) ++counts[l];
  return counts;
}

}  // namespace fedsim
