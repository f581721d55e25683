#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace fedsim {

/// Labeled samples stored row-major. Labels are class indices in
/// [0, num_classes).
class LabeledDataset {
 public:
  LabeledDataset() = default;
  LabeledDataset(std::size_t dims, std::size_t num_classes,
                 std::vector<double> features, std::vector<std::size_t> labels);

  std::size_t size() const noexcept { return labels_.size(); }
  bool empty() const noexcept { return labels_.empty(); }
  std::size_t dims() const noexcept { return dims_; }
  std::size_t num_classes() const noexcept { return num_classes_; }

  std::span<const double> features(std::size_t i) const {
    return {features_.data() + i * dims_, dims_};
  }
  std::size_t label(std::size_t i) const { return labels_[i]; }
  std::span<const std::size_t> labels() const noexcept { return labels_; }
  std::span<const double> raw_features() const noexcept { return features_; }

  /// Rows at `indices`, in that order. Repeated indices are allowed.
  LabeledDataset subset(std::span<const std::size_t> indices) const;
  /// Per-class sample counts, length num_classes().
  std::vector<std::size_t> class_counts() const;

  friend bool operator==(const LabeledDataset&, const LabeledDataset&) = default;

 private:
  std::size_t dims_ = 0;
  std::size_t num_classes_ = 0;
  std::vector<double> features_;
  std::vector<std::size_t> labels_;
};

}  // namespace fedsim
