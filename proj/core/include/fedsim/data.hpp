#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "fedsim/dataset.hpp"

namespace fedsim {

/// Gaussian class clusters with unit noise. Class means point along random
/// near-orthogonal directions, scaled so that mean-to-mean distances are about
/// `class_separation`. Features are standardized per dimension afterwards.
LabeledDataset generate_synthetic(std::size_t num_classes,
                                  std::size_t samples_per_class, std::size_t dims,
                                  double class_separation, std::uint64_t seed);

enum class PartitionScheme { kIid, kDirichlet, kLabelShard };

PartitionScheme parse_partition_scheme(std::string_view name);
std::string_view to_string(PartitionScheme s);

struct PartitionSpec {
  PartitionScheme scheme = PartitionScheme::kIid;
  std::size_t num_clients = 1;
  std::optional<double> alpha;                     // dirichlet only
  std::optional<std::size_t> labels_per_client;    // label_shard only

  static PartitionSpec iid(std::size_t num_clients);
  static PartitionSpec dirichlet(std::size_t num_clients, double alpha);
  static PartitionSpec label_shard(std::size_t num_clients, std::size_t labels_per_client);

  void validate() const;
};

/// Splits `data` into `spec.num_clients` disjoint shards whose union is the
/// input. Throws PartitionError if a client would end up with no samples.
std::vector<LabeledDataset> partition(const LabeledDataset& data,
                                      const PartitionSpec& spec, std::uint64_t seed);

/// Same as partition() but returns row indices into `data` per client.
std::vector<std::vector<std::size_t>> partition_indices(const LabeledDataset& data,
                                                        const PartitionSpec& spec,
                                                        std::uint64_t seed);

/// Draws `size` rows with replacement, each row weighted by the inverse of its
/// class frequency, so every present class is equally likely.
LabeledDataset balanced_subsample(const LabeledDataset& data, std::size_t size,
                                  std::uint64_t seed);

/// Seeded shuffle split into (train, test); the test part gets
/// round(test_fraction * size) rows.
std::pair<LabeledDataset, LabeledDataset> train_test_split(const LabeledDataset& data,
                                                           double test_fraction,
                                                           std::uint64_t seed);

/// Comma-separated rows with the integer class label in the last column. A
/// leading header row is skipped when its fields are not numeric. When
/// `num_classes` is absent it is inferred as max label + 1.
LabeledDataset read_csv(std::istream& in, std::optional<std::size_t> num_classes = {});
LabeledDataset load_csv(const std::string& path,
                        std::optional<std::size_t> num_classes = {});

}  // namespace fedsim
