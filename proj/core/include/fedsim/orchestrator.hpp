#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "fedsim/aggregation.hpp"
#include "fedsim/attacks.hpp"
#include "fedsim/data.hpp"
#include "fedsim/fedreview.hpp"
#include "fedsim/mlp.hpp"

namespace fedsim {

enum class DefenseKind { kFedAvg, kMultiKrum, kTrimmedMean, kMedian, kFedReview };

DefenseKind parse_defense(std::string_view name);
std::string_view to_string(DefenseKind d);

enum class DataSource { kSynthetic, kCsv };

struct DataConfig {
  DataSource source = DataSource::kSynthetic;
  std::size_t num_classes = 10;
  std::size_t samples_per_class = 600;
  std::size_t dims = 32;
  double class_separation = 5.0;
  /// Held-out share of the generated (or single CSV) pool.
  double test_fraction = 1.0 / 6.0;
  std::string csv_path;
  /// Optional separate test file; when set, test_fraction is not used.
  std::string test_csv_path;
};

struct ModelConfig {
  std::vector<std::size_t> hidden{64};
  Activation activation = Activation::kTanh;
};

struct ExperimentConfig {
  std::uint64_t seed = 1;
  std::size_t rounds = 100;
  std::size_t num_clients = 100;
  std::size_t clients_per_round = 10;
  /// Defaults to clients_per_round.
  std::optional<std::size_t> reviewers_per_round;
  double malicious_fraction = 0.2;

  DataConfig data;
  PartitionScheme partition_scheme = PartitionScheme::kIid;
  std::optional<double> partition_alpha;
  std::optional<std::size_t> labels_per_client;
  ModelConfig model;
  SgdConfig sgd;

  AttackConfig attack;
  DefenseKind defense = DefenseKind::kFedReview;
  std::size_t krum_m_adversaries = 2;
  std::size_t trim_beta = 2;
  ReviewConfig review;
  MaliciousCount malicious_count = MaliciousCount::kHonest;

  std::size_t reviewers() const { return reviewers_per_round.value_or(clients_per_round); }
  PartitionSpec partition_spec() const;
  AggregatorConfig aggregator() const;
  /// Throws ConfigError naming the violated constraint.
  void validate() const;
};

struct RoundRecord {
  std::size_t round = 0;
  std::vector<std::size_t> selected;
  std::vector<std::size_t> reviewers;
  /// Ground truth per update position (never seen by defenses).
  std::vector<bool> malicious;
  std::vector<std::size_t> removed;
  bool fedreview = false;
  std::optional<std::size_t> n_adv;
  double test_loss = 0.0;
  double test_accuracy = 0.0;
  std::optional<double> gamma_succ;
  std::optional<double> dynamic_lambda;

  std::size_t malicious_count() const;
  std::size_t true_positives() const;

  friend bool operator==(const RoundRecord&, const RoundRecord&) = default;
};

struct ExperimentResult {
  std::vector<RoundRecord> rounds;
  ParamVector final_params;
};

struct RunOptions {
  std::size_t threads = 1;
  std::function<void(const RoundRecord&)> on_round;
};

/// ⌊fraction * num_clients⌋ distinct client ids, sorted.
std::vector<std::size_t> adversary_assignment(std::size_t num_clients, double fraction,
                                              std::uint64_t seed);

/// Builds the (train pool, test set) pair described by cfg.data.
std::pair<LabeledDataset, LabeledDataset> prepare_data(const ExperimentConfig& cfg);

/// Runs cfg.rounds federated rounds. Each round samples clients, collects
/// benign or poisoned updates, applies the configured defense and advances the
/// global model. Failures are rethrown as RoundError.
ExperimentResult run_experiment(const ExperimentConfig& cfg, const LabeledDataset& train,
                                const LabeledDataset& test, const RunOptions& options = {});

struct DetectionMetrics {
  double precision = 1.0;
  double recall = 1.0;
  std::size_t true_positives = 0;
  std::size_t removed = 0;
  std::size_t malicious = 0;
  /// Nothing was removed, so precision is reported as 1.0 by convention.
  bool precision_undefined = false;
  bool recall_undefined = false;
};

/// Cumulative precision/recall of removals over the fedreview rounds. Rounds
/// with neither removals nor malicious updates are skipped.
DetectionMetrics detection_metrics(std::span<const RoundRecord> records);

}  // namespace fedsim
