#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "fedsim/dataset.hpp"
#include "fedsim/mlp.hpp"
#include "fedsim/param_vector.hpp"

namespace fedsim {

struct ReviewConfig {
  double k = 1.0;
  /// Evaluate on a class-balanced resample of the reviewer's data.
  bool noniid_mode = false;
  /// Resample size in noniid mode; defaults to min(|D_r|, 256).
  std::optional<std::size_t> subsample_size;

  void validate() const;
  std::size_t effective_subsample_size(std::size_t data_size) const;
};

/// What a malicious reviewer reports as its adversary count.
enum class MaliciousCount { kHonest, kZero, kInflate };

MaliciousCount parse_malicious_count(std::string_view name);
std::string_view to_string(MaliciousCount m);

/// π maps update index -> rank, rank 0 being the most suspicious.
struct ReviewReport {
  std::size_t reviewer_id = 0;
  std::size_t n_adv = 0;
  std::vector<std::size_t> ranking;

  friend bool operator==(const ReviewReport&, const ReviewReport&) = default;
};

/// Loss of global + update_c on the reviewer's data for every update, in input
/// order. In noniid mode the data is first resampled with balanced_subsample
/// using `seed`.
std::vector<double> review_losses(const MlpModel& global,
                                  std::span<const ParamVector> updates,
                                  const LabeledDataset& reviewer_data,
                                  const ReviewConfig& cfg, std::uint64_t seed);

/// Robust outlier count: mu = median(losses), sigma = sqrt(median((l - mu)^2)),
/// returns #{l > mu + k * sigma}.
std::size_t estimate_n_adv(std::span<const double> losses, double k);

/// Descending-loss ranking; equal losses keep index order.
std::vector<std::size_t> rank_updates(std::span<const double> losses);

/// ω with ω[π[c]] = c. Throws PreconditionError if `ranking` is not a permutation.
std::vector<std::size_t> invert_ranking(std::span<const std::size_t> ranking);

ReviewReport honest_report(std::size_t reviewer_id, std::span<const double> losses, double k);

/// Reversed honest ranking (the likely-poisoned updates ranked last). The
/// count follows `count_mode`: the honest estimate, zero, or every update.
ReviewReport malicious_report(std::size_t reviewer_id, std::span<const double> losses,
                              double k, MaliciousCount count_mode);

/// Lower median of the reported counts.
std::size_t aggregate_counts(std::span<const ReviewReport> reports);

/// Each reviewer votes for its n_adv top-ranked updates; returns the n_adv most
/// voted update indices (ties to the lower index), sorted ascending.
std::vector<std::size_t> majority_vote(std::span<const ReviewReport> reports,
                                       std::size_t n_adv, std::size_t round_size);

/// P[X <= floor(n/2)] for X ~ Binomial(n, p): the chance that malicious
/// reviewers do not outnumber benign ones.
double dominance_probability(std::size_t n, double p);

struct Reviewer {
  std::size_t id = 0;
  const LabeledDataset* data = nullptr;
  bool malicious = false;
  std::uint64_t seed = 0;
};

struct ReviewOutcome {
  std::vector<ReviewReport> reports;
  std::size_t n_adv = 0;
  std::vector<std::size_t> removed;
};

/// One full review pass: every reviewer scores the updates and reports, the
/// server aggregates the counts and votes on the removal set.
ReviewOutcome run_review(const MlpModel& global, std::span<const ParamVector> updates,
                         std::span<const Reviewer> reviewers, const ReviewConfig& cfg,
                         MaliciousCount malicious_count, std::size_t threads = 1);

}  // namespace fedsim
