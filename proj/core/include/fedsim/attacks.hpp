#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <string_view>
#include <vector>

#include "fedsim/dataset.hpp"
#include "fedsim/fedreview.hpp"
#include "fedsim/mlp.hpp"
#include "fedsim/param_vector.hpp"

namespace fedsim {

enum class AttackKind { kNone, kScaling, kMinMax, kMinSum, kAmp };
enum class Perturbation { kUnitMean };

AttackKind parse_attack_kind(std::string_view name);
std::string_view to_string(AttackKind k);
Perturbation parse_perturbation(std::string_view name);
std::string_view to_string(Perturbation p);

struct AttackConfig {
  AttackKind kind = AttackKind::kNone;
  double lambda = 5.0;
  double gamma_init = 50.0;
  double tau = 1e-5;
  Perturbation perturbation = Perturbation::kUnitMean;
  /// Number of compromised clients acting as surrogate reviewers for AMP.
  std::size_t amp_surrogates = 5;
  /// Accept a candidate when the surrogates flag it instead of when it
  /// evades them.
  bool amp_accept_on_detect = false;

  void validate() const;
};

struct SearchStep {
  double gamma = 0.0;
  bool accepted = false;
};

struct BinarySearchTrace {
  std::vector<SearchStep> iterations;
  double gamma_succ = 0.0;
};

struct AttackResult {
  ParamVector update;
  BinarySearchTrace trace;
};

/// Halving search for the largest accepted gamma: start at gamma_init with
/// step alpha = gamma_init; on acceptance record gamma and move up by alpha/2,
/// otherwise move down by alpha/2; halve alpha; stop once |gamma_succ - gamma|
/// <= tau.
BinarySearchTrace halving_search(double gamma_init, double tau,
                                 const std::function<bool(double)>& accept);

/// -lambda * mean(benign).
ParamVector scaling_attack(std::span<const ParamVector> benign, double lambda);

/// Unit vector along `mean`. Throws DegenerateDirectionError for a zero mean.
ParamVector perturbation_direction(const ParamVector& mean, Perturbation p);

/// mean - gamma * direction.
ParamVector perturbed_update(const ParamVector& mean, const ParamVector& direction,
                             double gamma);

/// Largest distance from `candidate` to any benign update.
double max_distance_to(const ParamVector& candidate, std::span<const ParamVector> benign);
/// Sum of distances from `candidate` to the benign updates.
double sum_distance_to(const ParamVector& candidate, std::span<const ParamVector> benign);
/// max over benign pairs of ||u_i - u_j||.
double max_pairwise_distance(std::span<const ParamVector> benign);
/// Sum over all ordered benign pairs (i, j) of ||u_i - u_j||.
double sum_pairwise_distance(std::span<const ParamVector> benign);

/// Largest gamma whose poisoned update stays no farther from any benign
/// update than the benign updates are from each other.
AttackResult min_max_attack(std::span<const ParamVector> benign, const AttackConfig& cfg);

/// Largest gamma whose summed distance to the benign updates stays within the
/// summed benign pairwise distance.
AttackResult min_sum_attack(std::span<const ParamVector> benign, const AttackConfig& cfg);

/// Scaling factor equivalent to perturbing by gamma along the unit mean:
/// gamma / ||mean|| - 1.
double dynamic_lambda(double gamma, const ParamVector& mean);

/// Adaptive attack against the review defense: halving search where a
/// candidate is accepted when, pooled after the benign updates and reviewed
/// honestly by the surrogate datasets, it is not in the removal set.
/// `seed` drives the noniid-mode resampling of each surrogate's data.
AttackResult amp_attack(std::span<const ParamVector> benign,
                        std::span<const LabeledDataset> surrogate_reviewers,
                        const MlpModel& global, const AttackConfig& cfg,
                        const ReviewConfig& review_cfg, std::uint64_t seed,
                        std::size_t threads = 1);

}  // namespace fedsim
