#include "fedsim/attacks.hpp"

#include <algorithm>
#include <cmath>
#include <optional>
#include <string>

#include "fedsim/data.hpp"
#include "fedsim/error.hpp"
#include "fedsim/parallel.hpp"
#include "fedsim/rng.hpp"

namespace fedsim {

AttackKind parse_attack_kind(std::string_view name) {
  if (name == "none") return AttackKind::kNone;
  if (name == "scaling") return AttackKind::kScaling;
  if (name == "min_max") return AttackKind::kMinMax;
  if (name == "min_sum") return AttackKind::kMinSum;
  if (name == "amp") return AttackKind::kAmp;
  throw PreconditionError("unknown attack kind '" + std::string(name) + "'");
}

std::string_view to_string(AttackKind k) {
  switch (k) {
    case AttackKind::kNone: return "none";
    case AttackKind::kScaling: return "scaling";
    case AttackKind::kMinMax: return "min_max";
    case AttackKind::kMinSum: return "min_sum";
    case AttackKind::kAmp: return "amp";
  }
  return "?";
}

Perturbation parse_perturbation(std::string_view name) {
  if (name == "unit_mean") return Perturbation::kUnitMean;
  throw PreconditionError("unknown perturbation '" + std::string(name) + "'");
}

std::string_view to_string(Perturbation) { return "unit_mean"; }

void AttackConfig::validate() const {
  if (!std::isfinite(lambda)) throw PreconditionError("attack: lambda must be finite");
  if (!(gamma_init > 0.0)) throw PreconditionError("attack: gamma_init must be positive");
  if (!(tau > 0.0 && tau < gamma_init)) {
    throw PreconditionError("attack: tau must be in (0, gamma_init)");
  }
  if (kind == AttackKind::kAmp && amp_surrogates == 0) {
    throw PreconditionError("attack: amp needs at least one surrogate reviewer");
  }
}

BinarySearchTrace halving_search(double gamma_init, double tau,
                                 const std::function<bool(double)>& accept) {
  if (!(gamma_init > 0.0 && tau > 0.0)) {
    throw PreconditionError("halving_search: gamma_init and tau must be positive");
  }
  BinarySearchTrace trace;
  double gamma = gamma_init;
  double alpha = gamma_init;
  while (std::abs(trace.gamma_succ - gamma) > tau) {
    const bool ok = accept(gamma);
    trace.iterations.push_back({gamma, ok});
    if (ok) {
      trace.gamma_succ = gamma;
      gamma += alpha / 2.0;
    } else {
      gamma -= alpha / 2.0;
    }
    alpha /= 2.0;
  }
  return trace;
}

ParamVector scaling_attack(std::span<const ParamVector> benign, double lambda) {
  if (!std::isfinite(lambda)) throw PreconditionError("scaling_attack: lambda must be finite");
  ParamVector out = mean_of(benign);
  out *= -lambda;
  return require_finite(out, "scaling_attack");
}

ParamVector perturbation_direction(const ParamVector& mean, Perturbation) {
  const double n = mean.norm();
  if (!(n > 0.0)) throw DegenerateDirectionError("mean update is zero; unit-mean direction undefined");
  ParamVector dir = mean;
  dir *= 1.0 / n;
  return dir;
}

ParamVector perturbed_update(const ParamVector& mean, const ParamVector& direction,
                             double gamma) {
  ParamVector out = mean;
  out.axpy(-gamma, direction);
  return out;
}

double max_distance_to(const ParamVector& candidate, std::span<const ParamVector> benign) {
  double best = 0.0;
  for (const auto& u : benign) best = std::max(best, distance(candidate, u));
  return best;
}

double sum_distance_to(const ParamVector& candidate, std::span<const ParamVector> benign) {
  double total = 0.0;
  for (const auto& u : benign) total += distance(candidate, u);
  return total;
}

double max_pairwise_distance(std::span<const ParamVector> benign) {
  double best = 0.0;
  for (std::size_t i = 0; i < benign.size(); ++i) {
    for (std::size_t j = i + 1; j < benign.size(); ++j) {
      best = std::max(best, distance(benign[i], benign[j]));
    }
  }
  return best;
}

double sum_pairwise_distance(std::span<const ParamVector> benign) {
  double total = 0.0;
  for (std::size_t i = 0; i < benign.size(); ++i) {
    for (std::size_t j = i + 1; j < benign.size(); ++j) {
      total += 2.0 * distance(benign[i], benign[j]);
    }
  }
  return total;
}

namespace {

template <typename Feasible>
AttackResult distance_constrained_attack(std::span<const ParamVector> benign,
                                         const AttackConfig& cfg, const char* what,
                                         Feasible feasible) {
  if (benign.size() < 2) throw PreconditionError(std::string(what) + ": need >= 2 benign updates");
  require_uniform(benign, what);
  cfg.validate();
  const ParamVector mean = mean_of(benign);
  const ParamVector dir = perturbation_direction(mean, cfg.perturbation);
  AttackResult result;
  result.trace = halving_search(cfg.gamma_init, cfg.tau, [&](double gamma) {
    return feasible(perturbed_update(mean, dir, gamma));
  });
  result.update = perturbed_update(mean, dir, result.trace.gamma_succ);
  require_finite(result.update, what);
  return result;
}

}  // namespace

AttackResult min_max_attack(std::span<const ParamVector> benign, const AttackConfig& cfg) {
  const double bound = benign.size() >= 2 ? max_pairwise_distance(benign) : 0.0;
  return distance_constrained_attack(benign, cfg, "min_max", [&](const ParamVector& c) {
    return max_distance_to(c, benign) <= bound;
  });
}

AttackResult min_sum_attack(std::span<const ParamVector> benign, const AttackConfig& cfg) {
  const double bound = benign.size() >= 2 ? sum_pairwise_distance(benign) : 0.0;
  return distance_constrained_attack(benign, cfg, "min_sum", [&](const ParamVector& c) {
    return sum_distance_to(c, benign) <= bound;
  });
}

double dynamic_lambda(double gamma, const ParamVector& mean) {
  const double n = mean.norm();
  if (!(n > 0.0)) throw DegenerateDirectionError("dynamic_lambda: mean update has zero norm");
  return gamma / n - 1.0;
}

AttackResult amp_attack(std::span<const ParamVector> benign,
                        std::span<const LabeledDataset> surrogate_reviewers,
                        const MlpModel& global, const AttackConfig& cfg,
                        const ReviewConfig& review_cfg, std::uint64_t seed,
                        std::size_t threads) {
  if (surrogate_reviewers.empty()) throw PreconditionError("amp_attack: no surrogate reviewers");
  if (cfg.kind != AttackKind::kAmp) throw PreconditionError("amp_attack: config kind is not amp");
  require_uniform(benign, "amp_attack");
  cfg.validate();
  review_cfg.validate();

  const ParamVector mean = mean_of(benign);
  const ParamVector dir = perturbation_direction(mean, cfg.perturbation);
  const std::size_t m_index = benign.size();
  const std::size_t n_pool = benign.size() + 1;
  const std::size_t n_surr = surrogate_reviewers.size();

  // Benign losses do not depend on gamma; each surrogate scores them once on a
  // fixed evaluation set.
  std::vector<std::optional<LabeledDataset>> resampled(n_surr);
  std::vector<std::vector<double>> base_losses(n_surr);
  parallel_for(n_surr, threads, [&](std::size_t s) {
    const LabeledDataset& data = surrogate_reviewers[s];
    if (data.empty()) throw PreconditionError("amp_attack: empty surrogate dataset");
    if (review_cfg.noniid_mode) {
      resampled[s] = balanced_subsample(data, review_cfg.effective_subsample_size(data.size()),
                                        derive_seed(seed, SeedStream::kReviewSubsample, 0, s));
    }
    const LabeledDataset& eval = resampled[s] ? *resampled[s] : data;
    auto& losses = base_losses[s];
    losses.reserve(n_pool);
    for (const auto& u : benign) {
      losses.push_back(dataset_loss(global.with_params(global.params() + u), eval));
    }
  });

  auto flagged = [&](double gamma) {
    const ParamVector model_params = global.params() + perturbed_update(mean, dir, gamma);
    const MlpModel candidate = global.with_params(model_params);
    std::vector<ReviewReport> reports(n_surr);
    parallel_for(n_surr, threads, [&](std::size_t s) {
      const LabeledDataset& eval = resampled[s] ? *resampled[s] : surrogate_reviewers[s];
      std::vector<double> losses = base_losses[s];
      losses.push_back(dataset_loss(candidate, eval));
      reports[s] = honest_report(s, losses, review_cfg.k);
    });
    const auto removed = majority_vote(reports, aggregate_counts(reports), n_pool);
    return std::find(removed.begin(), removed.end(), m_index) != removed.end();
  };

  AttackResult result;
  result.trace = halving_search(cfg.gamma_init, cfg.tau, [&](double gamma) {
    return flagged(gamma) == cfg.amp_accept_on_detect;
  });
  result.update = perturbed_update(mean, dir, result.trace.gamma_succ);
  require_finite(result.update, "amp_attack");
  return result;
}

}  // namespace fedsim
