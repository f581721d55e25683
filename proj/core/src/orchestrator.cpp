#include "fedsim/orchestrator.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "fedsim/error.hpp"
#include "fedsim/parallel.hpp"
#include "fedsim/rng.hpp"

namespace fedsim {

DefenseKind parse_defense(std::string_view name) {
  if (name == "fedavg") return DefenseKind::kFedAvg;
  if (name == "multi_krum") return DefenseKind::kMultiKrum;
  if (name == "trimmed_mean") return DefenseKind::kTrimmedMean;
  if (name == "median") return DefenseKind::kMedian;
  if (name == "fedreview") return DefenseKind::kFedReview;
  throw PreconditionError("unknown defense '" + std::string(name) + "'");
}

std::string_view to_string(DefenseKind d) {
  switch (d) {
    case DefenseKind::kFedAvg: return "fedavg";
    case DefenseKind::kMultiKrum: return "multi_krum";
    case DefenseKind::kTrimmedMean: return "trimmed_mean";
    case DefenseKind::kMedian: return "median";
    case DefenseKind::kFedReview: return "fedreview";
  }
  return "?";
}

PartitionSpec ExperimentConfig::partition_spec() const {
  return {partition_scheme, num_clients, partition_alpha, labels_per_client};
}

AggregatorConfig ExperimentConfig::aggregator() const {
  AggregatorConfig agg;
  switch (defense) {
    case DefenseKind::kMultiKrum: agg.rule = AggregationRule::kMultiKrum; break;
    case DefenseKind::kTrimmedMean: agg.rule = AggregationRule::kTrimmedMean; break;
    case DefenseKind::kMedian: agg.rule = AggregationRule::kMedian; break;
    default: agg.rule = AggregationRule::kFedAvg; break;
  }
  agg.m_adversaries = krum_m_adversaries;
  agg.beta = trim_beta;
  return agg;
}

namespace {

// Re-raises a library PreconditionError as a ConfigError on `field`.
template <typename Fn>
void check_field(const char* field, Fn&& fn) {
  try {
    fn();
  } catch (const PreconditionError& e) {
    throw ConfigError(field, e.what());
  }
}

}  // namespace

void ExperimentConfig::validate() const {
  if (rounds == 0) throw ConfigError("experiment.rounds", "must be positive");
  if (num_clients == 0) throw ConfigError("experiment.num_clients", "must be positive");
  if (clients_per_round == 0) throw ConfigError("experiment.clients_per_round", "must be positive");
  if (reviewers() == 0) throw ConfigError("experiment.reviewers_per_round", "must be positive");
  if (clients_per_round + reviewers() > num_clients) {
    throw ConfigError("experiment.reviewers_per_round",
                      "clients_per_round + reviewers_per_round must not exceed num_clients (" +
                          std::to_string(clients_per_round) + " + " +
                          std::to_string(reviewers()) + " > " + std::to_string(num_clients) + ")");
  }
  if (!(malicious_fraction >= 0.0 && malicious_fraction < 1.0)) {
    throw ConfigError("experiment.malicious_fraction", "must be in [0, 1)");
  }
  if (data.source == DataSource::kSynthetic) {
    if (data.num_classes < 2) throw ConfigError("data.num_classes", "must be >= 2");
    if (data.samples_per_class == 0) throw ConfigError("data.samples_per_class", "must be positive");
    if (data.dims == 0) throw ConfigError("data.dims", "must be positive");
    if (!(data.class_separation > 0.0)) throw ConfigError("data.class_separation", "must be positive");
  } else if (data.csv_path.empty()) {
    throw ConfigError("data.csv_path", "required when data.source = csv");
  }
  if (data.test_csv_path.empty() && !(data.test_fraction > 0.0 && data.test_fraction < 1.0)) {
    throw ConfigError("data.test_fraction", "must be in (0, 1)");
  }
  for (std::size_t h : model.hidden) {
    if (h == 0) throw ConfigError("model.hidden", "layer sizes must be positive");
  }
  check_field("partition", [&] { partition_spec().validate(); });
  check_field("sgd", [&] { sgd.validate(); });
  check_field("attack", [&] { attack.validate(); });
  check_field("review", [&] { review.validate(); });
  check_field("defense", [&] { aggregator().validate(clients_per_round); });
}

std::size_t RoundRecord::malicious_count() const {
  return static_cast<std::size_t>(std::count(malicious.begin(), malicious.end(), true));
}

std::size_t RoundRecord::true_positives() const {
  return static_cast<std::size_t>(
      std::count_if(removed.begin(), removed.end(), [&](std::size_t i) { return malicious[i]; }));
}

std::vector<std::size_t> adversary_assignment(std::size_t num_clients, double fraction,
                                              std::uint64_t seed) {
  if (!(fraction >= 0.0 && fraction < 1.0)) {
    throw PreconditionError("adversary_assignment: fraction must be in [0, 1)");
  }
  const auto count = static_cast<std::size_t>(
      std::floor(fraction * static_cast<double>(num_clients) + 1e-9));
  std::vector<std::size_t> ids(num_clients);
  std::iota(ids.begin(), ids.end(), std::size_t{0});
  Rng rng = make_rng(seed);
  std::shuffle(ids.begin(), ids.end(), rng);
  ids.resize(count);
  std::sort(ids.begin(), ids.end());
  return ids;
}

std::pair<LabeledDataset, LabeledDataset> prepare_data(const ExperimentConfig& cfg) {
  const auto& d = cfg.data;
  LabeledDataset pool;
  if (d.source == DataSource::kSynthetic) {
    pool = generate_synthetic(d.num_classes, d.samples_per_class, d.dims, d.class_separation,
                              derive_seed(cfg.seed, SeedStream::kDataGeneration));
  } else {
    pool = load_csv(d.csv_path);
    if (!d.test_csv_path.empty()) {
      LabeledDataset test = load_csv(d.test_csv_path, pool.num_classes());
      if (test.dims() != pool.dims()) throw PreconditionError("test csv has different feature count");
      return {std::move(pool), std::move(test)};
    }
  }
  return train_test_split(pool, d.test_fraction, derive_seed(cfg.seed, SeedStream::kDataSplit));
}

namespace {

std::vector<std::size_t> sample_without_replacement(std::vector<std::size_t> pool,
                                                    std::size_t count, std::uint64_t seed) {
  Rng rng = make_rng(seed);
  std::shuffle(pool.begin(), pool.end(), rng);
  pool.resize(std::min(count, pool.size()));
  std::sort(pool.begin(), pool.end());
  return pool;
}

struct PoisonOutcome {
  ParamVector update;
  std::optional<double> gamma_succ;
  std::optional<double> dynamic_lambda;
};

class Simulation {
 public:
  Simulation(const ExperimentConfig& cfg, const LabeledDataset& train,
             const LabeledDataset& test, const RunOptions& options)
      : cfg_(cfg), test_(test), options_(options) {
    std::vector<std::size_t> layers{train.dims()};
    layers.insert(layers.end(), cfg.model.hidden.begin(), cfg.model.hidden.end());
    layers.push_back(std::max(train.num_classes(), test.num_classes()));
    global_.emplace(MlpModel::initialized(layers, cfg.model.activation,
                                          derive_seed(cfg.seed, SeedStream::kInit)));
    clients_ = partition(train, cfg.partition_spec(), derive_seed(cfg.seed, SeedStream::kPartition));
    adversaries_ = adversary_assignment(cfg.num_clients, cfg.malicious_fraction,
                                        derive_seed(cfg.seed, SeedStream::kAdversaries));
    is_adversary_.assign(cfg.num_clients, false);
    for (std::size_t id : adversaries_) is_adversary_[id] = true;
  }

  ExperimentResult run() {
    ExperimentResult result;
    result.rounds.reserve(cfg_.rounds);
    for (std::size_t t = 0; t < cfg_.rounds; ++t) {
      try {
        result.rounds.push_back(step(t));
      } catch (const RoundError&) {
        throw;
      } catch (const std::exception& e) {
        throw RoundError(t, e.what());
      }
      if (options_.on_round) options_.on_round(result.rounds.back());
    }
    result.final_params = global_->params();
    return result;
  }

 private:
  RoundRecord step(std::size_t t) {
    RoundRecord rec;
    rec.round = t;
    rec.fedreview = cfg_.defense == DefenseKind::kFedReview;

    std::vector<std::size_t> everyone(cfg_.num_clients);
    std::iota(everyone.begin(), everyone.end(), std::size_t{0});
    rec.selected = sample_without_replacement(everyone, cfg_.clients_per_round,
                                              derive_seed(cfg_.seed, SeedStream::kClientSelection, t));
    const std::size_t n = rec.selected.size();
    rec.malicious.resize(n);
    for (std::size_t i = 0; i < n; ++i) rec.malicious[i] = is_adversary_[rec.selected[i]];

    if (rec.fedreview) {
      std::vector<std::size_t> rest;
      std::set_difference(everyone.begin(), everyone.end(), rec.selected.begin(),
                          rec.selected.end(), std::back_inserter(rest));
      rec.reviewers = sample_without_replacement(
          std::move(rest), cfg_.reviewers(), derive_seed(cfg_.seed, SeedStream::kReviewerSelection, t));
    }

    const bool attacking = cfg_.attack.kind != AttackKind::kNone && rec.malicious_count() > 0;
    // Benign members train; with no attack active every member trains.
    std::vector<ParamVector> updates(n);
    std::vector<std::size_t> trainers;
    for (std::size_t i = 0; i < n; ++i) {
      if (!attacking || !rec.malicious[i]) trainers.push_back(i);
    }
    if (trainers.empty()) {
      // No benign reference this round: the adversary falls back to honest
      // updates computed on its own clients' data.
      trainers.resize(n);
      std::iota(trainers.begin(), trainers.end(), std::size_t{0});
    }
    parallel_for(trainers.size(), options_.threads, [&](std::size_t j) {
      const std::size_t i = trainers[j];
      const std::size_t client = rec.selected[i];
      updates[i] = train_local(*global_, clients_[client], cfg_.sgd,
                               derive_seed(cfg_.seed, SeedStream::kLocalTraining, t, client));
    });

    if (attacking) {
      std::vector<ParamVector> reference;
      for (std::size_t i : trainers) reference.push_back(updates[i]);
      PoisonOutcome poison = craft_poison(t, rec, reference);
      rec.gamma_succ = poison.gamma_succ;
      rec.dynamic_lambda = poison.dynamic_lambda;
      for (std::size_t i = 0; i < n; ++i) {
        if (rec.malicious[i]) updates[i] = poison.update;
      }
    }

    ParamVector aggregate_update;
    if (rec.fedreview) {
      std::vector<Reviewer> reviewers;
      for (std::size_t id : rec.reviewers) {
        reviewers.push_back({id, &clients_[id], is_adversary_[id],
                             derive_seed(cfg_.seed, SeedStream::kReviewSubsample, t, id)});
      }
      const ReviewOutcome outcome =
          run_review(*global_, updates, reviewers, cfg_.review, cfg_.malicious_count, options_.threads);
      rec.n_adv = outcome.n_adv;
      rec.removed = outcome.removed;
      std::vector<ParamVector> survivors;
      for (std::size_t i = 0; i < n; ++i) {
        if (!std::binary_search(rec.removed.begin(), rec.removed.end(), i)) {
          survivors.push_back(updates[i]);
        }
      }
      // Everything removed: the global model stays put this round.
      aggregate_update = survivors.empty() ? ParamVector::zeros_like(global_->params())
                                           : fedavg(survivors);
    } else {
      aggregate_update = aggregate(cfg_.aggregator(), updates);
    }

    ParamVector next = global_->params() + aggregate_update;
    require_finite(next, "global model");
    global_->set_params(std::move(next));
    rec.test_loss = dataset_loss(*global_, test_);
    rec.test_accuracy = accuracy(*global_, test_);
    return rec;
  }

  PoisonOutcome craft_poison(std::size_t t, const RoundRecord& rec,
                             const std::vector<ParamVector>& reference) {
    const auto& a = cfg_.attack;
    PoisonOutcome out;
    switch (a.kind) {
      case AttackKind::kScaling:
        out.update = scaling_attack(reference, a.lambda);
        out.dynamic_lambda = a.lambda;
        return out;
      case AttackKind::kMinMax:
      case AttackKind::kMinSum: {
        if (reference.size() < 2) {
          // A single reference update admits no distance budget.
          out.update = reference.front();
          out.gamma_succ = 0.0;
        } else {
          AttackResult r = a.kind == AttackKind::kMinMax ? min_max_attack(reference, a)
                                                         : min_sum_attack(reference, a);
          out.update = std::move(r.update);
          out.gamma_succ = r.trace.gamma_succ;
        }
        out.dynamic_lambda = dynamic_lambda(*out.gamma_succ, mean_of(reference));
        return out;
      }
      case AttackKind::kAmp: {
        std::vector<LabeledDataset> surrogates;
        for (std::size_t id : pick_surrogates(t, rec)) surrogates.push_back(clients_[id]);
        AttackResult r = amp_attack(reference, surrogates, *global_, a, cfg_.review,
                                    derive_seed(cfg_.seed, SeedStream::kSurrogateSelection, t, 1),
                                    options_.threads);
        out.update = std::move(r.update);
        out.gamma_succ = r.trace.gamma_succ;
        out.dynamic_lambda = dynamic_lambda(r.trace.gamma_succ, mean_of(reference));
        return out;
      }
      case AttackKind::kNone: break;
    }
    throw PreconditionError("craft_poison: no attack configured");
  }

  // Compromised clients outside S_t ∪ R_t, or any compromised client if none are free.
  std::vector<std::size_t> pick_surrogates(std::size_t t, const RoundRecord& rec) const {
    std::vector<std::size_t> busy = rec.selected;
    busy.insert(busy.end(), rec.reviewers.begin(), rec.reviewers.end());
    std::sort(busy.begin(), busy.end());
    std::vector<std::size_t> free;
    std::set_difference(adversaries_.begin(), adversaries_.end(), busy.begin(), busy.end(),
                        std::back_inserter(free));
    if (free.empty()) free = adversaries_;
    return sample_without_replacement(std::move(free), cfg_.attack.amp_surrogates,
                                      derive_seed(cfg_.seed, SeedStream::kSurrogateSelection, t));
  }

  const ExperimentConfig& cfg_;
  const LabeledDataset& test_;
  const RunOptions& options_;
  std::optional<MlpModel> global_;
  std::vector<LabeledDataset> clients_;
  std::vector<std::size_t> adversaries_;
  std::vector<bool> is_adversary_;
};

}  // namespace

ExperimentResult run_experiment(const ExperimentConfig& cfg, const LabeledDataset& train,
                                const LabeledDataset& test, const RunOptions& options) {
  cfg.validate();
  if (test.empty()) throw PreconditionError("run_experiment: empty test set");
  if (test.dims() != train.dims()) throw ShapeError("run_experiment: train/test feature mismatch");
  Simulation sim(cfg, train, test, options);
  return sim.run();
}

DetectionMetrics detection_metrics(std::span<const RoundRecord> records) {
  DetectionMetrics m;
  bool any_fedreview = false;
  for (const auto& r : records) {
    if (!r.fedreview) continue;
    any_fedreview = true;
    const std::size_t bad = r.malicious_count();
    if (r.removed.empty() && bad == 0) continue;
    m.true_positives += r.true_positives();
    m.removed += r.removed.size();
    m.malicious += bad;
  }
  if (!any_fedreview) throw PreconditionError("detection_metrics: run has no fedreview rounds");
  m.precision_undefined = m.removed == 0;
  m.recall_undefined = m.malicious == 0;
  m.precision = m.precision_undefined ? 1.0 : static_cast<double>(m.true_positives) / static_cast<double>(m.removed);
  m.recall = m.recall_undefined ? 1.0 : static_cast<double>(m.true_positives) / static_cast<double>(m.malicious);
  return m;
}

}  // namespace fedsim
