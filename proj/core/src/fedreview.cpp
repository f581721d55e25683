#include "fedsim/fedreview.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "fedsim/data.hpp"
#include "fedsim/error.hpp"
#include "fedsim/parallel.hpp"

namespace fedsim {

void ReviewConfig::validate() const {
  if (!(k > 0.0)) throw PreconditionError("review: k must be positive");
  if (subsample_size && *subsample_size == 0) {
    throw PreconditionError("review: subsample_size must be positive");
  }
}

std::size_t ReviewConfig::effective_subsample_size(std::size_t data_size) const {
  return subsample_size.value_or(std::min<std::size_t>(data_size, 256));
}

MaliciousCount parse_malicious_count(std::string_view name) {
  if (name == "honest") return MaliciousCount::kHonest;
  if (name == "zero") return MaliciousCount::kZero;
  if (name == "inflate") return MaliciousCount::kInflate;
  throw PreconditionError("unknown malicious count mode '" + std::string(name) + "'");
}

std::string_view to_string(MaliciousCount m) {
  switch (m) {
    case MaliciousCount::kHonest: return "honest";
    case MaliciousCount::kZero: return "zero";
    case MaliciousCount::kInflate: return "inflate";
  }
  return "?";
}

std::vector<double> review_losses(const MlpModel& global,
                                  std::span<const ParamVector> updates,
                                  const LabeledDataset& reviewer_data,
                                  const ReviewConfig& cfg, std::uint64_t seed) {
  if (reviewer_data.empty()) throw PreconditionError("review_losses: empty reviewer dataset");
  cfg.validate();
  std::optional<LabeledDataset> resampled;
  if (cfg.noniid_mode) {
    resampled = balanced_subsample(
        reviewer_data, cfg.effective_subsample_size(reviewer_data.size()), seed);
  }
  const LabeledDataset& eval = resampled ? *resampled : reviewer_data;

  std::vector<double> losses;
  losses.reserve(updates.size());
  for (const auto& u : updates) {
    losses.push_back(dataset_loss(global.with_params(global.params() + u), eval));
  }
  return losses;
}

namespace {

double median_of(std::vector<double> v) {
  const std::size_t n = v.size();
  std::sort(v.begin(), v.end());
  return n % 2 == 1 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

}  // namespace

std::size_t estimate_n_adv(std::span<const double> losses, double k) {
  if (losses.empty()) throw PreconditionError("estimate_n_adv: no losses");
  const double mu = median_of({losses.begin(), losses.end()});
  std::vector<double> sq(losses.size());
  std::transform(losses.begin(), losses.end(), sq.begin(),
                 [mu](double l) { return (l - mu) * (l - mu); });
  const double sigma = std::sqrt(median_of(std::move(sq)));
  const double threshold = mu + k * sigma;
  return static_cast<std::size_t>(
      std::count_if(losses.begin(), losses.end(), [threshold](double l) { return l > threshold; }));
}

std::vector<std::size_t> rank_updates(std::span<const double> losses) {
  if (losses.empty()) throw PreconditionError("rank_updates: no losses");
  std::vector<std::size_t> order(losses.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return losses[a] > losses[b]; });
  std::vector<std::size_t> ranking(losses.size());
  for (std::size_t r = 0; r < order.size(); ++r) ranking[order[r]] = r;
  return ranking;
}

std::vector<std::size_t> invert_ranking(std::span<const std::size_t> ranking) {
  const std::size_t n = ranking.size();
  std::vector<std::size_t> inverse(n, n);
  for (std::size_t c = 0; c < n; ++c) {
    if (ranking[c] >= n || inverse[ranking[c]] != n) {
      throw PreconditionError("ranking is not a permutation");
    }
    inverse[ranking[c]] = c;
  }
  return inverse;
}

ReviewReport honest_report(std::size_t reviewer_id, std::span<const double> losses, double k) {
  return {reviewer_id, estimate_n_adv(losses, k), rank_updates(losses)};
}

ReviewReport malicious_report(std::size_t reviewer_id, std::span<const double> losses,
                              double k, MaliciousCount count_mode) {
  ReviewReport report = honest_report(reviewer_id, losses, k);
  const std::size_t n = report.ranking.size();
  for (auto& r : report.ranking) r = n - 1 - r;
  switch (count_mode) {
    case MaliciousCount::kHonest: break;
    case MaliciousCount::kZero: report.n_adv = 0; break;
    case MaliciousCount::kInflate: report.n_adv = n; break;
  }
  return report;
}

std::size_t aggregate_counts(std::span<const ReviewReport> reports) {
  if (reports.empty()) throw PreconditionError("aggregate_counts: no reports");
  std::vector<std::size_t> counts;
  counts.reserve(reports.size());
  for (const auto& r : reports) counts.push_back(r.n_adv);
  const std::size_t mid = (counts.size() - 1) / 2;
  std::nth_element(counts.begin(), counts.begin() + static_cast<std::ptrdiff_t>(mid), counts.end());
  return counts[mid];
}

std::vector<std::size_t> majority_vote(std::span<const ReviewReport> reports,
                                       std::size_t n_adv, std::size_t round_size) {
  if (n_adv > round_size) throw PreconditionError("majority_vote: n_adv exceeds round size");
  std::vector<std::size_t> votes(round_size, 0);
  for (const auto& report : reports) {
    if (report.ranking.size() != round_size) {
      throw ReportRejectedError(report.reviewer_id, "ranking has wrong length");
    }
    std::vector<std::size_t> omega;
    try {
      omega = invert_ranking(report.ranking);
    } catch (const PreconditionError&) {
      throw ReportRejectedError(report.reviewer_id, "ranking is not a permutation");
    }
    for (std::size_t i = 0; i < n_adv; ++i) ++votes[omega[i]];
  }
  if (n_adv == 0) return {};
  std::vector<std::size_t> order(round_size);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return votes[a] > votes[b]; });
  order.resize(n_adv);
  std::sort(order.begin(), order.end());
  return order;
}

double dominance_probability(std::size_t n, double p) {
  if (n == 0) throw PreconditionError("dominance_probability: n must be >= 1");
  if (!(p >= 0.0 && p <= 1.0)) throw PreconditionError("dominance_probability: p outside [0, 1]");
  double total = 0.0;
  double binom = 1.0;  // C(n, i)
  for (std::size_t i = 0; i <= n / 2; ++i) {
    total += binom * std::pow(p, static_cast<double>(i)) *
             std::pow(1.0 - p, static_cast<double>(n - i));
    binom = binom * static_cast<double>(n - i) / static_cast<double>(i + 1);
  }
  return std::min(total, 1.0);
}

ReviewOutcome run_review(const MlpModel& global, std::span<const ParamVector> updates,
                         std::span<const Reviewer> reviewers, const ReviewConfig& cfg,
                         MaliciousCount malicious_count, std::size_t threads) {
  if (reviewers.empty()) throw PreconditionError("run_review: no reviewers");
  require_uniform(updates, "run_review");
  ReviewOutcome out;
  out.reports.resize(reviewers.size());
  parallel_for(reviewers.size(), threads, [&](std::size_t i) {
    const Reviewer& r = reviewers[i];
    const auto losses = review_losses(global, updates, *r.data, cfg, r.seed);
    out.reports[i] = r.malicious ? malicious_report(r.id, losses, cfg.k, malicious_count)
                                 : honest_report(r.id, losses, cfg.k);
  });
  out.n_adv = aggregate_counts(out.reports);
  out.removed = majority_vote(out.reports, out.n_adv, updates.size());
  return out;
}

}  // namespace fedsim
