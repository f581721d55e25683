#include "fedsim/aggregation.hpp"

#include <algorithm>
#include <numeric>
#include <string>

#include "fedsim/error.hpp"

namespace fedsim {

AggregationRule parse_aggregation_rule(std::string_view name) {
  if (name == "fedavg") return AggregationRule::kFedAvg;
  if (name == "multi_krum") return AggregationRule::kMultiKrum;
  if (name == "trimmed_mean") return AggregationRule::kTrimmedMean;
  if (name == "median") return AggregationRule::kMedian;
  throw PreconditionError("unknown aggregation rule '" + std::string(name) + "'");
}

std::string_view to_string(AggregationRule r) {
  switch (r) {
    case AggregationRule::kFedAvg: return "fedavg";
    case AggregationRule::kMultiKrum: return "multi_krum";
    case AggregationRule::kTrimmedMean: return "trimmed_mean";
    case AggregationRule::kMedian: return "median";
  }
  return "?";
}

void AggregatorConfig::validate(std::size_t n) const {
  if (n == 0) throw PreconditionError("aggregator: no updates");
  if (rule == AggregationRule::kMultiKrum && n < 2 * m_adversaries + 3) {
    throw PreconditionError("multi_krum: need n - 2m - 2 >= 1 (n=" + std::to_string(n) +
                            ", m=" + std::to_string(m_adversaries) + ")");
  }
  if (rule == AggregationRule::kTrimmedMean && n < 2 * beta + 1) {
    throw PreconditionError("trimmed_mean: need n - 2*beta >= 1 (n=" + std::to_string(n) +
                            ", beta=" + std::to_string(beta) + ")");
  }
}

ParamVector fedavg(std::span<const ParamVector> updates) {
  return require_finite(mean_of(updates), "fedavg");
}

std::vector<std::size_t> multi_krum_select(std::span<const ParamVector> updates,
                                           std::size_t m) {
  require_uniform(updates, "multi_krum");
  const std::size_t n = updates.size();
  AggregatorConfig{AggregationRule::kMultiKrum, m, 0}.validate(n);

  std::vector<double> dist(n * n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      dist[i * n + j] = dist[j * n + i] = squared_distance(updates[i], updates[j]);
    }
  }

  const std::size_t neighbours = n - m - 2;
  const std::size_t rounds = n - 2 * m - 2;
  std::vector<std::size_t> remaining(n);
  std::iota(remaining.begin(), remaining.end(), std::size_t{0});
  std::vector<std::size_t> selected;
  std::vector<double> row;
  for (std::size_t r = 0; r < rounds; ++r) {
    const std::size_t k = std::min(neighbours, remaining.size() - 1);
    std::size_t best = remaining.front();
    double best_score = 0.0;
    bool first = true;
    for (std::size_t i : remaining) {
      row.clear();
      for (std::size_t j : remaining) {
        if (j != i) row.push_back(dist[i * n + j]);
      }
      std::partial_sort(row.begin(), row.begin() + static_cast<std::ptrdiff_t>(k), row.end());
      const double score = std::accumulate(row.begin(), row.begin() + static_cast<std::ptrdiff_t>(k), 0.0);
      // `remaining` stays sorted, so strict comparison keeps the lower index on ties.
      if (first || score < best_score) {
        best = i;
        best_score = score;
        first = false;
      }
    }
    selected.push_back(best);
    remaining.erase(std::find(remaining.begin(), remaining.end(), best));
  }
  return selected;
}

ParamVector multi_krum(std::span<const ParamVector> updates, std::size_t m) {
  std::vector<ParamVector> chosen;
  for (std::size_t i : multi_krum_select(updates, m)) chosen.push_back(updates[i]);
  return require_finite(mean_of(chosen), "multi_krum");
}

namespace {

template <typename Reduce>
ParamVector coordinatewise(std::span<const ParamVector> updates, Reduce reduce) {
  ParamVector out = ParamVector::zeros_like(updates.front());
  std::vector<double> column(updates.size());
  for (std::size_t d = 0; d < out.size(); ++d) {
    for (std::size_t i = 0; i < updates.size(); ++i) column[i] = updates[i][d];
    std::sort(column.begin(), column.end());
    out[d] = reduce(column);
  }
  return out;
}

}  // namespace

ParamVector trimmed_mean(std::span<const ParamVector> updates, std::size_t beta) {
  require_uniform(updates, "trimmed_mean");
  AggregatorConfig{AggregationRule::kTrimmedMean, 0, beta}.validate(updates.size());
  const std::size_t keep = updates.size() - 2 * beta;
  return require_finite(coordinatewise(updates,
                                       [&](const std::vector<double>& sorted) {
                                         double s = 0.0;
                                         for (std::size_t i = beta; i < beta + keep; ++i) s += sorted[i];
                                         return s / static_cast<double>(keep);
                                       }),
                        "trimmed_mean");
}

ParamVector median_agg(std::span<const ParamVector> updates) {
  require_uniform(updates, "median");
  const std::size_t n = updates.size();
  return require_finite(coordinatewise(updates,
                                       [n](const std::vector<double>& sorted) {
                                         return n % 2 == 1 ? sorted[n / 2]
                                                           : 0.5 * (sorted[n / 2 - 1] + sorted[n / 2]);
                                       }),
                        "median");
}

ParamVector aggregate(const AggregatorConfig& cfg, std::span<const ParamVector> updates) {
  switch (cfg.rule) {
    case AggregationRule::kFedAvg: return fedavg(updates);
    case AggregationRule::kMultiKrum: return multi_krum(updates, cfg.m_adversaries);
    case AggregationRule::kTrimmedMean: return trimmed_mean(updates, cfg.beta);
    case AggregationRule::kMedian: return median_agg(updates);
  }
  throw PreconditionError("aggregate: unknown rule");
}

}  // namespace fedsim
