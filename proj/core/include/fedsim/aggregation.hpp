#pragma once

#include <cstddef>
#include <span>
#include <string_view>
#include <vector>

#include "fedsim/param_vector.hpp"

namespace fedsim {

enum class AggregationRule { kFedAvg, kMultiKrum, kTrimmedMean, kMedian };

AggregationRule parse_aggregation_rule(std::string_view name);
std::string_view to_string(AggregationRule r);

struct AggregatorConfig {
  AggregationRule rule = AggregationRule::kFedAvg;
  std::size_t m_adversaries = 0;  // multi_krum
  std::size_t beta = 0;           // trimmed_mean

  /// Throws PreconditionError if the rule cannot run on `round_size` updates.
  void validate(std::size_t round_size) const;
};

ParamVector fedavg(std::span<const ParamVector> updates);

/// Indices (in selection order) chosen by Multi-Krum. Scores use squared
/// Euclidean distances to the `n - m - 2` nearest remaining candidates, capped
/// at remaining - 1, recomputed after each removal. Ties go to the lower index.
std::vector<std::size_t> multi_krum_select(std::span<const ParamVector> updates,
                                           std::size_t m_adversaries);
ParamVector multi_krum(std::span<const ParamVector> updates, std::size_t m_adversaries);

/// Per coordinate: drop the `beta` largest and `beta` smallest, average the rest.
ParamVector trimmed_mean(std::span<const ParamVector> updates, std::size_t beta);

/// Per coordinate median; mean of the two middle values for even counts.
ParamVector median_agg(std::span<const ParamVector> updates);

ParamVector aggregate(const AggregatorConfig& cfg, std::span<const ParamVector> updates);

}  // namespace fedsim
