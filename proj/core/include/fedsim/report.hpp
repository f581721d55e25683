#pragma once

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "fedsim/orchestrator.hpp"

namespace fedsim {

/// Column order of the per-round CSV. Changing it is a format break.
inline constexpr std::string_view kRoundCsvHeader =
    "round,test_loss,test_accuracy,n_removed,n_adv_estimate,precision_flag,gamma_succ,"
    "dynamic_lambda";

/// `fraction` as a percentage with two decimals ("87.25").
std::string format_percent(double fraction);
/// Six significant digits, C `%g` style.
std::string format_sig6(double v);

/// One CSV data row (no trailing newline). Fields that do not apply to the
/// round are left empty; precision_flag is 1 when a review round removed
/// nothing (precision has a zero denominator) and 0 otherwise.
std::string format_round_row(const RoundRecord& r);
void write_rounds_csv(std::ostream& out, std::span<const RoundRecord> rounds);

struct RunSummary {
  double final_accuracy = 0.0;
  std::optional<DetectionMetrics> detection;
  std::filesystem::path csv_path;
  std::string config_hash;
  double wall_seconds = 0.0;
};

std::string summary_json(const RunSummary& s, const ExperimentConfig& cfg);

/// Runs one experiment, writes `rounds.csv` and `summary.json` into `out_dir`.
RunSummary cmd_run(const ExperimentConfig& cfg, const std::filesystem::path& out_dir,
                   std::size_t threads);

/// Dominance probabilities for n in {10, 20} and adversary share 20/30/40 %.
std::string cmd_table1();

/// One run per value with everything else (seeds included) held fixed. Each
/// run writes into its own subdirectory; `sweep.csv` combines the summaries.
/// Throws ConfigError for an unknown key, an empty value list or a value that
/// does not parse.
std::vector<RunSummary> cmd_sweep(const ExperimentConfig& base, std::string_view param,
                                  std::span<const std::string> values,
                                  const std::filesystem::path& out_dir, std::size_t threads);

}  // namespace fedsim
