#include "fedsim/report.hpp"

#include <chrono>
#include <fstream>
#include <ostream>

#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include "fedsim/config.hpp"
#include "fedsim/error.hpp"
#include "fedsim/fedreview.hpp"
#include "fedsim/parallel.hpp"

namespace fedsim {

std::string format_percent(double fraction) { return fmt::format("{:.2f}", 100.0 * fraction); }

std::string format_sig6(double v) { return fmt::format("{:.6g}", v); }

std::string format_round_row(const RoundRecord& r) {
  std::string n_adv;
  std::string flag;
  if (r.fedreview) {
    n_adv = r.n_adv ? std::to_string(*r.n_adv) : "";
    flag = r.removed.empty() ? "1" : "0";
  }
  return fmt::format("{},{},{},{},{},{},{},{}", r.round, format_sig6(r.test_loss),
                     format_percent(r.test_accuracy), r.removed.size(), n_adv, flag,
                     r.gamma_succ ? format_sig6(*r.gamma_succ) : "",
                     r.dynamic_lambda ? format_sig6(*r.dynamic_lambda) : "");
}

void write_rounds_csv(std::ostream& out, std::span<const RoundRecord> rounds) {
  out << kRoundCsvHeader << '\n';
  for (const auto& r : rounds) out << format_round_row(r) << '\n';
}

std::string summary_json(const RunSummary& s, const ExperimentConfig& cfg) {
  nlohmann::ordered_json j;
  j["config_hash"] = s.config_hash;
  j["defense"] = std::string(to_string(cfg.defense));
  j["attack"] = std::string(to_string(cfg.attack.kind));
  j["rounds"] = cfg.rounds;
  j["final_accuracy"] = s.final_accuracy;
  j["final_accuracy_percent"] = format_percent(s.final_accuracy);
  if (s.detection) {
    j["precision"] = s.detection->precision;
    j["recall"] = s.detection->recall;
    j["precision_undefined"] = s.detection->precision_undefined;
    j["recall_undefined"] = s.detection->recall_undefined;
  }
  j["rounds_csv"] = s.csv_path.string();
  j["wall_seconds"] = s.wall_seconds;
  return j.dump(2) + "\n";
}

RunSummary cmd_run(const ExperimentConfig& cfg, const std::filesystem::path& out_dir,
                   std::size_t threads) {
  cfg.validate();
  const auto start = std::chrono::steady_clock::now();
  const auto [train, test] = prepare_data(cfg);
  RunOptions options;
  options.threads = threads;
  const ExperimentResult result = run_experiment(cfg, train, test, options);

  RunSummary s;
  s.final_accuracy = result.rounds.back().test_accuracy;
  if (cfg.defense == DefenseKind::kFedReview) s.detection = detection_metrics(result.rounds);
  s.config_hash = config_hash(cfg);

  std::filesystem::create_directories(out_dir);
  s.csv_path = out_dir / "rounds.csv";
  {
    std::ofstream csv(s.csv_path, std::ios::binary);
    if (!csv) throw Error("cannot write '" + s.csv_path.string() + "'");
    write_rounds_csv(csv, result.rounds);
  }
  s.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  std::ofstream(out_dir / "summary.json", std::ios::binary) << summary_json(s, cfg);
  return s;
}

std::string cmd_table1() {
  std::string out = fmt::format("{:<24}{:>10}{:>10}{:>10}\n", "CBD(floor(n/2))", "20%", "30%", "40%");
  for (std::size_t n : {10u, 20u}) {
    out += fmt::format("{:<24}", fmt::format("n={}", n));
    for (double p : {0.2, 0.3, 0.4}) {
      out += fmt::format("{:>10}", format_percent(dominance_probability(n, p)) + "%");
    }
    out += "\n";
  }
  return out;
}

namespace {

std::string dir_name(std::size_t index, std::string_view value) {
  std::string safe;
  for (char ch : value) {
    const bool ok = std::isalnum(static_cast<unsigned char>(ch)) || ch == '.' || ch == '-' || ch == '_';
    safe += ok ? ch : '_';
  }
  return fmt::format("run_{:03}_{}", index, safe);
}

std::string csv_field(std::string_view s) {
  if (s.find_first_of(",\"\n") == std::string_view::npos) return std::string(s);
  std::string out = "\"";
  for (char ch : s) out += ch == '"' ? std::string("\"\"") : std::string(1, ch);
  return out + "\"";
}

}  // namespace

std::vector<RunSummary> cmd_sweep(const ExperimentConfig& base, std::string_view param,
                                  std::span<const std::string> values,
                                  const std::filesystem::path& out_dir, std::size_t threads) {
  if (!is_known_key(param)) throw ConfigError(std::string(param), "unknown sweep key");
  if (values.empty()) throw ConfigError(std::string(param), "sweep needs at least one value");
  std::vector<ExperimentConfig> configs;
  for (const auto& v : values) {
    ExperimentConfig cfg = base;
    apply_setting(cfg, param, v);
    cfg.validate();
    configs.push_back(std::move(cfg));
  }

  // Runs execute side by side; each experiment itself stays single-threaded.
  std::vector<RunSummary> summaries(configs.size());
  parallel_for(configs.size(), threads, [&](std::size_t i) {
    summaries[i] = cmd_run(configs[i], out_dir / dir_name(i, values[i]), 1);
  });

  std::ofstream combined(out_dir / "sweep.csv", std::ios::binary);
  combined << "param,value,final_accuracy,precision,recall,config_hash,rounds_csv\n";
  for (std::size_t i = 0; i < summaries.size(); ++i) {
    const auto& s = summaries[i];
    combined << fmt::format("{},{},{},{},{},{},{}\n", param, csv_field(values[i]),
                            format_percent(s.final_accuracy),
                            s.detection ? format_percent(s.detection->precision) : "",
                            s.detection ? format_percent(s.detection->recall) : "",
                            s.config_hash, csv_field(s.csv_path.string()));
  }
  return summaries;
}

}  // namespace fedsim
