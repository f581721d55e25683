// End-to-end acceptance checks. Prints one PASS/FAIL line per criterion and
// exits nonzero if any criterion fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <numeric>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <fmt/format.h>

#include "fedsim/aggregation.hpp"
#include "fedsim/attacks.hpp"
#include "fedsim/fedreview.hpp"
#include "fedsim/orchestrator.hpp"
#include "fedsim/parallel.hpp"
#include "fedsim/report.hpp"
#include "oracles.hpp"
#include "test_util.hpp"

namespace {

using namespace fedsim;

struct Outcome {
  bool pass = true;
  std::string detail;
};

struct Criterion {
  int id;
  const char* name;
  double time_limit_s;  // <= 0: no limit
  std::function<Outcome()> check;
};

// Runs shared by criteria 7, 8, 9 and 11.
struct Scenario {
  ExperimentConfig cfg;
  std::vector<RoundRecord> rounds;
  double final_accuracy() const { return rounds.back().test_accuracy; }
};

ExperimentConfig task_config() {
  ExperimentConfig cfg;  // 100 clients, 10 per round, 5 local epochs
  cfg.rounds = 60;
  cfg.malicious_fraction = 0.2;
  cfg.attack.kind = AttackKind::kScaling;
  cfg.attack.lambda = 5.0;
  return cfg;
}

Scenario run_scenario(ExperimentConfig cfg) {
  auto [train, test] = prepare_data(cfg);
  RunOptions opt;
  opt.threads = default_threads();
  return {cfg, run_experiment(cfg, train, test, opt).rounds};
}

ExperimentConfig benign(ExperimentConfig cfg) {
  cfg.attack.kind = AttackKind::kNone;
  cfg.defense = DefenseKind::kFedAvg;
  return cfg;
}

ExperimentConfig with_defense(ExperimentConfig cfg, DefenseKind d) {
  cfg.defense = d;
  return cfg;
}

std::string pct(double f) { return format_percent(f) + "%"; }

Outcome table_values() {
  struct Cell {
    std::size_t n;
    double p;
    double expected;
  };
  const Cell cells[] = {{10, 0.2, 99.36}, {10, 0.3, 95.27}, {10, 0.4, 83.38},
                        {20, 0.2, 99.94}, {20, 0.3, 98.29}, {20, 0.4, 87.25}};
  Outcome o;
  double worst = 0.0;
  for (const auto& c : cells) {
    const double err = std::abs(100.0 * dominance_probability(c.n, c.p) - c.expected);
    worst = std::max(worst, err);
    o.pass = o.pass && err <= 0.005;
  }
  o.detail = fmt::format("max deviation {:.4f} pp (tol 0.005)", worst);
  return o;
}

Outcome attack_equivalence() {
  std::mt19937_64 rng(2024);
  Outcome o;
  double worst = 0.0;
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t n = std::uniform_int_distribution<std::size_t>(5, 20)(rng);
    const double log_d = std::uniform_real_distribution<double>(1.0, 4.0)(rng);
    const auto d = static_cast<std::size_t>(std::round(std::pow(10.0, log_d)));
    auto updates = testing::random_updates(n, d, rng());
    std::vector<double> drift(d);
    std::normal_distribution<double> g(0.0, 1.0);
    for (double& x : drift) x = g(rng);
    for (auto& u : updates) u += ParamVector(drift);
    const ParamVector mean = mean_of(updates);
    AttackConfig cfg;
    for (AttackKind kind : {AttackKind::kMinMax, AttackKind::kMinSum}) {
      cfg.kind = kind;
      const AttackResult r = kind == AttackKind::kMinMax ? min_max_attack(updates, cfg)
                                                         : min_sum_attack(updates, cfg);
      const double lambda = r.trace.gamma_succ / mean.norm() - 1.0;
      const ParamVector want = -lambda * mean;
      const double rel = distance(r.update, want) / want.norm();
      worst = std::max(worst, rel);
      o.pass = o.pass && rel <= 1e-9;
    }
  }
  o.detail = fmt::format("worst relative error {:.3g} over 400 attacks (tol 1e-9)", worst);
  return o;
}

Outcome neutralization() {
  Outcome o;
  double worst = 0.0;
  const ParamVector u = testing::random_updates(1, 100, 5)[0];
  for (std::size_t b = 1; b <= 16; ++b) {
    for (std::size_t m = 1; m <= 8; ++m) {
      std::vector<ParamVector> pool(b, u);
      const ParamVector poison = scaling_attack(pool, static_cast<double>(b) / static_cast<double>(m));
      for (std::size_t i = 0; i < m; ++i) pool.push_back(poison);
      const double ratio = fedavg(pool).norm() / u.norm();
      worst = std::max(worst, ratio);
      o.pass = o.pass && ratio <= 1e-12;
    }
  }
  o.detail = fmt::format("worst |mean|/|u| {:.3g} (tol 1e-12)", worst);
  return o;
}

Outcome aggregator_oracles() {
  std::mt19937_64 rng(77);
  std::size_t krum_ok = 0, coord_ok = 0;
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t n = std::uniform_int_distribution<std::size_t>(3, 12)(rng);
    const std::size_t m = std::uniform_int_distribution<std::size_t>(0, (n - 3) / 2)(rng);
    const std::size_t d = std::uniform_int_distribution<std::size_t>(1, 40)(rng);
    auto u = testing::random_updates(n, d, rng());
    for (std::size_t i = 0; i < m; ++i) u[i] *= 20.0;
    const auto sel = multi_krum_select(u, m);
    const auto want = oracle::multi_krum_select(u, m);
    std::vector<ParamVector> chosen;
    for (std::size_t i : want) chosen.push_back(u[i]);
    krum_ok += sel == want && multi_krum(u, m) == mean_of(chosen);

    const std::size_t beta = std::uniform_int_distribution<std::size_t>(0, (n - 1) / 2)(rng);
    const auto tm = trimmed_mean(u, beta);
    const auto med = median_agg(u);
    bool exact = true;
    for (std::size_t j = 0; j < d; ++j) {
      exact = exact && tm[j] == oracle::trimmed(oracle::column(u, j), beta) &&
              med[j] == oracle::median(oracle::column(u, j));
    }
    coord_ok += exact;
  }
  return {krum_ok == 100 && coord_ok == 100,
          fmt::format("multi_krum {}/100, trimmed_mean+median {}/100", krum_ok, coord_ok)};
}

Outcome count_oracle() {
  std::mt19937_64 rng(99);
  std::size_t ok = 0;
  for (int trial = 0; trial < 1000; ++trial) {
    const std::size_t n = std::uniform_int_distribution<std::size_t>(1, 30)(rng);
    std::vector<double> l(n);
    std::lognormal_distribution<double> g(0.0, 0.8);
    for (double& x : l) x = g(rng);
    switch (trial % 10) {
      case 0: l.assign(n, 0.5 + trial * 1e-3); break;  // all equal
      case 1:                                          // majority tied: sigma = 0
        std::fill(l.begin(), l.begin() + static_cast<std::ptrdiff_t>(n / 2 + 1), 1.5);
        break;
      case 2:  // a few gross outliers
        for (std::size_t i = 0; i < n / 4; ++i) l[i] = 50.0 + static_cast<double>(i);
        break;
      default: break;
    }
    const double k = std::uniform_real_distribution<double>(0.0, 3.0)(rng) + 0.01;
    ok += estimate_n_adv(l, k) == oracle::n_adv(l, k);
  }
  return {ok == 1000, fmt::format("{}/1000 agree", ok)};
}

Outcome vote_tolerance() {
  std::mt19937_64 rng(314);
  std::size_t ok = 0;
  const std::size_t n = 10;
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t bad_reviewers = std::uniform_int_distribution<std::size_t>(0, 4)(rng);
    const std::size_t n_poisoned = std::uniform_int_distribution<std::size_t>(1, 4)(rng);
    std::vector<std::size_t> ids(n);
    std::iota(ids.begin(), ids.end(), std::size_t{0});
    std::shuffle(ids.begin(), ids.end(), rng);
    std::vector<std::size_t> truth(ids.begin(), ids.begin() + static_cast<std::ptrdiff_t>(n_poisoned));
    std::sort(truth.begin(), truth.end());

    std::vector<ReviewReport> reports;
    for (std::size_t r = 0; r < 10; ++r) {
      // Each reviewer's own losses: poisoned updates clearly worse.
      std::vector<double> losses(n);
      std::uniform_real_distribution<double> benign(1.0, 1.3), poisoned(3.0, 6.0);
      for (std::size_t c = 0; c < n; ++c) {
        losses[c] = std::binary_search(truth.begin(), truth.end(), c) ? poisoned(rng) : benign(rng);
      }
      reports.push_back(r < bad_reviewers
                            ? malicious_report(r, losses, 1.0, MaliciousCount::kHonest)
                            : honest_report(r, losses, 1.0));
    }
    ok += majority_vote(reports, n_poisoned, n) == truth;
  }
  return {ok == 100, fmt::format("{}/100 scenarios exact", ok)};
}

void print(const Criterion& c, const Outcome& o, double seconds) {
  const bool timely = c.time_limit_s <= 0.0 || seconds < c.time_limit_s;
  const bool pass = o.pass && timely;
  std::string limit = c.time_limit_s > 0.0 ? fmt::format(" / limit {:.0f}s", c.time_limit_s) : "";
  std::printf("criterion %2d %-28s %s  %s  [%.2fs%s]%s\n", c.id, c.name, pass ? "PASS" : "FAIL",
              o.detail.c_str(), seconds, limit.c_str(), timely ? "" : " too slow");
  std::fflush(stdout);
}

}  // namespace

int main() {
  using clock = std::chrono::steady_clock;
  int failures = 0;
  auto run = [&](const Criterion& c) {
    const auto start = clock::now();
    Outcome o = c.check();
    const double s = std::chrono::duration<double>(clock::now() - start).count();
    print(c, o, s);
    if (!o.pass || (c.time_limit_s > 0.0 && s >= c.time_limit_s)) ++failures;
  };

  run({1, "dominance table", 1.0, table_values});
  run({2, "attack equivalence", 30.0, attack_equivalence});
  run({3, "neutralization", 1.0, neutralization});
  run({4, "aggregator oracles", 10.0, aggregator_oracles});
  run({5, "adversary count oracle", 5.0, count_oracle});
  run({6, "majority vote tolerance", 5.0, vote_tolerance});

  const ExperimentConfig task = task_config();
  Scenario clean, attacked, reviewed;
  run({7, "end-to-end collapse", 300.0, [&] {
         clean = run_scenario(benign(task));
         attacked = run_scenario(with_defense(task, DefenseKind::kFedAvg));
         reviewed = run_scenario(with_defense(task, DefenseKind::kFedReview));
         const bool collapse = attacked.final_accuracy() <= 0.15;
         const bool defended = reviewed.final_accuracy() >= clean.final_accuracy() - 0.05;
         return Outcome{collapse && defended,
                        fmt::format("benign {} | fedavg {} (<= 15.00%) | fedreview {} (>= {})",
                                    pct(clean.final_accuracy()), pct(attacked.final_accuracy()),
                                    pct(reviewed.final_accuracy()),
                                    pct(clean.final_accuracy() - 0.05))};
       }});

  run({8, "detection quality", 0.0, [&] {
         const DetectionMetrics m = detection_metrics(reviewed.rounds);
         return Outcome{m.precision >= 0.9 && m.recall >= 0.9,
                        fmt::format("precision {:.4f} ({}/{}) recall {:.4f} ({}/{}) (both >= 0.9)",
                                    m.precision, m.true_positives, m.removed, m.recall,
                                    m.true_positives, m.malicious)};
       }});

  run({9, "breakdown at 40%", 600.0, [&] {
         ExperimentConfig heavy = with_defense(task, DefenseKind::kFedReview);
         heavy.malicious_fraction = 0.4;
         ExperimentConfig mid = with_defense(task, DefenseKind::kFedReview);
         mid.malicious_fraction = 0.3;
         mid.review.k = 0.5;
         const double heavy_acc = run_scenario(heavy).final_accuracy();
         const double mid_acc = run_scenario(mid).final_accuracy();
         const double floor = clean.final_accuracy() - 0.10;
         return Outcome{heavy_acc <= 0.20 && mid_acc >= floor,
                        fmt::format("40%/k=1 {} (<= 20.00%) | 30%/k=0.5 {} (>= {})", pct(heavy_acc),
                                    pct(mid_acc), pct(floor))};
       }});

  run({10, "label-shard repair", 600.0, [&] {
         ExperimentConfig shard = task;
         shard.partition_scheme = PartitionScheme::kLabelShard;
         shard.labels_per_client = 2;
         const double base = run_scenario(benign(shard)).final_accuracy();
         ExperimentConfig plain = with_defense(shard, DefenseKind::kFedReview);
         ExperimentConfig balanced = plain;
         balanced.review.noniid_mode = true;
         const double plain_acc = run_scenario(plain).final_accuracy();
         const double bal_acc = run_scenario(balanced).final_accuracy();
         return Outcome{bal_acc >= plain_acc && bal_acc >= base - 0.08,
                        fmt::format("balanced {} vs plain {} (>=) | benign {} (balanced >= {})",
                                    pct(bal_acc), pct(plain_acc), pct(base), pct(base - 0.08))};
       }});

  run({11, "adaptive attack containment", 0.0, [&] {
         ExperimentConfig amp = with_defense(task, DefenseKind::kFedReview);
         amp.attack.kind = AttackKind::kAmp;
         const Scenario s = run_scenario(amp);
         std::size_t attack_rounds = 0, small = 0;
         for (const auto& r : s.rounds) {
           if (!r.dynamic_lambda) continue;
           ++attack_rounds;
           small += *r.dynamic_lambda < 2.0;
         }
         const double drop = clean.final_accuracy() - s.final_accuracy();
         const double share = attack_rounds ? static_cast<double>(small) / attack_rounds : 0.0;
         return Outcome{drop <= 0.10 && attack_rounds > 0 && share >= 0.9,
                        fmt::format("accuracy {} (drop {:.2f} pp <= 10) | lambda < 2 in {}/{} "
                                    "attack rounds (>= 90%)",
                                    pct(s.final_accuracy()), 100.0 * drop, small, attack_rounds)};
       }});

  run({12, "determinism", 0.0, [&] {
         namespace fs = std::filesystem;
         const fs::path dir = fs::temp_directory_path() / "fedsim_acceptance_determinism";
         fs::remove_all(dir);
         ExperimentConfig cfg = with_defense(task, DefenseKind::kFedReview);
         auto read = [](const fs::path& p) {
           std::ifstream in(p, std::ios::binary);
           std::ostringstream ss;
           ss << in.rdbuf();
           return ss.str();
         };
         const auto a = cmd_run(cfg, dir / "first", 1);
         const auto b = cmd_run(cfg, dir / "second", default_threads());
         const bool same = read(a.csv_path) == read(b.csv_path) && !read(a.csv_path).empty();
         fs::remove_all(dir);
         return Outcome{same, same ? "rounds.csv byte-identical across reruns"
                                   : "rounds.csv differs between reruns"};
       }});

  std::printf("%s: %d criterion(s) failed\n", failures ? "FAIL" : "PASS", failures);
  return failures ? 1 : 0;
}
