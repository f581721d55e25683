#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "fedsim/config.hpp"
#include "fedsim/error.hpp"
#include "fedsim/report.hpp"
#include "test_util.hpp"

namespace fedsim {
namespace {

namespace fs = std::filesystem;

fs::path scratch_dir(const std::string& name) {
  fs::path p = fs::temp_directory_path() / ("fedsim_test_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::size_t count_lines(const std::string& s) {
  return static_cast<std::size_t>(std::count(s.begin(), s.end(), '\n'));
}

std::size_t error_line(const std::string& text) {
  try {
    (void)parse_config(text);
  } catch (const ConfigError& e) {
    return e.line();
  }
  return 0;
}

TEST(Config, ParsesKeysCommentsAndBlankLines) {
  auto cfg = parse_config(
      "# experiment\n"
      "experiment.rounds = 7   # trailing comment\n"
      "\n"
      "attack.kind = min_sum\n"
      "attack.lambda = 2.5\n"
      "model.hidden = 16,8\n"
      "defense.rule = multi_krum\n"
      "review.noniid_mode = true\n"
      "partition.scheme = dirichlet\n"
      "partition.alpha = 0.5\n");
  EXPECT_EQ(cfg.rounds, 7u);
  EXPECT_EQ(cfg.attack.kind, AttackKind::kMinSum);
  EXPECT_DOUBLE_EQ(cfg.attack.lambda, 2.5);
  EXPECT_EQ(cfg.model.hidden, (std::vector<std::size_t>{16, 8}));
  EXPECT_EQ(cfg.defense, DefenseKind::kMultiKrum);
  EXPECT_TRUE(cfg.review.noniid_mode);
  EXPECT_EQ(cfg.partition_scheme, PartitionScheme::kDirichlet);
  EXPECT_DOUBLE_EQ(*cfg.partition_alpha, 0.5);
}

TEST(Config, EmptyTextGivesDefaults) {
  auto cfg = parse_config("");
  EXPECT_EQ(cfg.rounds, 100u);
  EXPECT_EQ(cfg.clients_per_round, 10u);
  EXPECT_EQ(cfg.reviewers(), 10u);
  EXPECT_DOUBLE_EQ(cfg.malicious_fraction, 0.2);
  EXPECT_EQ(cfg.sgd.local_epochs, 5u);
  EXPECT_EQ(cfg.sgd.batch_size, 32u);
  EXPECT_DOUBLE_EQ(cfg.sgd.learning_rate, 0.01);
  EXPECT_DOUBLE_EQ(cfg.sgd.momentum, 0.9);
  EXPECT_DOUBLE_EQ(cfg.review.k, 1.0);
}

TEST(Config, ErrorsCarryLineNumbers) {
  EXPECT_EQ(error_line("experiment.rounds = 3\nattack.lambda = five\n"), 2u);
  EXPECT_EQ(error_line("\n\nno.such.key = 1\n"), 3u);
  EXPECT_EQ(error_line("experiment.rounds = 3\nexperiment.rounds = 4\n"), 2u);
  EXPECT_EQ(error_line("just words\n"), 1u);
  EXPECT_EQ(error_line("attack.kind = laser\n"), 1u);
  EXPECT_EQ(error_line("experiment.rounds = -3\n"), 1u);
  EXPECT_EQ(error_line("review.noniid_mode = maybe\n"), 1u);
}

TEST(Config, UnknownKeyIsNamed) {
  try {
    (void)parse_config("attack.lamda = 5\n");
    FAIL();
  } catch (const ConfigError& e) {
    EXPECT_EQ(e.field(), "attack.lamda");
    EXPECT_NE(std::string(e.what()).find("unknown"), std::string::npos);
  }
}

TEST(Config, ConstraintViolationNamesTheConstraint) {
  try {
    (void)parse_config("experiment.num_clients = 15\nexperiment.clients_per_round = 10\n");
    FAIL();
  } catch (const ConfigError& e) {
    EXPECT_EQ(e.field(), "experiment.reviewers_per_round");
    EXPECT_NE(std::string(e.what()).find("clients_per_round + reviewers_per_round"),
              std::string::npos);
  }
  EXPECT_THROW((void)parse_config("partition.scheme = label_shard\n"), ConfigError);
}

TEST(Config, SerializeRoundTrips) {
  auto cfg = testing::tiny_config();
  cfg.attack.tau = 1.0 / 3.0;
  cfg.labels_per_client = 2;
  cfg.partition_scheme = PartitionScheme::kLabelShard;
  cfg.review.subsample_size = 77;
  cfg.malicious_count = MaliciousCount::kInflate;
  const std::string text = serialize_config(cfg);
  auto back = parse_config(text);
  EXPECT_EQ(serialize_config(back), text);
  EXPECT_EQ(config_hash(back), config_hash(cfg));
  EXPECT_DOUBLE_EQ(back.attack.tau, 1.0 / 3.0);
  for (const auto& key : known_keys()) EXPECT_TRUE(is_known_key(key));
}

TEST(Config, HashTracksContent) {
  auto a = testing::tiny_config();
  auto b = a;
  EXPECT_EQ(config_hash(a), config_hash(b));
  b.attack.lambda = 4.0;
  EXPECT_NE(config_hash(a), config_hash(b));
  EXPECT_EQ(config_hash(a).size(), 16u);
}

TEST(Report, CsvHeaderIsStable) {
  const std::string golden = slurp(fs::path(FEDSIM_SOURCE_DIR) / "tests" / "golden" / "rounds_header.csv");
  EXPECT_EQ(std::string(kRoundCsvHeader) + "\n", golden);
}

TEST(Report, RowFormatting) {
  RoundRecord r;
  r.round = 3;
  r.test_loss = 0.123456789;
  r.test_accuracy = 0.87254;
  r.fedreview = true;
  r.removed = {1, 4};
  r.n_adv = 2;
  r.gamma_succ = 12.3456789;
  r.dynamic_lambda = -0.5;
  EXPECT_EQ(format_round_row(r), "3,0.123457,87.25,2,2,0,12.3457,-0.5");

  RoundRecord plain;
  plain.round = 0;
  plain.test_loss = 2.0;
  plain.test_accuracy = 0.1;
  EXPECT_EQ(format_round_row(plain), "0,2,10.00,0,,,,");

  RoundRecord empty_review = plain;
  empty_review.fedreview = true;
  empty_review.n_adv = 0;
  EXPECT_EQ(format_round_row(empty_review), "0,2,10.00,0,0,1,,");
}

TEST(Report, Table1Cells) {
  const std::string t = cmd_table1();
  EXPECT_NE(t.find("99.36%"), std::string::npos);
  EXPECT_NE(t.find("98.29%"), std::string::npos);
  EXPECT_NE(t.find("95.27%"), std::string::npos);
  EXPECT_NE(t.find("83.38%"), std::string::npos);
  EXPECT_NE(t.find("99.94%"), std::string::npos);
  EXPECT_NE(t.find("87.25%"), std::string::npos);
}

TEST(CmdRun, WritesOneRowPerRoundAndIsReproducible) {
  auto cfg = testing::tiny_config();
  auto dir = scratch_dir("cmd_run");
  auto s = cmd_run(cfg, dir / "a", 1);
  const std::string csv = slurp(s.csv_path);
  EXPECT_EQ(count_lines(csv), cfg.rounds + 1);
  EXPECT_EQ(csv.substr(0, kRoundCsvHeader.size()), kRoundCsvHeader);
  EXPECT_TRUE(fs::exists(dir / "a" / "summary.json"));
  ASSERT_TRUE(s.detection.has_value());
  auto again = cmd_run(cfg, dir / "b", 2);
  EXPECT_EQ(slurp(again.csv_path), csv);
  EXPECT_EQ(again.config_hash, s.config_hash);
  fs::remove_all(dir);
}

TEST(CmdSweep, OneRunPerValue) {
  auto cfg = testing::tiny_config();
  cfg.rounds = 2;
  auto dir = scratch_dir("cmd_sweep");
  std::vector<std::string> values{"3", "4", "5"};
  auto sums = cmd_sweep(cfg, "attack.lambda", values, dir, 2);
  ASSERT_EQ(sums.size(), 3u);
  EXPECT_NE(sums[0].config_hash, sums[1].config_hash);
  EXPECT_EQ(count_lines(slurp(dir / "sweep.csv")), 4u);
  for (const auto& s : sums) EXPECT_TRUE(fs::exists(s.csv_path));
  fs::remove_all(dir);
}

TEST(CmdSweep, RejectsBadInput) {
  auto cfg = testing::tiny_config();
  auto dir = scratch_dir("cmd_sweep_bad");
  std::vector<std::string> none;
  std::vector<std::string> one{"1"};
  std::vector<std::string> junk{"abc"};
  EXPECT_THROW(cmd_sweep(cfg, "attack.lambda", none, dir, 1), ConfigError);
  EXPECT_THROW(cmd_sweep(cfg, "attack.nope", one, dir, 1), ConfigError);
  EXPECT_THROW(cmd_sweep(cfg, "attack.lambda", junk, dir, 1), ConfigError);
  fs::remove_all(dir);
}

}  // namespace
}  // namespace fedsim
