#include "fedsim/config.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <optional>
#include <set>
#include <sstream>

#include <fmt/format.h>

#include "fedsim/error.hpp"

namespace fedsim {

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

struct BadValue {
  std::string what;
};

std::size_t to_size(std::string_view v) {
  std::size_t out = 0;
  auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || ptr != v.data() + v.size()) {
    throw BadValue{"expected a nonnegative integer, got '" + std::string(v) + "'"};
  }
  return out;
}

std::uint64_t to_u64(std::string_view v) {
  std::uint64_t out = 0;
  auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || ptr != v.data() + v.size()) {
    throw BadValue{"expected an unsigned integer, got '" + std::string(v) + "'"};
  }
  return out;
}

double to_double(std::string_view v) {
  if (!v.empty() && v.front() == '+') v.remove_prefix(1);
  double out = 0.0;
  auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || ptr != v.data() + v.size() || !std::isfinite(out)) {
    throw BadValue{"expected a number, got '" + std::string(v) + "'"};
  }
  return out;
}

bool to_bool(std::string_view v) {
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  throw BadValue{"expected true or false, got '" + std::string(v) + "'"};
}

std::vector<std::size_t> to_size_list(std::string_view v) {
  std::vector<std::size_t> out;
  if (v.empty() || v == "none") return out;
  std::size_t start = 0;
  while (start <= v.size()) {
    const std::size_t comma = v.find(',', start);
    out.push_back(to_size(trim(v.substr(start, comma == v.npos ? v.npos : comma - start))));
    if (comma == v.npos) break;
    start = comma + 1;
  }
  return out;
}

// Library parse_* helpers throw PreconditionError for unknown names.
template <typename Fn>
auto named(Fn fn, std::string_view v) {
  try {
    return fn(v);
  } catch (const PreconditionError& e) {
    throw BadValue{e.what()};
  }
}

std::string fmt_double(double v) { return fmt::format("{}", v); }

std::string fmt_list(const std::vector<std::size_t>& v) {
  return v.empty() ? "none" : fmt::format("{}", fmt::join(v, ","));
}

struct Key {
  std::string_view name;
  std::function<void(ExperimentConfig&, std::string_view)> set;
  // Empty optional: the key is unset and omitted from serialization.
  std::function<std::optional<std::string>(const ExperimentConfig&)> get;
};

template <typename T>
std::optional<std::string> opt_str(const std::optional<T>& v) {
  if (!v) return std::nullopt;
  if constexpr (std::is_floating_point_v<T>) {
    return fmt_double(*v);
  } else {
    return std::to_string(*v);
  }
}

const std::vector<Key>& key_table() {
  using C = ExperimentConfig;
  using V = std::string_view;
  static const std::vector<Key> keys = {
      {"experiment.seed", [](C& c, V v) { c.seed = to_u64(v); },
       [](const C& c) { return std::optional(std::to_string(c.seed)); }},
      {"experiment.rounds", [](C& c, V v) { c.rounds = to_size(v); },
       [](const C& c) { return std::optional(std::to_string(c.rounds)); }},
      {"experiment.num_clients", [](C& c, V v) { c.num_clients = to_size(v); },
       [](const C& c) { return std::optional(std::to_string(c.num_clients)); }},
      {"experiment.clients_per_round", [](C& c, V v) { c.clients_per_round = to_size(v); },
       [](const C& c) { return std::optional(std::to_string(c.clients_per_round)); }},
      {"experiment.reviewers_per_round", [](C& c, V v) { c.reviewers_per_round = to_size(v); },
       [](const C& c) { return opt_str(c.reviewers_per_round); }},
      {"experiment.malicious_fraction", [](C& c, V v) { c.malicious_fraction = to_double(v); },
       [](const C& c) { return std::optional(fmt_double(c.malicious_fraction)); }},

      {"data.source",
       [](C& c, V v) {
         if (v == "synthetic") c.data.source = DataSource::kSynthetic;
         else if (v == "csv") c.data.source = DataSource::kCsv;
         else throw BadValue{"expected synthetic or csv"};
       },
       [](const C& c) {
         return std::optional<std::string>(c.data.source == DataSource::kCsv ? "csv" : "synthetic");
       }},
      {"data.num_classes", [](C& c, V v) { c.data.num_classes = to_size(v); },
       [](const C& c) { return std::optional(std::to_string(c.data.num_classes)); }},
      {"data.samples_per_class", [](C& c, V v) { c.data.samples_per_class = to_size(v); },
       [](const C& c) { return std::optional(std::to_string(c.data.samples_per_class)); }},
      {"data.dims", [](C& c, V v) { c.data.dims = to_size(v); },
       [](const C& c) { return std::optional(std::to_string(c.data.dims)); }},
      {"data.class_separation", [](C& c, V v) { c.data.class_separation = to_double(v); },
       [](const C& c) { return std::optional(fmt_double(c.data.class_separation)); }},
      {"data.test_fraction", [](C& c, V v) { c.data.test_fraction = to_double(v); },
       [](const C& c) { return std::optional(fmt_double(c.data.test_fraction)); }},
      {"data.csv_path", [](C& c, V v) { c.data.csv_path = std::string(v); },
       [](const C& c) {
         return c.data.csv_path.empty() ? std::nullopt : std::optional(c.data.csv_path);
       }},
      {"data.test_csv_path", [](C& c, V v) { c.data.test_csv_path = std::string(v); },
       [](const C& c) {
         return c.data.test_csv_path.empty() ? std::nullopt : std::optional(c.data.test_csv_path);
       }},

      {"partition.scheme",
       [](C& c, V v) { c.partition_scheme = named(parse_partition_scheme, v); },
       [](const C& c) { return std::optional(std::string(to_string(c.partition_scheme))); }},
      {"partition.alpha", [](C& c, V v) { c.partition_alpha = to_double(v); },
       [](const C& c) { return opt_str(c.partition_alpha); }},
      {"partition.labels_per_client", [](C& c, V v) { c.labels_per_client = to_size(v); },
       [](const C& c) { return opt_str(c.labels_per_client); }},

      {"model.hidden", [](C& c, V v) { c.model.hidden = to_size_list(v); },
       [](const C& c) { return std::optional(fmt_list(c.model.hidden)); }},
      {"model.activation", [](C& c, V v) { c.model.activation = named(parse_activation, v); },
       [](const C& c) { return std::optional(std::string(to_string(c.model.activation))); }},

      {"sgd.learning_rate", [](C& c, V v) { c.sgd.learning_rate = to_double(v); },
       [](const C& c) { return std::optional(fmt_double(c.sgd.learning_rate)); }},
      {"sgd.momentum", [](C& c, V v) { c.sgd.momentum = to_double(v); },
       [](const C& c) { return std::optional(fmt_double(c.sgd.momentum)); }},
      {"sgd.batch_size", [](C& c, V v) { c.sgd.batch_size = to_size(v); },
       [](const C& c) { return std::optional(std::to_string(c.sgd.batch_size)); }},
      {"sgd.local_epochs", [](C& c, V v) { c.sgd.local_epochs = to_size(v); },
       [](const C& c) { return std::optional(std::to_string(c.sgd.local_epochs)); }},

      {"attack.kind", [](C& c, V v) { c.attack.kind = named(parse_attack_kind, v); },
       [](const C& c) { return std::optional(std::string(to_string(c.attack.kind))); }},
      {"attack.lambda", [](C& c, V v) { c.attack.lambda = to_double(v); },
       [](const C& c) { return std::optional(fmt_double(c.attack.lambda)); }},
      {"attack.gamma_init", [](C& c, V v) { c.attack.gamma_init = to_double(v); },
       [](const C& c) { return std::optional(fmt_double(c.attack.gamma_init)); }},
      {"attack.tau", [](C& c, V v) { c.attack.tau = to_double(v); },
       [](const C& c) { return std::optional(fmt_double(c.attack.tau)); }},
      {"attack.perturbation",
       [](C& c, V v) { c.attack.perturbation = named(parse_perturbation, v); },
       [](const C& c) { return std::optional(std::string(to_string(c.attack.perturbation))); }},
      {"attack.amp_surrogates", [](C& c, V v) { c.attack.amp_surrogates = to_size(v); },
       [](const C& c) { return std::optional(std::to_string(c.attack.amp_surrogates)); }},
      {"attack.amp_accept_on_detect", [](C& c, V v) { c.attack.amp_accept_on_detect = to_bool(v); },
       [](const C& c) {
         return std::optional<std::string>(c.attack.amp_accept_on_detect ? "true" : "false");
       }},

      {"defense.rule", [](C& c, V v) { c.defense = named(parse_defense, v); },
       [](const C& c) { return std::optional(std::string(to_string(c.defense))); }},
      {"defense.m_adversaries", [](C& c, V v) { c.krum_m_adversaries = to_size(v); },
       [](const C& c) { return std::optional(std::to_string(c.krum_m_adversaries)); }},
      {"defense.beta", [](C& c, V v) { c.trim_beta = to_size(v); },
       [](const C& c) { return std::optional(std::to_string(c.trim_beta)); }},

      {"review.k", [](C& c, V v) { c.review.k = to_double(v); },
       [](const C& c) { return std::optional(fmt_double(c.review.k)); }},
      {"review.noniid_mode", [](C& c, V v) { c.review.noniid_mode = to_bool(v); },
       [](const C& c) { return std::optional<std::string>(c.review.noniid_mode ? "true" : "false"); }},
      {"review.subsample_size", [](C& c, V v) { c.review.subsample_size = to_size(v); },
       [](const C& c) { return opt_str(c.review.subsample_size); }},
      {"review.malicious_count",
       [](C& c, V v) { c.malicious_count = named(parse_malicious_count, v); },
       [](const C& c) { return std::optional(std::string(to_string(c.malicious_count))); }},
  };
  return keys;
}

const Key* find_key(std::string_view name) {
  const auto& keys = key_table();
  auto it = std::find_if(keys.begin(), keys.end(), [&](const Key& k) { return k.name == name; });
  return it == keys.end() ? nullptr : &*it;
}

}  // namespace

void apply_setting(ExperimentConfig& cfg, std::string_view key, std::string_view value,
                   std::size_t line) {
  const Key* k = find_key(key);
  if (!k) throw ConfigError(std::string(key), "unknown key", line);
  try {
    k->set(cfg, trim(value));
  } catch (const BadValue& e) {
    throw ConfigError(std::string(key), e.what, line);
  }
}

bool is_known_key(std::string_view key) { return find_key(key) != nullptr; }

std::vector<std::string> known_keys() {
  std::vector<std::string> out;
  for (const auto& k : key_table()) out.emplace_back(k.name);
  return out;
}

ExperimentConfig parse_config(std::string_view text) {
  ExperimentConfig cfg;
  std::set<std::string, std::less<>> seen;
  std::size_t line_no = 0;
  std::size_t start = 0;
  while (start <= text.size()) {
    const std::size_t nl = text.find('\n', start);
    std::string_view line = text.substr(start, nl == text.npos ? text.npos : nl - start);
    ++line_no;
    start = nl == text.npos ? text.size() + 1 : nl + 1;

    if (const auto hash = line.find('#'); hash != line.npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == line.npos) throw ConfigError("", "expected 'key = value'", line_no);
    const std::string_view key = trim(line.substr(0, eq));
    if (key.empty()) throw ConfigError("", "missing key before '='", line_no);
    if (!seen.insert(std::string(key)).second) {
      throw ConfigError(std::string(key), "duplicate key", line_no);
    }
    apply_setting(cfg, key, line.substr(eq + 1), line_no);
  }
  cfg.validate();
  return cfg;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("", "cannot open config file '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

std::string serialize_config(const ExperimentConfig& cfg) {
  std::string out;
  for (const auto& k : key_table()) {
    if (auto v = k.get(cfg)) out += fmt::format("{} = {}\n", k.name, *v);
  }
  return out;
}

std::string config_hash(const ExperimentConfig& cfg) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : serialize_config(cfg)) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  return fmt::format("{:016x}", h);
}

}  // namespace fedsim
