#include "fedsim/data.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <deque>
#include <fstream>
#include <istream>
#include <numeric>
#include <random>

#include "fedsim/error.hpp"
#include "fedsim/rng.hpp"

namespace fedsim {

LabeledDataset generate_synthetic(std::size_t num_classes,
                                  std::size_t samples_per_class, std::size_t dims,
                                  double class_separation, std::uint64_t seed) {
  if (dims < 1) throw PreconditionError("generate_synthetic: dims must be >= 1");
  if (num_classes < 1 || samples_per_class < 1) {
    throw PreconditionError("generate_synthetic: counts must be positive");
  }
  if (!(class_separation > 0.0)) {
    throw PreconditionError("generate_synthetic: class_separation must be positive");
  }

  Rng rng = make_rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);

  // Random unit directions are nearly orthogonal in high dimension; the
  // 1/sqrt(2) factor turns radius into pairwise distance for orthogonal means.
  const double radius = class_separation / std::sqrt(2.0);
  std::vector<double> means(num_classes * dims);
  for (std::size_t c = 0; c < num_classes; ++c) {
    double norm = 0.0;
    for (std::size_t d = 0; d < dims; ++d) {
      const double v = gauss(rng);
      means[c * dims + d] = v;
      norm += v * v;
    }
    norm = std::sqrt(norm);
    for (std::size_t d = 0; d < dims; ++d) {
      means[c * dims + d] *= norm > 0.0 ? radius / norm : 0.0;
    }
  }

  const std::size_t n = num_classes * samples_per_class;
  std::vector<double> features(n * dims);
  std::vector<std::size_t> labels(n);
  for (std::size_t c = 0; c < num_classes; ++c) {
    for (std::size_t s = 0; s < samples_per_class; ++s) {
      const std::size_t row = c * samples_per_class + s;
      labels[row] = c;
      for (std::size_t d = 0; d < dims; ++d) {
        features[row * dims + d] = means[c * dims + d] + gauss(rng);
      }
    }
  }

  for (std::size_t d = 0; d < dims; ++d) {
    double mean = 0.0;
    for (std::size_t r = 0; r < n; ++r) mean += features[r * dims + d];
    mean /= static_cast<double>(n);
    double var = 0.0;
    for (std::size_t r = 0; r < n; ++r) {
      const double v = features[r * dims + d] - mean;
      var += v * v;
    }
    var /= static_cast<double>(n);
    const double inv_sd = var > 0.0 ? 1.0 / std::sqrt(var) : 1.0;
    for (std::size_t r = 0; r < n; ++r) {
      features[r * dims + d] = (features[r * dims + d] - mean) * inv_sd;
    }
  }
  return LabeledDataset(dims, num_classes, std::move(features), std::move(labels));
}

PartitionScheme parse_partition_scheme(std::string_view name) {
  if (name == "iid") return PartitionScheme::kIid;
  if (name == "dirichlet") return PartitionScheme::kDirichlet;
  if (name == "label_shard") return PartitionScheme::kLabelShard;
  throw PreconditionError("unknown partition scheme '" + std::string(name) + "'");
}

std::string_view to_string(PartitionScheme s) {
  switch (s) {
    case PartitionScheme::kIid: return "iid";
    case PartitionScheme::kDirichlet: return "dirichlet";
    case PartitionScheme::kLabelShard: return "label_shard";
  }
  return "?";
}

PartitionSpec PartitionSpec::iid(std::size_t num_clients) {
  return {PartitionScheme::kIid, num_clients, std::nullopt, std::nullopt};
}

PartitionSpec PartitionSpec::dirichlet(std::size_t num_clients, double alpha) {
  return {PartitionScheme::kDirichlet, num_clients, alpha, std::nullopt};
}

PartitionSpec PartitionSpec::label_shard(std::size_t num_clients,
                                         std::size_t labels_per_client) {
  return {PartitionScheme::kLabelShard, num_clients, std::nullopt, labels_per_client};
}

void PartitionSpec::validate() const {
  if (num_clients == 0) throw PreconditionError("partition: num_clients must be positive");
  const bool needs_alpha = scheme == PartitionScheme::kDirichlet;
  const bool needs_labels = scheme == PartitionScheme::kLabelShard;
  if (needs_alpha != alpha.has_value()) {
    throw PreconditionError(needs_alpha ? "partition: dirichlet requires alpha"
                                        : "partition: alpha is only valid for dirichlet");
  }
  if (needs_labels != labels_per_client.has_value()) {
    throw PreconditionError(needs_labels
                                ? "partition: label_shard requires labels_per_client"
                                : "partition: labels_per_client is only valid for label_shard");
  }
  if (alpha && !(*alpha > 0.0 && std::isfinite(*alpha))) {
    throw PreconditionError("partition: alpha must be positive");
  }
  if (labels_per_client && *labels_per_client == 0) {
    throw PreconditionError("partition: labels_per_client must be positive");
  }
}

namespace {

using Shards = std::vector<std::vector<std::size_t>>;

std::vector<std::vector<std::size_t>> rows_by_class(const LabeledDataset& data, Rng& rng) {
  std::vector<std::vector<std::size_t>> by_class(data.num_classes());
  for (std::size_t i = 0; i < data.size(); ++i) by_class[data.label(i)].push_back(i);
  for (auto& rows : by_class) std::shuffle(rows.begin(), rows.end(), rng);
  return by_class;
}

// Splits `rows` into `parts` contiguous chunks whose sizes differ by at most 1.
void deal_evenly(const std::vector<std::size_t>& rows,
                 const std::vector<std::size_t>& owners, Shards& shards) {
  const std::size_t parts = owners.size();
  const std::size_t base = rows.size() / parts;
  const std::size_t extra = rows.size() % parts;
  std::size_t pos = 0;
  for (std::size_t p = 0; p < parts; ++p) {
    const std::size_t len = base + (p < extra ? 1 : 0);
    auto& dst = shards[owners[p]];
    dst.insert(dst.end(), rows.begin() + static_cast<std::ptrdiff_t>(pos),
               rows.begin() + static_cast<std::ptrdiff_t>(pos + len));
    pos += len;
  }
}

Shards partition_iid(const LabeledDataset& data, std::size_t clients, Rng& rng) {
  std::vector<std::size_t> rows(data.size());
  std::iota(rows.begin(), rows.end(), std::size_t{0});
  std::shuffle(rows.begin(), rows.end(), rng);
  std::vector<std::size_t> owners(clients);
  std::iota(owners.begin(), owners.end(), std::size_t{0});
  Shards shards(clients);
  deal_evenly(rows, owners, shards);
  return shards;
}

Shards partition_dirichlet(const LabeledDataset& data, std::size_t clients,
                           double alpha, Rng& rng) {
  Shards shards(clients);
  std::gamma_distribution<double> gamma(alpha, 1.0);
  for (const auto& rows : rows_by_class(data, rng)) {
    if (rows.empty()) continue;
    std::vector<double> props(clients);
    double total = 0.0;
    for (double& p : props) {
      p = gamma(rng);
      total += p;
    }
    if (!(total > 0.0)) {
      // Every gamma draw underflowed (tiny alpha); give the class to one client.
      std::fill(props.begin(), props.end(), 0.0);
      props[std::uniform_int_distribution<std::size_t>(0, clients - 1)(rng)] = 1.0;
      total = 1.0;
    }
    // Cumulative rounding keeps the class total exact.
    double cum = 0.0;
    std::size_t prev = 0;
    for (std::size_t c = 0; c < clients; ++c) {
      cum += props[c] / total;
      const std::size_t cut =
          c + 1 == clients ? rows.size()
                           : std::min(rows.size(), static_cast<std::size_t>(std::llround(
                                                       cum * static_cast<double>(rows.size()))));
      for (std::size_t i = prev; i < std::max(prev, cut); ++i) shards[c].push_back(rows[i]);
      prev = std::max(prev, cut);
    }
  }
  // Empty clients receive one sample from the current largest shard.
  for (std::size_t c = 0; c < clients; ++c) {
    if (!shards[c].empty()) continue;
    auto largest = std::max_element(shards.begin(), shards.end(),
                                    [](const auto& a, const auto& b) { return a.size() < b.size(); });
    if (largest->size() < 2) break;
    shards[c].push_back(largest->back());
    largest->pop_back();
  }
  return shards;
}

Shards partition_label_shard(const LabeledDataset& data, std::size_t clients,
                             std::size_t labels_per_client, Rng& rng) {
  auto by_class = rows_by_class(data, rng);
  std::vector<std::size_t> present;
  for (std::size_t c = 0; c < by_class.size(); ++c) {
    if (!by_class[c].empty()) present.push_back(c);
  }
  if (labels_per_client > present.size()) {
    throw PreconditionError("partition: labels_per_client exceeds the number of present labels");
  }

  // Labels are dealt from a stream of fresh permutations; duplicates within a
  // client are deferred to the next client so every client holds distinct labels.
  std::deque<std::size_t> stream;
  auto refill = [&] {
    std::vector<std::size_t> perm = present;
    std::shuffle(perm.begin(), perm.end(), rng);
    stream.insert(stream.end(), perm.begin(), perm.end());
  };
  std::vector<std::vector<std::size_t>> holders(data.num_classes());
  for (std::size_t c = 0; c < clients; ++c) {
    std::vector<std::size_t> mine;
    std::vector<std::size_t> deferred;
    while (mine.size() < labels_per_client) {
      if (stream.empty()) refill();
      const std::size_t label = stream.front();
      stream.pop_front();
      if (std::find(mine.begin(), mine.end(), label) != mine.end()) {
        deferred.push_back(label);
      } else {
        mine.push_back(label);
      }
    }
    stream.insert(stream.begin(), deferred.begin(), deferred.end());
    for (std::size_t label : mine) holders[label].push_back(c);
  }

  Shards shards(clients);
  for (std::size_t label : present) {
    if (holders[label].empty()) {
      throw PreconditionError("partition: label " + std::to_string(label) +
                              " is held by no client; increase num_clients or labels_per_client");
    }
    deal_evenly(by_class[label], holders[label], shards);
  }
  return shards;
}

}  // namespace

std::vector<std::vector<std::size_t>> partition_indices(const LabeledDataset& data,
                                                        const PartitionSpec& spec,
                                                        std::uint64_t seed) {
  spec.validate();
  if (spec.num_clients > data.size()) {
    throw PreconditionError("partition: more clients than samples");
  }
  Rng rng = make_rng(seed);
  Shards shards;
  switch (spec.scheme) {
    case PartitionScheme::kIid:
      shards = partition_iid(data, spec.num_clients, rng);
      break;
    case PartitionScheme::kDirichlet:
      shards = partition_dirichlet(data, spec.num_clients, *spec.alpha, rng);
      break;
    case PartitionScheme::kLabelShard:
      shards = partition_label_shard(data, spec.num_clients, *spec.labels_per_client, rng);
      break;
  }
  for (std::size_t c = 0; c < shards.size(); ++c) {
    if (shards[c].empty()) throw PartitionError(c, "received zero samples");
  }
  return shards;
}

std::vector<LabeledDataset> partition(const LabeledDataset& data,
                                      const PartitionSpec& spec, std::uint64_t seed) {
  std::vector<LabeledDataset> out;
  for (const auto& rows : partition_indices(data, spec, seed)) out.push_back(data.subset(rows));
  return out;
}

LabeledDataset balanced_subsample(const LabeledDataset& data, std::size_t size,
                                  std::uint64_t seed) {
  if (data.empty()) throw PreconditionError("balanced_subsample: empty dataset");
  if (size == 0) throw PreconditionError("balanced_subsample: size must be >= 1");
  const auto counts = data.class_counts();
  std::vector<double> weights(data.size());
  for (std::size_t i = 0; i < data.size(); ++i) {
    weights[i] = 1.0 / static_cast<double>(counts[data.label(i)]);
  }
  std::discrete_distribution<std::size_t> pick(weights.begin(), weights.end());
  Rng rng = make_rng(seed);
  std::vector<std::size_t> rows(size);
  for (auto& r : rows) r = pick(rng);
  return data.subset(rows);
}

std::pair<LabeledDataset, LabeledDataset> train_test_split(const LabeledDataset& data,
                                                           double test_fraction,
                                                           std::uint64_t seed) {
  if (!(test_fraction > 0.0 && test_fraction < 1.0)) {
    throw PreconditionError("train_test_split: test_fraction must be in (0, 1)");
  }
  std::vector<std::size_t> rows(data.size());
  std::iota(rows.begin(), rows.end(), std::size_t{0});
  Rng rng = make_rng(seed);
  std::shuffle(rows.begin(), rows.end(), rng);
  const auto n_test = static_cast<std::size_t>(
      std::llround(test_fraction * static_cast<double>(data.size())));
  if (n_test == 0 || n_test >= data.size()) {
    throw PreconditionError("train_test_split: split leaves one side empty");
  }
  std::span<const std::size_t> all(rows);
  return {data.subset(all.subspan(n_test)), data.subset(all.first(n_test))};
}

namespace {

std::vector<std::string_view> split_fields(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t comma = line.find(',', start);
    std::string_view f = line.substr(start, comma == std::string_view::npos ? line.npos
                                                                            : comma - start);
    while (!f.empty() && (f.front() == ' ' || f.front() == '\t')) f.remove_prefix(1);
    while (!f.empty() && (f.back() == ' ' || f.back() == '\t' || f.back() == '\r')) {
      f.remove_suffix(1);
    }
    out.push_back(f);
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

bool parse_double(std::string_view s, double& out) {
  if (s.empty()) return false;
  if (s.front() == '+') s.remove_prefix(1);
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc() && ptr == s.data() + s.size() && std::isfinite(out);
}

bool parse_label(std::string_view s, std::size_t& out) {
  if (s.empty()) return false;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc() && ptr == s.data() + s.size();
}

}  // namespace

LabeledDataset read_csv(std::istream& in, std::optional<std::size_t> num_classes) {
  std::vector<double> features;
  std::vector<std::size_t> labels;
  std::size_t dims = 0;
  std::size_t line_no = 0;
  std::size_t data_rows = 0;
  std::string line;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const auto fields = split_fields(line);
    if (fields.size() < 2) throw ParseError(line_no, "csv row needs at least one feature and a label");

    std::vector<double> row(fields.size() - 1);
    bool numeric = true;
    for (std::size_t i = 0; i + 1 < fields.size(); ++i) {
      numeric = numeric && parse_double(fields[i], row[i]);
    }
    std::size_t label = 0;
    const bool label_ok = parse_label(fields.back(), label);
    if (data_rows == 0 && labels.empty() && !numeric && !label_ok) continue;  // header
    if (!numeric) throw ParseError(line_no, "csv row has a non-numeric feature");
    if (!label_ok) throw ParseError(line_no, "csv label must be a nonnegative integer");
    if (dims == 0) dims = row.size();
    if (row.size() != dims) {
      throw ParseError(line_no, "csv row has " + std::to_string(row.size()) +
                                    " features, expected " + std::to_string(dims));
    }
    if (num_classes && label >= *num_classes) {
      throw ParseError(line_no, "csv label out of range");
    }
    features.insert(features.end(), row.begin(), row.end());
    labels.push_back(label);
    ++data_rows;
  }
  if (labels.empty()) throw ParseError(line_no, "csv contains no data rows");
  const std::size_t classes =
      num_classes.value_or(*std::max_element(labels.begin(), labels.end()) + 1);
  return LabeledDataset(dims, classes, std::move(features), std::move(labels));
}

LabeledDataset load_csv(const std::string& path, std::optional<std::size_t> num_classes) {
  std::ifstream in(path);
  if (!in) throw PreconditionError("cannot open csv file '" + path + "'");
  return read_csv(in, num_classes);
}

}  // namespace fedsim
