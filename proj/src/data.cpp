#include "fedsim/data.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <ostream>
#include <sstream>
#include <string>
#include <string_view>

#include "fedsim/errors.hpp"

namespace fedsim {

namespace {

// Seeded shuffle of a partition's indices, fixed at construction.
std::vector<int> make_permutation(const std::vector<int>& indices,
                                  std::uint64_t seed, int client_id) {
  std::vector<int> permuted = indices;
  Rng rng(stream_seed(seed, streams::kClientPerm,
                      static_cast<std::uint64_t>(client_id)));
  rng.shuffle(permuted);
  return permuted;
}

double parse_double(std::string_view token, int line_no) {
  double value = 0.0;
  const char* first = token.data();
  const char* last = token.data() + token.size();
  auto [ptr, ec] = std::from_chars(first, last, value);
  if (ec != std::errc{} || ptr != last) {
    throw DataError("line " + std::to_string(line_no) +
                    ": malformed number '" + std::string(token) + "'");
  }
  return value;
}

long parse_label(std::string_view token, int line_no) {
  long value = 0;
  const char* first = token.data();
  const char* last = token.data() + token.size();
  auto [ptr, ec] = std::from_chars(first, last, value);
  if (ec != std::errc{} || ptr != last) {
    throw DataError("line " + std::to_string(line_no) +
                    ": malformed label '" + std::string(token) + "'");
  }
  if (value < 0) {
    throw DataError("line " + std::to_string(line_no) + ": negative label " +
                    std::to_string(value));
  }
  return value;
}

}  // namespace

int active_count(double ratio, int n) {
  const double scaled = ratio * static_cast<double>(n);
  int count = static_cast<int>(std::ceil(scaled - 1e-9));
  return std::clamp(count, 1, n);
}

ActiveView::ActiveView(const ClientPartition& partition, double ratio)
    : partition_(&partition),
      ratio_(ratio),
      count_(active_count(ratio, static_cast<int>(partition.permuted.size()))) {}

std::span<const int> ActiveView::active_indices() const {
  return {partition_->permuted.data(), static_cast<std::size_t>(count_)};
}

ActiveView subset_ratio(const ClientPartition& partition, double ratio) {
  if (!(ratio > 0.0) || ratio > 1.0) {
    throw ConfigError("subset ratio must be in (0, 1], got " +
                      std::to_string(ratio));
  }
  if (partition.permuted.empty()) {
    throw InputError("subset_ratio: empty partition");
  }
  return ActiveView(partition, ratio);
}

Dataset generate_synthetic(int num_classes, int dim, int n, double spread,
                           std::uint64_t seed) {
  if (num_classes < 2) throw ConfigError("synthetic data needs >= 2 classes");
  if (dim < 1) throw ConfigError("synthetic data needs dim >= 1");
  if (n < num_classes) {
    throw ConfigError("synthetic data needs n >= num_classes (got n=" +
                      std::to_string(n) + ", C=" + std::to_string(num_classes) +
                      ")");
  }
  if (!(spread > 0.0)) throw ConfigError("spread must be > 0");

  Rng rng(stream_seed(seed, streams::kDataGen));
  const double mean_scale = 1.0 / std::sqrt(static_cast<double>(dim));
  std::vector<std::vector<double>> means(static_cast<std::size_t>(num_classes));
  for (auto& mean : means) {
    mean.resize(static_cast<std::size_t>(dim));
    for (double& m : mean) m = mean_scale * rng.normal();
  }

  Dataset dataset;
  dataset.num_classes = num_classes;
  dataset.dim = dim;
  dataset.examples.resize(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    const int label = i % num_classes;
    Example& ex = dataset.examples[static_cast<std::size_t>(i)];
    ex.y = label;
    ex.x.resize(static_cast<std::size_t>(dim));
    const auto& mean = means[static_cast<std::size_t>(label)];
    for (int k = 0; k < dim; ++k) {
      ex.x[static_cast<std::size_t>(k)] =
          mean[static_cast<std::size_t>(k)] + spread * rng.normal();
    }
  }
  return dataset;
}

Dataset load_dataset(const std::filesystem::path& path,
                     std::ostream* warnings) {
  std::ifstream file(path);
  if (!file) {
    throw IoError("cannot open dataset file: " + path.string());
  }

  Dataset dataset;
  long max_label = -1;
  std::string line;
  int line_no = 0;
  while (std::getline(file, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) {
      throw DataError("line " + std::to_string(line_no) + ": empty line");
    }

    Example ex;
    std::string_view rest(line);
    bool first = true;
    while (true) {
      const std::size_t comma = rest.find(',');
      const std::string_view token = rest.substr(0, comma);
      if (first) {
        const long label = parse_label(token, line_no);
        max_label = std::max(max_label, label);
        ex.y = static_cast<int>(label);
        first = false;
      } else {
        ex.x.push_back(parse_double(token, line_no));
      }
      if (comma == std::string_view::npos) break;
      rest.remove_prefix(comma + 1);
    }

    if (ex.x.empty()) {
      throw DataError("line " + std::to_string(line_no) + ": no features");
    }
    if (dataset.examples.empty()) {
      dataset.dim = static_cast<int>(ex.x.size());
    } else if (static_cast<int>(ex.x.size()) != dataset.dim) {
      throw DataError("line " + std::to_string(line_no) + ": expected " +
                      std::to_string(dataset.dim) + " features, got " +
                      std::to_string(ex.x.size()));
    }
    dataset.examples.push_back(std::move(ex));
  }

  if (dataset.examples.empty()) {
    throw DataError("dataset file is empty: " + path.string());
  }
  dataset.num_classes = static_cast<int>(max_label) + 1;
  if (dataset.num_classes < 2) {
    throw DataError("dataset has a single class; need at least 2");
  }

  if (warnings != nullptr) {
    std::vector<bool> seen(static_cast<std::size_t>(dataset.num_classes), false);
    for (const Example& ex : dataset.examples) {
      seen[static_cast<std::size_t>(ex.y)] = true;
    }
    std::vector<int> missing;
    for (int c = 0; c < dataset.num_classes; ++c) {
      if (!seen[static_cast<std::size_t>(c)]) missing.push_back(c);
    }
    if (!missing.empty()) {
      *warnings << "warning: " << path.string() << ": classes";
      for (int c : missing) *warnings << ' ' << c;
      *warnings << " have no examples (num_classes inferred as "
                << dataset.num_classes << ")\n";
    }
  }
  return dataset;
}

void save_dataset(const Dataset& dataset, const std::filesystem::path& path) {
  const std::filesystem::path tmp = path.string() + ".tmp";
  {
    std::ofstream file(tmp);
    if (!file) throw IoError("cannot write to " + tmp.string());
    char buf[64];
    for (const Example& ex : dataset.examples) {
      file << ex.y;
      for (double v : ex.x) {
        std::snprintf(buf, sizeof(buf), "%.17g", v);
        file << ',' << buf;
      }
      file << '\n';
    }
    if (!file) throw IoError("write failed for " + tmp.string());
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) throw IoError("cannot rename " + tmp.string() + " to " +
                        path.string() + ": " + ec.message());
}

std::vector<ClientPartition> partition_iid(const Dataset& dataset,
                                           int n_clients, std::uint64_t seed) {
  const int n = dataset.size();
  if (n_clients < 1) throw ConfigError("partition_iid: need >= 1 client");
  if (n_clients > n) {
    throw ConfigError("partition_iid: more clients (" +
                      std::to_string(n_clients) + ") than samples (" +
                      std::to_string(n) + ")");
  }

  std::vector<int> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), 0);
  Rng rng(stream_seed(seed, streams::kGlobalShuffle));
  rng.shuffle(order);

  const int base = n / n_clients;
  const int extra = n % n_clients;
  std::vector<ClientPartition> partitions(static_cast<std::size_t>(n_clients));
  std::size_t cursor = 0;
  for (int j = 0; j < n_clients; ++j) {
    const int take = base + (j < extra ? 1 : 0);
    ClientPartition& part = partitions[static_cast<std::size_t>(j)];
    part.client_id = j;
    part.indices.assign(order.begin() + static_cast<std::ptrdiff_t>(cursor),
                        order.begin() + static_cast<std::ptrdiff_t>(cursor + take));
    std::sort(part.indices.begin(), part.indices.end());
    part.permuted = make_permutation(part.indices, seed, j);
    cursor += static_cast<std::size_t>(take);
  }
  return partitions;
}

std::vector<ClientPartition> partition_noniid_shards(const Dataset& dataset,
                                                     int n_clients,
                                                     int shards_per_client,
                                                     std::uint64_t seed) {
  const int num_classes = dataset.num_classes;
  if (n_clients < 1) throw ConfigError("shard partition: need >= 1 client");
  if (shards_per_client < 1) {
    throw ConfigError("shard partition: shards_per_client must be >= 1");
  }
  if (shards_per_client > num_classes) {
    throw ConfigError("shard partition: shards_per_client (" +
                      std::to_string(shards_per_client) +
                      ") exceeds class count (" + std::to_string(num_classes) +
                      ")");
  }

  // Per-class index lists in dataset order.
  std::vector<std::vector<int>> by_class(static_cast<std::size_t>(num_classes));
  for (int i = 0; i < dataset.size(); ++i) {
    by_class[static_cast<std::size_t>(dataset.examples[static_cast<std::size_t>(i)].y)]
        .push_back(i);
  }
  for (int c = 0; c < num_classes; ++c) {
    if (by_class[static_cast<std::size_t>(c)].empty()) {
      throw ConfigError("shard partition: class " + std::to_string(c) +
                        " has no examples");
    }
  }

  // Cut each class into P near-equal contiguous parts of its seeded
  // permutation. Every part must be nonempty or some client would end up
  // with fewer than s distinct labels.
  const int parts_per_class =
      (shards_per_client * n_clients + num_classes - 1) / num_classes;
  std::vector<std::vector<std::vector<int>>> parts(
      static_cast<std::size_t>(num_classes));
  for (int c = 0; c < num_classes; ++c) {
    auto& class_indices = by_class[static_cast<std::size_t>(c)];
    const int class_size = static_cast<int>(class_indices.size());
    if (class_size < parts_per_class) {
      throw ConfigError("shard partition: class " + std::to_string(c) +
                        " has " + std::to_string(class_size) +
                        " examples but must be cut into " +
                        std::to_string(parts_per_class) +
                        " parts; short by " +
                        std::to_string(parts_per_class - class_size));
    }
    Rng rng(stream_seed(seed, streams::kClassPerm,
                        static_cast<std::uint64_t>(c)));
    rng.shuffle(class_indices);
    const int base = class_size / parts_per_class;
    const int extra = class_size % parts_per_class;
    auto& class_parts = parts[static_cast<std::size_t>(c)];
    class_parts.resize(static_cast<std::size_t>(parts_per_class));
    std::size_t cursor = 0;
    for (int p = 0; p < parts_per_class; ++p) {
      const int take = base + (p < extra ? 1 : 0);
      class_parts[static_cast<std::size_t>(p)].assign(
          class_indices.begin() + static_cast<std::ptrdiff_t>(cursor),
          class_indices.begin() + static_cast<std::ptrdiff_t>(cursor + take));
      cursor += static_cast<std::size_t>(take);
    }
  }

  // Assign parts greedily from the classes with the most unused parts, with
  // seeded random tie-breaking. The ceiling rule for P keeps this feasible:
  // remaining counts stay within 1 of each other, so at least s classes have
  // an unused part as long as any client still needs one.
  Rng assign_rng(stream_seed(seed, streams::kShardAssign));
  std::vector<int> remaining(static_cast<std::size_t>(num_classes),
                             parts_per_class);
  std::vector<int> next_part(static_cast<std::size_t>(num_classes), 0);
  std::vector<ClientPartition> partitions(static_cast<std::size_t>(n_clients));
  for (int j = 0; j < n_clients; ++j) {
    std::vector<int> candidates;
    for (int c = 0; c < num_classes; ++c) {
      if (remaining[static_cast<std::size_t>(c)] > 0) candidates.push_back(c);
    }
    if (static_cast<int>(candidates.size()) < shards_per_client) {
      throw ConfigError("shard partition: client " + std::to_string(j) +
                        " needs " + std::to_string(shards_per_client) +
                        " distinct classes but only " +
                        std::to_string(candidates.size()) +
                        " classes have unused parts");
    }
    assign_rng.shuffle(candidates);
    std::stable_sort(candidates.begin(), candidates.end(),
                     [&](int lhs, int rhs) {
                       return remaining[static_cast<std::size_t>(lhs)] >
                              remaining[static_cast<std::size_t>(rhs)];
                     });

    ClientPartition& part = partitions[static_cast<std::size_t>(j)];
    part.client_id = j;
    for (int k = 0; k < shards_per_client; ++k) {
      const int c = candidates[static_cast<std::size_t>(k)];
      const auto& shard =
          parts[static_cast<std::size_t>(c)]
               [static_cast<std::size_t>(next_part[static_cast<std::size_t>(c)])];
      part.indices.insert(part.indices.end(), shard.begin(), shard.end());
      ++next_part[static_cast<std::size_t>(c)];
      --remaining[static_cast<std::size_t>(c)];
    }
    std::sort(part.indices.begin(), part.indices.end());
    part.permuted = make_permutation(part.indices, seed, j);
  }
  return partitions;
}

}  // namespace fedsim
