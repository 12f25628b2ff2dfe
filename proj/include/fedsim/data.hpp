#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <vector>

#include "fedsim/nn.hpp"

namespace fedsim {

struct Dataset {
  std::vector<Example> examples;
  int num_classes = 0;
  int dim = 0;

  int size() const { return static_cast<int>(examples.size()); }
};

// One client's slice of a dataset. `indices` is sorted ascending; `permuted`
// is a fixed seeded permutation of it that defines which samples become
// active first under a partial-data ratio.
struct ClientPartition {
  int client_id = 0;
  std::vector<int> indices;
  std::vector<int> permuted;
};

// Prefix view of a partition at ratio R: the first ceil(R * size) entries of
// the permutation. Views at smaller R are nested inside views at larger R.
// Holds a pointer into the partition, which must outlive the view.
class ActiveView {
 public:
  ActiveView(const ClientPartition& partition, double ratio);

  std::span<const int> active_indices() const;
  int size() const { return count_; }
  double ratio() const { return ratio_; }
  const ClientPartition& partition() const { return *partition_; }

 private:
  const ClientPartition* partition_;
  double ratio_;
  int count_;
};

// ceil(ratio * n) with a tolerance against floating-point rounding, clamped
// to [1, n] so any positive ratio keeps at least one sample.
int active_count(double ratio, int n);

// Class-balanced Gaussian mixture: class means are drawn once from the seed
// as N(0, I/d) (unit expected norm), examples are mean + spread * N(0, I).
// Labels cycle 0..C-1 so any prefix stays balanced within one example.
Dataset generate_synthetic(int num_classes, int dim, int n, double spread,
                           std::uint64_t seed);

// CSV schema: `label,f0,f1,...` per line, no header. num_classes is inferred
// as max label + 1; a note about label gaps goes to `warnings` if provided.
Dataset load_dataset(const std::filesystem::path& path,
                     std::ostream* warnings = nullptr);

// Writes a dataset in the same CSV schema (atomically, temp file + rename).
void save_dataset(const Dataset& dataset, const std::filesystem::path& path);

// Contiguous split of a seeded global permutation; the first (n mod N)
// clients get one extra sample.
std::vector<ClientPartition> partition_iid(const Dataset& dataset,
                                           int n_clients, std::uint64_t seed);

// Label-shard split: each class is cut into ceil(s*N/C) near-equal parts of a
// seeded within-class permutation and every client receives s parts from s
// distinct classes.
std::vector<ClientPartition> partition_noniid_shards(const Dataset& dataset,
                                                     int n_clients,
                                                     int shards_per_client,
                                                     std::uint64_t seed);

ActiveView subset_ratio(const ClientPartition& partition, double ratio);

}  // namespace fedsim
