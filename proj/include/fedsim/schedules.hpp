#pragma once

#include <cstdint>
#include <optional>
#include <vector>

namespace fedsim {

// Step schedule for the fraction of each client's local data that is active.
// The standard recover schedule trains on `early_ratio` until the switch
// round, then on the full dataset (late_ratio = 1). Setting late_ratio below
// early_ratio expresses the reverse heuristic: full data early, partial after.
struct DataSchedule {
  double early_ratio = 1.0;
  double late_ratio = 1.0;
  std::optional<int> switch_round;  // nullopt: never switch

  // Ratio R until round M, full data from round M on.
  static DataSchedule recover(double ratio, std::optional<int> recover_round) {
    return DataSchedule{ratio, 1.0, recover_round};
  }
};

double active_ratio(const DataSchedule& schedule, int t);

// Which clients are eligible for selection: the first ceil(f*N) ids of a
// fixed seeded permutation, with f switching from early_fraction to
// late_fraction at switch_round. Equal-or-smaller late fractions reuse the
// same permutation prefix, so the late pool nests inside the early one.
struct ParticipationSchedule {
  double early_fraction = 1.0;
  double late_fraction = 1.0;
  std::optional<int> switch_round;  // nullopt: never switch
};

std::vector<int> participation_pool(const ParticipationSchedule& schedule,
                                    int t, int n_clients, std::uint64_t seed);

int pool_size_at(const ParticipationSchedule& schedule, int t, int n_clients);

// Advisory only: given the per-round cumulative-trace growth (lr * trace),
// suggests the round where growth first falls below `fraction` of the peak
// seen so far. Never drives control flow.
std::optional<int> advise_switch_round(const std::vector<double>& growth,
                                       double fraction);

}  // namespace fedsim
