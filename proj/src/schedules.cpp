#include "fedsim/schedules.hpp"

#include <algorithm>
#include <numeric>
#include <string>

#include "fedsim/data.hpp"
#include "fedsim/errors.hpp"
#include "fedsim/rng.hpp"

namespace fedsim {

double active_ratio(const DataSchedule& schedule, int t) {
  if (t < 0) throw InputError("active_ratio: negative round index");
  if (schedule.switch_round.has_value() && t >= *schedule.switch_round) {
    return schedule.late_ratio;
  }
  return schedule.early_ratio;
}

int pool_size_at(const ParticipationSchedule& schedule, int t, int n_clients) {
  const double fraction =
      (schedule.switch_round.has_value() && t >= *schedule.switch_round)
          ? schedule.late_fraction
          : schedule.early_fraction;
  return active_count(fraction, n_clients);
}

std::vector<int> participation_pool(const ParticipationSchedule& schedule,
                                    int t, int n_clients, std::uint64_t seed) {
  if (t < 0) throw InputError("participation_pool: negative round index");
  if (n_clients < 1) throw ConfigError("participation_pool: need >= 1 client");

  std::vector<int> order(static_cast<std::size_t>(n_clients));
  std::iota(order.begin(), order.end(), 0);
  Rng rng(stream_seed(seed, streams::kPool));
  rng.shuffle(order);

  const int size = pool_size_at(schedule, t, n_clients);
  std::vector<int> pool(order.begin(),
                        order.begin() + static_cast<std::ptrdiff_t>(size));
  std::sort(pool.begin(), pool.end());
  return pool;
}

std::optional<int> advise_switch_round(const std::vector<double>& growth,
                                       double fraction) {
  if (growth.empty() || !(fraction > 0.0) || fraction >= 1.0) {
    return std::nullopt;
  }
  double peak = 0.0;
  int peak_round = -1;
  for (std::size_t t = 0; t < growth.size(); ++t) {
    if (growth[t] > peak) {
      peak = growth[t];
      peak_round = static_cast<int>(t);
    }
  }
  if (peak_round < 0) return std::nullopt;
  for (std::size_t t = static_cast<std::size_t>(peak_round) + 1;
       t < growth.size(); ++t) {
    if (growth[t] < fraction * peak) return static_cast<int>(t);
  }
  return std::nullopt;
}

}  // namespace fedsim
