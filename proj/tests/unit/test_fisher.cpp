#include <algorithm>
#include <cmath>
#include <map>
#include <utility>
#include <vector>

#include <doctest.h>

#include "fedsim/data.hpp"
#include "fedsim/errors.hpp"
#include "fedsim/fisher.hpp"
#include "fedsim/nn.hpp"
#include "fedsim/rng.hpp"

using namespace fedsim;

namespace {

// Dataset + single-client partition wrapping explicit examples.
struct Fixture {
  Dataset dataset;
  ClientPartition partition;

  Fixture(std::vector<Example> examples, int classes, int dim) {
    dataset.examples = std::move(examples);
    dataset.num_classes = classes;
    dataset.dim = dim;
    partition.client_id = 0;
    const int n = dataset.size();
    partition.indices.resize(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) partition.indices[static_cast<std::size_t>(i)] = i;
    partition.permuted = partition.indices;
  }

  ActiveView view() const { return ActiveView(partition, 1.0); }
};

ModelParams zero_model(const std::vector<int>& arch) {
  ModelParams m;
  m.arch = arch;
  m.values.assign(param_count(arch), 0.0);
  return m;
}

// Reference trace: mean over actives of sum_y p_y * ||grad on {(x,y)}||^2,
// with each per-label gradient materialized through the public grad().
double reference_trace(const ModelParams& model, const Dataset& dataset,
                       const ActiveView& view) {
  double total = 0.0;
  for (const int idx : view.active_indices()) {
    const Example& ex = dataset.examples[static_cast<std::size_t>(idx)];
    const std::vector<double> probs = forward(model, ex.x);
    double expected = 0.0;
    for (int y = 0; y < model.num_classes(); ++y) {
      Example relabeled = ex;
      relabeled.y = y;
      const std::vector<Example> batch{relabeled};
      const GradVector g = grad(model, batch);
      double sq = 0.0;
      for (const double v : g.values) sq += v * v;
      expected += probs[static_cast<std::size_t>(y)] * sq;
    }
    total += expected;
  }
  return total / static_cast<double>(view.size());
}

}  // namespace

TEST_CASE("exact trace at zero weights matches the closed form") {
  // With all weights zero the predictive distribution is uniform and the
  // squared per-example gradient is (C-1)/C * (||x||^2 + 1) for every label.

  // [DERIVED] C=2, x=[2]: 0.5 * (4 + 1) = 2.5.
  const Fixture two({Example{{2.0}, 0}}, 2, 1);
  CHECK(local_fim_trace_exact(zero_model({1, 2}), two.dataset, two.view()) ==
        doctest::Approx(2.5).epsilon(1e-10));

  // [DERIVED] C=3, x=[1,2]: (2/3) * (5 + 1) = 4.
  const Fixture three({Example{{1.0, 2.0}, 1}}, 3, 2);
  CHECK(local_fim_trace_exact(zero_model({2, 3}), three.dataset,
                              three.view()) ==
        doctest::Approx(4.0).epsilon(1e-10));

  // [DERIVED] two examples average their closed forms: (2.5 + 0.5*(1+1))/2.
  const Fixture pair({Example{{2.0}, 0}, Example{{1.0}, 1}}, 2, 1);
  CHECK(local_fim_trace_exact(zero_model({1, 2}), pair.dataset, pair.view()) ==
        doctest::Approx(1.75).epsilon(1e-10));
}

TEST_CASE("exact trace agrees with materialized per-label gradients") {
  // The production path computes ||g||^2 layer by layer without building the
  // gradient vector; this pits it against the public grad() on random models.
  const Dataset data = generate_synthetic(4, 3, 6, 0.9, 81);
  Fixture fx(data.examples, 4, 3);
  fx.dataset.num_classes = 4;

  for (const std::uint64_t seed : {1ULL, 2ULL, 3ULL}) {
    const ModelParams model = init_model({3, 5, 4}, seed);
    const double fast = local_fim_trace_exact(model, fx.dataset, fx.view());
    const double slow = reference_trace(model, fx.dataset, fx.view());
    CHECK(fast == doctest::Approx(slow).epsilon(1e-12));
    CHECK(fast >= 0.0);
  }
}

TEST_CASE("exact trace is invariant under sample duplication") {
  const Dataset data = generate_synthetic(3, 2, 5, 0.7, 82);
  Fixture once(data.examples, 3, 2);
  std::vector<Example> doubled = data.examples;
  doubled.insert(doubled.end(), data.examples.begin(), data.examples.end());
  Fixture twice(std::move(doubled), 3, 2);

  const ModelParams model = init_model({2, 4, 3}, 4);
  const double a = local_fim_trace_exact(model, once.dataset, once.view());
  const double b = local_fim_trace_exact(model, twice.dataset, twice.view());
  CHECK(a == doctest::Approx(b).epsilon(1e-12));
}

TEST_CASE("sampled trace: deterministic, unbiased enough, validated") {
  const Dataset data = generate_synthetic(2, 16, 500, 0.8, 83);
  Fixture fx(data.examples, 2, 16);
  const ModelParams model = init_model({16, 2}, 7);
  const double exact = local_fim_trace_exact(model, fx.dataset, fx.view());
  REQUIRE(exact > 0.0);

  // [TRIVIAL] equal seeds give bitwise-equal estimates.
  Rng ra(5);
  Rng rb(5);
  CHECK(local_fim_trace_sampled(model, fx.dataset, fx.view(), 50, ra) ==
        local_fim_trace_sampled(model, fx.dataset, fx.view(), 50, rb));

  // n_mc = 10 * |active| * C keeps every seeded trial within 5% of exact.
  const int n_mc = 10 * fx.dataset.size() * 2;
  for (std::uint64_t trial = 0; trial < 20; ++trial) {
    Rng rng(1000 + trial);
    const double est =
        local_fim_trace_sampled(model, fx.dataset, fx.view(), n_mc, rng);
    CHECK(est == doctest::Approx(exact).epsilon(0.05));
  }

  Rng rc(1);
  CHECK_THROWS_AS(local_fim_trace_sampled(model, fx.dataset, fx.view(), 0, rc),
                  ConfigError);
  // The dispatcher needs an rng only in sampled mode.
  CHECK(local_fim_trace(model, fx.dataset, fx.view(), FimMode::kExact, 0,
                        nullptr) == exact);
  CHECK_THROWS_AS(local_fim_trace(model, fx.dataset, fx.view(),
                                  FimMode::kSampled, 50, nullptr),
                  InputError);
}

TEST_CASE("fedfim_trace: weighted mean over clients") {
  // [DERIVED] traces (0, 4) with sizes (1, 3) -> 3.
  const std::map<int, double> traces{{0, 0.0}, {1, 4.0}};
  const std::map<int, long long> sizes{{0, 1}, {1, 3}};
  CHECK(fedfim_trace(traces, sizes) == doctest::Approx(3.0).epsilon(1e-12));

  // [TRIVIAL] one client passes through.
  CHECK(fedfim_trace({{7, 1.25}}, {{7, 9}}) == 1.25);

  // Convexity: the weighted mean sits within [min, max] of the locals.
  Rng rng(84);
  for (int trial = 0; trial < 100; ++trial) {
    std::map<int, double> t;
    std::map<int, long long> s;
    double lo = 1e300;
    double hi = -1e300;
    const int n = 1 + static_cast<int>(rng.below(8));
    for (int j = 0; j < n; ++j) {
      const double v = 10.0 * rng.uniform01();
      t[j] = v;
      s[j] = 1 + static_cast<long long>(rng.below(100));
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
    const double fed = fedfim_trace(t, s);
    CHECK(fed >= lo - 1e-12);
    CHECK(fed <= hi + 1e-12);
  }

  CHECK_THROWS_AS(fedfim_trace({}, {}), InputError);
  CHECK_THROWS_AS(fedfim_trace({{0, 1.0}}, {{1, 1}}), InputError);
  CHECK_THROWS_AS(fedfim_trace({{0, 1.0}}, {{0, 0}}), InputError);
}

TEST_CASE("cum_trace: lr-weighted running sum") {
  // [TRIVIAL] empty history.
  CHECK(cum_trace({}) == 0.0);

  // [DERIVED] 0.01*2 = 0.02; plus 0.0097*1 -> 0.0297.
  const std::vector<std::pair<double, double>> one{{0.01, 2.0}};
  CHECK(cum_trace(one) == doctest::Approx(0.02).epsilon(1e-12));
  const std::vector<std::pair<double, double>> hist{{0.01, 2.0},
                                                    {0.0097, 1.0}};
  CHECK(cum_trace(hist) == doctest::Approx(0.0297).epsilon(1e-12));

  // Prefix sums never decrease (lr > 0, trace >= 0).
  Rng rng(85);
  std::vector<std::pair<double, double>> random_hist;
  double prev = 0.0;
  for (int i = 0; i < 50; ++i) {
    random_hist.emplace_back(0.001 + rng.uniform01(), 5.0 * rng.uniform01());
    const double cur = cum_trace(random_hist);
    CHECK(cur >= prev);
    prev = cur;
  }

  const std::vector<std::pair<double, double>> bad_lr{{0.0, 1.0}};
  CHECK_THROWS_AS(cum_trace(bad_lr), InputError);
  const std::vector<std::pair<double, double>> bad_trace{{0.01, -1.0}};
  CHECK_THROWS_AS(cum_trace(bad_trace), InputError);
}
