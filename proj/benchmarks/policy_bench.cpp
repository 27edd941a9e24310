#include <benchmark/benchmark.h>

#include "edgeprice/market.hpp"
#include "edgeprice/oracle.hpp"
#include "edgeprice/policies.hpp"
#include "edgeprice/random.hpp"

namespace {

using namespace edgeprice;

// One select + update per iteration against Bernoulli arms with linearly
// spaced means, after a warm-up long enough to leave forced exploration.
void BM_SelectUpdate(benchmark::State& state, PolicyKind kind) {
  const int k = static_cast<int>(state.range(0));
  PolicyConfig config;
  config.kind = kind;
  config.num_arms = k;
  config.horizon = 1'000'000;
  auto policy = make_policy(config);
  Stream policy_rng(derive_key({1, hash_label("policy")}));
  Stream env_rng(derive_key({1, hash_label("environment")}));
  auto pull = [&] {
    const int arm = policy->select_arm(policy_rng);
    const double mu = 0.1 + 0.8 * arm / (k - 1);
    policy->update(arm, env_rng.uniform() < mu ? 1.0 : 0.0, policy_rng);
  };
  for (int i = 0; i < 4 * k; ++i) pull();
  for (auto _ : state) pull();
  state.SetItemsProcessed(state.iterations());
}

void BM_KlUcbBound(benchmark::State& state) {
  Stream rng(7);
  for (auto _ : state) {
    const double mean = rng.uniform();
    benchmark::DoNotOptimize(kl_ucb_bound(mean, 50, 9.2, Divergence::bernoulli));
  }
}

void BM_ExpectedReward(benchmark::State& state) {
  const auto model = ValuationModel::truncated_gaussian(0.2, 0.2);
  PriceVector arm{0, std::vector<double>(9, 0.35)};
  for (auto _ : state) benchmark::DoNotOptimize(expected_reward(arm, model));
}

void BM_SampleValuations(benchmark::State& state) {
  const auto model = ValuationModel::truncated_exponential(2.0);
  const ProductGrid grid(3, 3);
  Stream rng(11);
  std::vector<double> out(grid.num_products());
  for (auto _ : state) {
    sample_valuations(model, rng, out);
    benchmark::DoNotOptimize(out.data());
  }
}

}  // namespace

BENCHMARK_CAPTURE(BM_SelectUpdate, kl_ucb, PolicyKind::kl_ucb)->Arg(20)->Arg(50)->Arg(500);
BENCHMARK_CAPTURE(BM_SelectUpdate, moss, PolicyKind::moss)->Arg(20)->Arg(50)->Arg(500);
BENCHMARK_CAPTURE(BM_SelectUpdate, ucb, PolicyKind::ucb)->Arg(20)->Arg(50)->Arg(500);
BENCHMARK_CAPTURE(BM_SelectUpdate, thompson, PolicyKind::thompson)->Arg(20)->Arg(50)->Arg(500);
BENCHMARK_CAPTURE(BM_SelectUpdate, epsilon_greedy, PolicyKind::epsilon_greedy)
    ->Arg(20)->Arg(50)->Arg(500);
BENCHMARK(BM_KlUcbBound);
BENCHMARK(BM_ExpectedReward);
BENCHMARK(BM_SampleValuations);
BENCHMARK_MAIN();
