#include <gtest/gtest.h>

#include <cmath>
#include <limits>

#include "edgeprice/errors.hpp"
#include "edgeprice/policies.hpp"

namespace edgeprice {
namespace {

ArmStats stats_with(double mean, std::int64_t pulls) {
  return ArmStats{pulls, mean * static_cast<double>(pulls), 0.0};
}

// Largest q on a 1e-6 grid over [mean, 1] with n * d(mean, q) <= level.
double grid_scan_index(double mean, std::int64_t n, double level) {
  const double step = 1e-6;
  double best = mean;
  const auto start = static_cast<std::int64_t>(std::ceil(mean / step));
  for (std::int64_t i = start; i <= 1'000'000; ++i) {
    const double q = static_cast<double>(i) * step;
    if (static_cast<double>(n) * bernoulli_kl(mean, q) <= level) {
      best = q;
    } else {
      break;
    }
  }
  return best;
}

PolicyConfig config_for(PolicyKind kind, int k, std::int64_t horizon) {
  PolicyConfig c;
  c.kind = kind;
  c.num_arms = k;
  c.horizon = horizon;
  return c;
}

constexpr PolicyKind kAllKinds[] = {PolicyKind::kl_ucb, PolicyKind::moss, PolicyKind::ucb,
                                    PolicyKind::thompson, PolicyKind::epsilon_greedy};

TEST(ExplorationLevel, LogLogTermFloored) {
  EXPECT_DOUBLE_EQ(exploration_level(100.0, 0.0), std::log(100.0));
  EXPECT_DOUBLE_EQ(exploration_level(2.0, 3.0), std::log(2.0));
  EXPECT_DOUBLE_EQ(exploration_level(1.0, 3.0), 0.0);
  EXPECT_DOUBLE_EQ(exploration_level(1000.0, 3.0),
                   std::log(1000.0) + 3.0 * std::log(std::log(1000.0)));
}

TEST(KlUcbIndex, Examples) {
  EXPECT_EQ(kl_ucb_index(stats_with(1.0, 5), 10.0, 0.0), 1.0);
  // -log(1 - q) = 1.
  EXPECT_NEAR(kl_ucb_index(stats_with(0.0, 1), std::exp(1.0), 0.0), 1.0 - std::exp(-1.0),
              2e-9);
  EXPECT_NEAR(kl_ucb_index(stats_with(0.0, 1), std::exp(1.0), 0.0), 0.632121, 1e-6);
  EXPECT_NEAR(kl_ucb_index(stats_with(0.5, 10), 100.0, 0.0),
              grid_scan_index(0.5, 10, std::log(100.0)), 2e-6);
}

TEST(KlUcbIndex, BisectionBracketsTheRoot) {
  Stream rng(8);
  for (int i = 0; i < 2000; ++i) {
    const std::int64_t n = 1 + static_cast<std::int64_t>(rng.below(500));
    const double mean = static_cast<double>(rng.below(n + 1)) / static_cast<double>(n);
    const double t = static_cast<double>(n + rng.below(100000));
    const double gamma = rng.below(2) ? 3.0 : 0.0;
    const double level = exploration_level(t, gamma);
    const double idx = kl_ucb_index(stats_with(mean, n), t, gamma);
    ASSERT_GE(idx, mean);
    ASSERT_LE(idx, 1.0);
    ASSERT_LE(static_cast<double>(n) * bernoulli_kl(mean, idx), level);
    if (idx < 1.0) {
      const double above = std::min(1.0, idx + 2.0 * kKlUcbTolerance);
      ASSERT_GT(static_cast<double>(n) * bernoulli_kl(mean, above), level);
    }
  }
}

TEST(KlUcbIndex, MonotoneInRoundAndPulls) {
  Stream rng(9);
  for (int i = 0; i < 1000; ++i) {
    const double mean = rng.uniform();
    const std::int64_t n = 1 + static_cast<std::int64_t>(rng.below(200));
    const double t = 1.0 + static_cast<double>(rng.below(10000));
    const double base = kl_ucb_index(stats_with(mean, n), t, 0.0);
    ASSERT_LE(base, kl_ucb_index(stats_with(mean, n), t + 1.0 + rng.below(1000), 0.0) +
                        kKlUcbTolerance);
    ASSERT_GE(base + kKlUcbTolerance,
              kl_ucb_index(stats_with(mean, n + 1 + rng.below(50)), t, 0.0));
  }
}

TEST(KlUcbIndex, ExponentialDivergence) {
  // Zero mean stays at zero under the exponential divergence.
  EXPECT_EQ(kl_ucb_index(stats_with(0.0, 3), 50.0, 0.0, Divergence::exponential), 0.0);
  const double idx = kl_ucb_index(stats_with(0.2, 10), 100.0, 0.0, Divergence::exponential);
  EXPECT_GT(idx, 0.2);
  EXPECT_LE(10.0 * exponential_kl(0.2, idx), std::log(100.0));
}

TEST(KlUcbIndex, UnplayedArmIsAContractViolation) {
  EXPECT_THROW(kl_ucb_index(ArmStats{}, 10.0, 0.0), ContractViolation);
}

TEST(MossIndex, Examples) {
  EXPECT_NEAR(moss_index(stats_with(0.3, 1), 100000, 20), 0.3 + std::sqrt(std::log(5000.0)),
              1e-12);
  EXPECT_NEAR(moss_index(stats_with(0.3, 1), 100000, 20), 3.218423066, 1e-9);
  EXPECT_EQ(moss_index(stats_with(0.4, 5000), 100000, 20), 0.4);
  EXPECT_EQ(moss_index(stats_with(0.0, 1), 20, 20), 0.0);
}

TEST(UcbIndex, Examples) {
  EXPECT_EQ(ucb_index(stats_with(0.4, 1), 1.0), 0.4);
  EXPECT_NEAR(ucb_index(stats_with(0.5, 4), 100.0), 0.5 + std::sqrt(std::log(100.0) / 4.0),
              1e-12);
  EXPECT_NEAR(ucb_index(stats_with(0.5, 4), 100.0), 1.572983013, 1e-9);
  EXPECT_LT(ucb_index(stats_with(0.5, 8), 100.0), ucb_index(stats_with(0.5, 4), 100.0));
}

TEST(Indices, NeverBelowEmpiricalMean) {
  Stream rng(10);
  for (int i = 0; i < 2000; ++i) {
    const std::int64_t n = 1 + static_cast<std::int64_t>(rng.below(1000));
    const double mean = rng.uniform();
    const double t = static_cast<double>(n + rng.below(50000));
    ASSERT_GE(kl_ucb_index(stats_with(mean, n), t, 0.0), stats_with(mean, n).empirical_mean());
    ASSERT_GE(ucb_index(stats_with(mean, n), t), stats_with(mean, n).empirical_mean());
  }
}

TEST(SelectArm, ForcedExplorationStartsAtArmZero) {
  Stream rng(1);
  auto p = make_policy(config_for(PolicyKind::kl_ucb, 5, 100));
  EXPECT_EQ(p->select_arm(rng), 0);
}

TEST(SelectArm, ForcedExplorationPlaysEachArmOnceInOrder) {
  for (auto kind : {PolicyKind::kl_ucb, PolicyKind::moss, PolicyKind::ucb}) {
    auto p = make_policy(config_for(kind, 7, 100));
    Stream rng(2);
    for (int k = 0; k < 7; ++k) {
      const int arm = p->select_arm(rng);
      ASSERT_EQ(arm, k);
      p->update(arm, rng.uniform(), rng);
    }
    for (const auto& a : p->state().arms) EXPECT_EQ(a.pulls, 1);
  }
}

TEST(SelectArm, UcbPrefersTheBetterArm) {
  auto p = make_policy(config_for(PolicyKind::ucb, 2, 1000));
  Stream rng(3);
  for (int i = 0; i < 100; ++i) {
    p->update(0, 0.9, rng);
    p->update(1, 0.1, rng);
  }
  ASSERT_EQ(p->state().round, 200);
  EXPECT_EQ(p->select_arm(rng), 0);
}

TEST(SelectArm, FullExplorationIsUniform) {
  auto c = config_for(PolicyKind::epsilon_greedy, 10, 1000);
  c.epsilon = 1.0;
  auto p = make_policy(c);
  Stream rng(4);
  std::vector<int> counts(10, 0);
  const int n = 100000;
  for (int i = 0; i < n; ++i) ++counts[p->select_arm(rng)];
  // Chi-square with 9 degrees of freedom; 27.88 is the 0.999 quantile.
  double chi2 = 0.0;
  for (int c2 : counts) chi2 += (c2 - n / 10.0) * (c2 - n / 10.0) / (n / 10.0);
  EXPECT_LT(chi2, 27.88);
}

TEST(SelectArm, ScreenedKlUcbMatchesNaiveArgmax) {
  Stream rng(5);
  for (int trial = 0; trial < 300; ++trial) {
    const int k = 2 + static_cast<int>(rng.below(30));
    auto c = config_for(PolicyKind::kl_ucb, k, 100000);
    c.gamma = rng.below(2) ? 3.0 : 0.0;
    auto p = make_policy(c);
    const int rounds = k + static_cast<int>(rng.below(400));
    for (int r = 0; r < rounds; ++r) {
      const int arm = r < k ? r : static_cast<int>(rng.below(k));
      // Coarse rewards create ties between arms.
      p->update(arm, static_cast<double>(rng.below(3)) / 2.0, rng);
      if (r + 1 < k) continue;
      const double t = static_cast<double>(p->state().round + 1);
      int naive = 0;
      double best = -1.0;
      for (int a = 0; a < k; ++a) {
        const double v = kl_ucb_index(p->state().arms[a], t, c.gamma);
        if (v > best) {
          best = v;
          naive = a;
        }
      }
      ASSERT_EQ(p->select_arm(rng), naive) << "trial " << trial << " round " << r;
    }
  }
}

TEST(Update, FreshArmWithZeroReward) {
  auto p = make_policy(config_for(PolicyKind::ucb, 3, 100));
  Stream rng(6);
  p->update(1, 0.0, rng);
  EXPECT_EQ(p->state().arms[1].pulls, 1);
  EXPECT_EQ(p->state().arms[1].empirical_mean(), 0.0);
}

TEST(Update, ThompsonSuccessIsCertainForUnitReward) {
  for (int i = 0; i < 200; ++i) {
    auto p = make_policy(config_for(PolicyKind::thompson, 2, 100));
    Stream rng(1000 + i);
    p->update(0, 1.0, rng);
    ASSERT_EQ(p->state().alpha[0], 2.0);
    ASSERT_EQ(p->state().beta[0], 1.0);
  }
}

TEST(Update, MeanOfRepeatedRewardIsExact) {
  auto p = make_policy(config_for(PolicyKind::moss, 1, 2000));
  Stream rng(7);
  for (int i = 0; i < 1000; ++i) p->update(0, 0.3, rng);
  EXPECT_EQ(p->state().arms[0].empirical_mean(), 0.3);
}

TEST(Update, RejectsBadInput) {
  auto p = make_policy(config_for(PolicyKind::ucb, 3, 100));
  Stream rng(8);
  EXPECT_THROW(p->update(3, 0.5, rng), ContractViolation);
  EXPECT_THROW(p->update(0, 1.5, rng), ContractViolation);
  EXPECT_THROW(p->update(0, std::nan(""), rng), ContractViolation);
}

TEST(PolicyState, InvariantsHoldUnderRandomPlay) {
  for (auto kind : kAllKinds) {
    auto p = make_policy(config_for(kind, 6, 3000));
    Stream rng(11), env(12);
    for (int t = 0; t < 3000; ++t) {
      const int arm = p->select_arm(rng);
      ASSERT_GE(arm, 0);
      ASSERT_LT(arm, 6);
      p->update(arm, env.uniform(), rng);
      std::int64_t pulls = 0;
      for (int k = 0; k < 6; ++k) {
        const auto& a = p->state().arms[k];
        pulls += a.pulls;
        if (a.pulls > 0) {
          ASSERT_GE(a.empirical_mean(), 0.0);
          ASSERT_LE(a.empirical_mean(), 1.0);
        }
        if (kind == PolicyKind::thompson) {
          ASSERT_GE(p->state().alpha[k], 1.0);
          ASSERT_GE(p->state().beta[k], 1.0);
          ASSERT_EQ(p->state().alpha[k] + p->state().beta[k], 2.0 + a.pulls);
        }
      }
      ASSERT_EQ(pulls, p->state().round);
    }
  }
}

TEST(PolicyDeterminism, SameSeedAndRewardsSameSelections) {
  for (auto kind : kAllKinds) {
    std::vector<int> first, second;
    for (auto* out : {&first, &second}) {
      auto p = make_policy(config_for(kind, 8, 2000));
      Stream rng(derive_key({1, hash_label(to_string(kind))}));
      Stream env(77);
      for (int t = 0; t < 2000; ++t) {
        const int arm = p->select_arm(rng);
        out->push_back(arm);
        p->update(arm, env.uniform() < 0.1 * arm ? 1.0 : 0.0, rng);
      }
    }
    EXPECT_EQ(first, second) << to_string(kind);
  }
}

TEST(PolicyConfig, Validation) {
  auto c = config_for(PolicyKind::epsilon_greedy, 3, 10);
  c.epsilon = 1.5;
  EXPECT_THROW(c.validate(), ConfigError);
  c = config_for(PolicyKind::kl_ucb, 3, 10);
  c.gamma = -1.0;
  EXPECT_THROW(c.validate(), ConfigError);
  EXPECT_THROW(config_for(PolicyKind::moss, 30, 10).validate(), ConfigError);
  for (auto kind : kAllKinds) EXPECT_EQ(parse_policy_kind(to_string(kind)), kind);
  EXPECT_EQ(parse_exploit_rule("ucb_index"), ExploitRule::ucb_index);
}

}  // namespace
}  // namespace edgeprice
