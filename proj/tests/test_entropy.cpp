// Copyright 2026 The ctxent Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include "ctxent/entropy.hpp"
#include "ctxent/models.hpp"
#include "oracle_values.hpp"
#include "test_support.hpp"

namespace ctxent {
namespace {

JointDistribution builtin(const char* name) { return joint_of(*find_builtin(name)); }

Distribution two_way(double p) {
  return Distribution(AlternativeSet("X", {"x", "not-x"}), Context("t"), {p, 1.0 - p});
}

TEST(Shannon, ReferenceValues) {
  EXPECT_EQ(entropy(two_way(0.0)), 0.0);
  EXPECT_EQ(entropy(two_way(0.5)), 1.0);
  EXPECT_NEAR(entropy(two_way(0.25)), oracle::kH_quarter, 1e-15);
  EXPECT_NEAR(entropy(two_way(1.0 / 3.0)), oracle::kH_third, 1e-15);
  EXPECT_NEAR(entropy(two_way(0.25)), 0.811278, 1e-6);
  EXPECT_NEAR(entropy(two_way(1.0 / 3.0)), 0.918296, 1e-6);
}

TEST(Shannon, ZeroTermsContributeNothing) {
  const std::vector<double> p{0.0, 0.5, 0.0, 0.5};
  EXPECT_EQ(shannon(p), 1.0);
}

TEST(Shannon, UnitsAndScale) {
  const auto d = two_way(0.3);
  const double bits = entropy(d);
  EXPECT_NEAR(entropy(d, {Units::Nats, 1.0}), std::numbers::ln2 * bits, 1e-12);
  EXPECT_NEAR(entropy(d, {Units::Bits, 2.5}), 2.5 * bits, 1e-12);
  EXPECT_THROW(entropy(d, {Units::Bits, 0.0}), Error);
  EXPECT_THROW(entropy(d, {Units::Bits, -1.0}), Error);
}

TEST(Shannon, BoundsOnRandomDistributions) {
  std::mt19937_64 rng(21);
  for (int trial = 0; trial < 500; ++trial) {
    const auto j = testing::random_joint(rng, 1 + trial % 5, 2 + trial % 4);
    const double h = joint_entropy(j);
    EXPECT_GE(h, 0.0);
    EXPECT_LE(h, std::log2(static_cast<double>(j.cell_count())) + 1e-9);
    const double h_a = entropy(marginal(j, 0));
    EXPECT_LE(h_a, h + 1e-12);
  }
  const std::vector<double> uniform(7, 1.0 / 7.0);
  EXPECT_NEAR(shannon(uniform), std::log2(7.0), 1e-12);
}

TEST(ConditionalEntropy, ReferenceValues) {
  EXPECT_EQ(conditional_entropy(builtin("l_two"), 0), 0.5);
  EXPECT_EQ(conditional_entropy(builtin("n"), 0), 0.5);
  const auto k_inv = builtin("k_inv");
  EXPECT_NEAR(conditional_entropy(k_inv, *k_inv.stage_index("B")), oracle::kK_inv_A_given_B, 1e-15);
  const auto n_inv = builtin("n_inv");
  EXPECT_NEAR(conditional_entropy(n_inv, *n_inv.stage_index("B")), oracle::kN_inv_A_given_B, 1e-15);
  EXPECT_NEAR(conditional_entropy(builtin("k"), 0), oracle::kK_B_given_A, 1e-15);
}

TEST(ConditionalEntropy, IndependentStagesGiveMarginal) {
  const std::vector<double> a{0.2, 0.8};
  const std::vector<double> b{0.1, 0.3, 0.6};
  std::vector<double> p;
  for (double x : a) {
    for (double y : b) p.push_back(x * y);
  }
  const JointDistribution j({testing::numbered_set("A", 2), testing::numbered_set("B", 3)}, Context("i"), p);
  EXPECT_NEAR(conditional_entropy(j, 0), shannon(b), 1e-12);
  const auto c = check_concavity(j, 0);
  EXPECT_NEAR(c.difference, 0.0, 1e-12);
  EXPECT_TRUE(c.holds);
}

TEST(JointEntropy, ReferenceValues) {
  EXPECT_NEAR(joint_entropy(builtin("m")), oracle::kM_joint, 1e-14);
  EXPECT_NEAR(joint_entropy(builtin("m_inv")), oracle::kM_inv_joint, 1e-14);
  EXPECT_NEAR(joint_entropy(builtin("q")), oracle::kQ_joint, 1e-14);
  EXPECT_NEAR(joint_entropy(builtin("q_inv")), oracle::kQ_joint, 1e-14);
  EXPECT_NEAR(joint_entropy(builtin("k")), oracle::kK_joint, 1e-14);
  EXPECT_NEAR(joint_entropy(builtin("k_inv")), oracle::kK_inv_joint, 1e-14);
}

TEST(JointEntropy, ClosedFormsAtQuarterPi) {
  const double c2 = std::pow(std::cos(std::numbers::pi / 8), 2);
  const double h8 = shannon(std::vector<double>{c2, 1 - c2});
  const double c16 = std::pow(std::cos(std::numbers::pi / 16), 2);
  const double h16 = shannon(std::vector<double>{c16, 1 - c16});
  EXPECT_NEAR(joint_entropy(builtin("m")), 2 * h8, 1e-14);
  EXPECT_NEAR(joint_entropy(builtin("m_inv")), 1 + h8, 1e-14);
  EXPECT_NEAR(joint_entropy(builtin("q")), h16 + h8, 1e-14);
}

TEST(JointEntropy, RoundedQuotesDifferFromExact) {
  // The six-decimal figures come from a rounded cos^2(pi/8); they agree with
  // the exact values to the two decimals that matter.
  EXPECT_NEAR(joint_entropy(builtin("m")), oracle::kQuotedM_joint, 5e-5);
  EXPECT_NEAR(joint_entropy(builtin("m_inv")), oracle::kQuotedM_inv_joint, 5e-5);
  EXPECT_NEAR(joint_entropy(builtin("q")), oracle::kQuotedQ_joint, 2e-4);
}

TEST(JointEntropy, StagePermutationInvariant) {
  std::mt19937_64 rng(22);
  for (int trial = 0; trial < 200; ++trial) {
    const auto j = testing::random_joint(rng, 2 + trial % 4, 2 + (trial / 4) % 4);
    EXPECT_NEAR(joint_entropy(j), joint_entropy(permute_stages(j, {1, 0})), 1e-12);
  }
}

TEST(Concavity, PhotonHolds) {
  const auto c = check_concavity(builtin("l_two"), 0);
  EXPECT_EQ(c.target, "B");
  EXPECT_EQ(c.given, "A");
  EXPECT_NEAR(c.h_target, oracle::kH_quarter, 1e-15);
  EXPECT_EQ(c.h_conditional, 0.5);
  EXPECT_TRUE(c.holds);
}

TEST(Concavity, ForeignDistributionRefused) {
  const auto l_two = builtin("l_two");
  const auto b_one = marginal(builtin("l_one"), 0);
  try {
    check_concavity(b_one, l_two, 0);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::ContextMismatch);
  }
  EXPECT_TRUE(check_concavity(marginal(l_two, 1), l_two, 0).holds);
}

TEST(StrongAdditivity, SpinChainsAtQuarterPi) {
  for (const char* name : {"m", "m_inv"}) {
    const auto s = check_strong_additivity(builtin(name));
    EXPECT_TRUE(s.holds) << name;
    EXPECT_LE(s.max_residual, 1e-9);
    ASSERT_EQ(s.terms.size(), 2u);
    for (const auto& t : s.terms) EXPECT_NEAR(t.sum, s.h_joint, 1e-12);
  }
}

TEST(StrongAdditivity, SpinChainsAnyAlpha) {
  std::mt19937_64 rng(23);
  std::uniform_real_distribution<double> deg(-360.0, 360.0);
  for (int trial = 0; trial < 100; ++trial) {
    const Angle alpha = Angle::degrees(deg(rng));
    for (const char* name : {"m", "m_inv", "q", "q_inv"}) {
      EXPECT_TRUE(check_strong_additivity(joint_of(*find_builtin(name, alpha))).holds);
    }
  }
}

TEST(StrongAdditivity, TwoFactorizationsOfOneContext) {
  const auto a_first = builtin("n");
  const auto b_first = permute_stages(a_first, {1, 0});
  EXPECT_TRUE(check_strong_additivity(a_first, b_first).holds);
  EXPECT_THROW(check_strong_additivity(a_first, permute_stages(builtin("n_inv"), {1, 0})), Error);
}

TEST(StrongAdditivity, ThreeStages) {
  std::mt19937_64 rng(24);
  std::vector<double> p(2 * 3 * 2);
  double total = 0;
  for (auto& x : p) total += (x = std::uniform_real_distribution<double>(0, 1)(rng));
  for (auto& x : p) x /= total;
  const JointDistribution j(
      {testing::numbered_set("A", 2), testing::numbered_set("B", 3), testing::numbered_set("C", 2)}, Context("t"), p);
  const auto s = check_strong_additivity(j);
  EXPECT_EQ(s.terms.size(), 3u);
  EXPECT_TRUE(s.holds);
}

TEST(PropertyFuzz, ThousandRandomJoints) {
  std::mt19937_64 rng(25);
  int zero_cells = 0;
  for (int trial = 0; trial < 1000; ++trial) {
    const auto rows = std::uniform_int_distribution<std::size_t>(2, 5)(rng);
    const auto cols = std::uniform_int_distribution<std::size_t>(2, 5)(rng);
    const auto j = testing::random_joint(rng, rows, cols, 0.3);
    zero_cells += static_cast<int>(std::count(j.probs().begin(), j.probs().end(), 0.0));
    const auto report = property_report(j);
    ASSERT_TRUE(report.holds()) << "trial " << trial;
    ASSERT_LE(report.strong_additivity.max_residual, 1e-9);
    for (const auto& c : report.concavity) ASSERT_GE(c.difference, -1e-9);
  }
  EXPECT_GT(zero_cells, 1000);
}

TEST(Reports, EntropyReportCoversAllPairs) {
  const auto r = entropy_report(builtin("l_two"));
  EXPECT_EQ(r.context_id, "l_two");
  ASSERT_EQ(r.sets.size(), 2u);
  ASSERT_EQ(r.conditionals.size(), 2u);
  EXPECT_EQ(r.joint, 1.5);
  for (const auto& s : r.sets) EXPECT_GE(s.value, 0.0);
}

TEST(Reports, ExpressionsNameTheContext) {
  EXPECT_EQ(entropy_expr("B", "A", "l_two"), "H[P(B|A∧l_two)]");
  EXPECT_EQ(entropy_expr("A∧B", "", "m"), "H[P(A∧B|m)]");
}

TEST(CrossContext, PhotonPair) {
  const auto r = compare_across_contexts(builtin("l_one"), builtin("l_two"));
  EXPECT_EQ(r.banner, kCrossContextBanner);
  bool found = false;
  for (const auto& e : r.entries) {
    if (e.expr_a == "H[P(B|l_one)]" && e.expr_b == "H[P(B|A∧l_two)]") {
      found = true;
      EXPECT_EQ(e.value_a, 0.0);
      EXPECT_EQ(e.value_b, 0.5);
      EXPECT_EQ(e.difference, 0.5);
    }
  }
  EXPECT_TRUE(found);
}

TEST(CrossContext, JointEntries) {
  const auto joint_entry = [](const char* a, const char* b) {
    const auto r = compare_across_contexts(builtin(a), builtin(b));
    EXPECT_EQ(r.entries.front().quantity, "H(all)");
    return r.entries.front();
  };
  auto m = joint_entry("m", "m_inv");
  EXPECT_NEAR(m.value_a, oracle::kM_joint, 1e-14);
  EXPECT_NEAR(m.value_b, oracle::kM_inv_joint, 1e-14);
  auto n = joint_entry("n", "n_inv");
  EXPECT_EQ(n.value_a, 1.5);
  EXPECT_EQ(n.value_b, 1.5);
  auto k = joint_entry("k", "k_inv");
  EXPECT_NEAR(k.value_a, 1.584963, 1e-6);
  EXPECT_NEAR(k.value_b, 1.530493, 1e-6);
  auto q = joint_entry("q", "q_inv");
  EXPECT_NEAR(q.value_a, q.value_b, 1e-12);
}

TEST(CrossContext, SameContextRefused) {
  try {
    compare_across_contexts(builtin("m"), builtin("m"));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::SameContext);
  }
}

}  // namespace
}  // namespace ctxent
