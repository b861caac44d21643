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

#include <functional>
#include <numeric>
#include <random>
#include <set>

#include "ctxent/montecarlo.hpp"
#include "test_support.hpp"

namespace ctxent {
namespace {

ExperimentSpec builtin(const char* name) { return *find_builtin(name); }

mc::EmpiricalJoint run(const char* name, std::uint64_t n, std::uint64_t seed, std::uint32_t shards,
                       unsigned threads = 1) {
  return mc::simulate({builtin(name), n, seed, shards, threads});
}

ErrorKind kind_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.kind();
  }
  ADD_FAILURE() << "no error thrown";
  return ErrorKind::InvalidSpec;
}

TEST(Seeding, SplitMixReferenceValues) {
  EXPECT_EQ(mc::splitmix64(0), 0xe220a8397b1dcdafULL);
  EXPECT_EQ(mc::splitmix64(1), 0x910a2dec89025cc1ULL);
  EXPECT_EQ(mc::splitmix64(42), 0xbdd732262feb6e95ULL);
  EXPECT_EQ(mc::shard_seed(42, 0), 0x28efe333b266f103ULL);
  EXPECT_EQ(mc::shard_seed(0, 7), 0x3ee5789041c98ac3ULL);
}

TEST(Seeding, ShardSeedsAreDistinct) {
  std::set<std::uint64_t> seen;
  for (std::uint64_t master : {0ULL, 1ULL, 42ULL}) {
    for (std::uint64_t i = 0; i < 1000; ++i) seen.insert(mc::shard_seed(master, i));
  }
  EXPECT_EQ(seen.size(), 3000u);
}

TEST(Seeding, UniformIsHalfOpen) {
  std::mt19937_64 rng(1);
  for (int i = 0; i < 100000; ++i) {
    const double u = mc::uniform01(rng);
    ASSERT_GE(u, 0.0);
    ASSERT_LT(u, 1.0);
  }
}

TEST(Sharding, SizesCoverAllSamples) {
  for (std::uint64_t n : {1ULL, 7ULL, 1000ULL, 1000003ULL}) {
    for (std::uint32_t k : {1u, 3u, 8u, 13u}) {
      std::uint64_t total = 0, lo = ~0ULL, hi = 0;
      for (std::uint32_t i = 0; i < k; ++i) {
        const auto s = mc::shard_size(n, k, i);
        total += s;
        lo = std::min(lo, s);
        hi = std::max(hi, s);
      }
      EXPECT_EQ(total, n);
      EXPECT_LE(hi - lo, 1u);
    }
  }
}

TEST(Determinism, SameSeedSameCounts) {
  const auto a = run("m", 50000, 9, 4);
  const auto b = run("m", 50000, 9, 4);
  EXPECT_EQ(a.counts(), b.counts());
  EXPECT_NE(a.counts(), run("m", 50000, 10, 4).counts());
}

TEST(Determinism, ThreadCountNeverChangesCounts) {
  for (const char* name : {"l_two", "q_inv", "k", "l_u"}) {
    const auto reference = run(name, 60000, 123, 7, 1);
    for (unsigned threads : {2u, 3u, 7u, 16u, 0u}) {
      EXPECT_EQ(run(name, 60000, 123, 7, threads).counts(), reference.counts()) << name << " " << threads;
    }
  }
}

TEST(Determinism, MergeIsSumOfShards) {
  const auto spec = builtin("n_inv");
  const std::uint32_t shards = 5;
  const std::uint64_t n = 12345;
  std::vector<std::uint64_t> sum(4, 0);
  for (std::uint32_t i = 0; i < shards; ++i) {
    const auto c = mc::simulate_shard(spec, 4, mc::shard_size(n, shards, i), mc::shard_seed(77, i));
    for (std::size_t k = 0; k < 4; ++k) sum[k] += c[k];
  }
  const auto merged = mc::simulate({spec, n, 77, shards, 3});
  EXPECT_EQ(merged.counts(), sum);
  EXPECT_EQ(merged.n(), n);
}

TEST(Determinism, ShardCountIsPartOfTheStream) {
  EXPECT_NE(run("l_two", 40000, 5, 1).counts(), run("l_two", 40000, 5, 2).counts());
}

TEST(Sampling, StructuralZerosAreNeverHit) {
  const auto l_one = run("l_one", 100000, 1, 4);
  EXPECT_EQ(l_one.counts()[0], 0u);
  EXPECT_EQ(l_one.counts()[1], 100000u);
  const auto l_two = run("l_two", 100000, 1, 4);
  EXPECT_EQ(l_two.counts()[2], 0u);  // not-out then out
  const auto n = run("n", 100000, 1, 4);
  EXPECT_EQ(n.counts()[1], 0u);  // black then wood
  const auto l_u = mc::simulate({builtin("l_u"), 100000, 1, 4, 1});
  for (std::size_t i : {0u, 4u, 8u}) EXPECT_EQ(l_u.counts()[i], 0u);  // same colour twice
}

TEST(Sampling, PhotonMarginalAtOneMillion) {
  const auto emp = mc::simulate({builtin("l_two"), 1'000'000, 42, 8, 0});
  // B=out is cell (out, out) plus the impossible (not-out, out).
  const double freq = static_cast<double>(emp.counts()[0] + emp.counts()[2]) / 1e6;
  const double se = std::sqrt(freq * (1 - freq) / 1e6);
  EXPECT_LE(std::abs(freq - 0.25), 4 * se);
}

TEST(Sampling, BuiltinsAgreeWithClosedForms) {
  for (const auto& named : builtin_contexts()) {
    const auto emp = mc::simulate({named.spec, 200000, 2024, 8, 0});
    const auto cmp = mc::compare(emp, joint_of(named.spec));
    EXPECT_TRUE(cmp.pass()) << named.name;
    EXPECT_EQ(cmp.context_id, named.name);
  }
}

TEST(Sampling, RandomSpecsAgreeWithClosedForms) {
  std::mt19937_64 rng(51);
  int failures = 0;
  for (int trial = 0; trial < 40; ++trial) {
    const auto spec = testing::random_spec(rng);
    const auto cmp = mc::compare(mc::simulate({spec, 20000, static_cast<std::uint64_t>(trial), 4, 0}), joint_of(spec));
    failures += cmp.pass() ? 0 : 1;
  }
  // A 4-sigma band over a few hundred cells almost never trips; allow one.
  EXPECT_LE(failures, 1);
}

TEST(Compare, VerdictFields) {
  const auto emp = run("l_two", 1000, 3, 2);
  const auto cmp = mc::compare(emp, joint_of(builtin("l_two")));
  ASSERT_EQ(cmp.cells.size(), 4u);
  EXPECT_EQ(cmp.n, 1000u);
  const auto& c = cmp.cells[1];
  EXPECT_EQ(c.outcomes, (std::vector<std::string>{"out", "not-out"}));
  EXPECT_EQ(c.empirical, static_cast<double>(c.count) / 1000.0);
  EXPECT_NEAR(c.standard_error, std::sqrt(c.empirical * (1 - c.empirical) / 1000.0), 1e-15);
  EXPECT_EQ(c.bound, std::max(4 * c.standard_error, 0.01));
  // A cell that is never hit has zero spread; the count floor keeps its bound.
  EXPECT_EQ(cmp.cells[2].standard_error, 0.0);
  EXPECT_EQ(cmp.cells[2].bound, 0.01);
  EXPECT_TRUE(cmp.cells[2].pass);
}

TEST(Compare, WrongAnalyticJointFails) {
  const auto emp = run("m", 100000, 4, 4);
  // Same stages at a different angle, retagged with the sampled context.
  const auto other = joint_of(*find_builtin("m", Angle::degrees(60.0)));
  const JointDistribution wrong(other.stages(), emp.context(), {other.probs().begin(), other.probs().end()});
  const auto cmp = mc::compare(emp, wrong);
  EXPECT_FALSE(cmp.pass());
  EXPECT_FALSE(cmp.failing().empty());
  for (auto i : cmp.failing()) EXPECT_FALSE(cmp.cells[i].pass);
}

TEST(Compare, Errors) {
  const auto emp = run("l_two", 100, 1, 1);
  EXPECT_EQ(kind_of([&] { mc::compare(emp, joint_of(builtin("l_one"))); }), ErrorKind::ContextMismatch);
  const auto l_two = joint_of(builtin("l_two"));
  const JointDistribution one_stage({AlternativeSet("A", {"out", "not-out"})}, l_two.context(), {0.5, 0.5});
  EXPECT_EQ(kind_of([&] { mc::compare(emp, one_stage); }), ErrorKind::ShapeMismatch);
  const mc::EmpiricalJoint empty(l_two.stages(), l_two.context(), {0, 0, 0, 0});
  EXPECT_EQ(kind_of([&] { mc::compare(empty, l_two); }), ErrorKind::InvalidConfig);
  EXPECT_EQ(kind_of([&] { mc::EmpiricalJoint(l_two.stages(), l_two.context(), {1, 2, 3}); }),
            ErrorKind::ShapeMismatch);
}

TEST(Simulate, ConfigErrors) {
  EXPECT_EQ(kind_of([] { mc::simulate({builtin("m"), 0, 1, 1, 1}); }), ErrorKind::InvalidConfig);
  EXPECT_EQ(kind_of([] { mc::simulate({builtin("m"), 10, 1, 0, 1}); }), ErrorKind::InvalidConfig);
  BallsProcessSpec dry{Context("dry"), {{"a", {{"c", "x"}}}}, {}, {}};
  dry.stages = {{"X", "c", {RefillKind::RemoveDrawn, {}}}, {"Y", "c", {}}};
  EXPECT_EQ(kind_of([&] { mc::simulate({dry, 10, 1, 1, 1}); }), ErrorKind::InvalidSpec);
}

TEST(Simulate, MoreShardsThanSamples) {
  const auto emp = run("l_two", 3, 8, 10, 4);
  EXPECT_EQ(emp.n(), 3u);
  EXPECT_EQ(std::accumulate(emp.counts().begin(), emp.counts().end(), std::uint64_t{0}), 3u);
}

}  // namespace
}  // namespace ctxent
