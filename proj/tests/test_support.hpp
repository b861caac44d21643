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

// Generators shared by the unit tests and the acceptance binary.

#pragma once

#include <random>
#include <string>
#include <vector>

#include "ctxent/dsl.hpp"
#include "ctxent/models.hpp"
#include "ctxent/probability.hpp"

namespace ctxent::testing {

inline AlternativeSet numbered_set(const std::string& name, std::size_t n) {
  std::vector<std::string> outcomes;
  for (std::size_t i = 0; i < n; ++i) outcomes.push_back(name + std::to_string(i));
  return AlternativeSet(name, outcomes);
}

/// Random joint over an rows x cols product space. Roughly `zero_share` of
/// the cells are forced to zero, always leaving at least one positive cell.
inline JointDistribution random_joint(std::mt19937_64& rng, std::size_t rows, std::size_t cols,
                                      double zero_share = 0.25, const std::string& ctx = "fuzz") {
  std::uniform_real_distribution<double> weight(0.0, 1.0);
  std::bernoulli_distribution zero(zero_share);
  std::vector<double> p(rows * cols);
  double total = 0.0;
  for (auto& x : p) {
    x = zero(rng) ? 0.0 : weight(rng);
    total += x;
  }
  if (total == 0.0) {
    p[std::uniform_int_distribution<std::size_t>(0, p.size() - 1)(rng)] = 1.0;
    total = 1.0;
  }
  for (auto& x : p) x /= total;
  return JointDistribution({numbered_set("A", rows), numbered_set("B", cols)}, Context(ctx), std::move(p));
}

inline std::string random_word(std::mt19937_64& rng, std::size_t min_len = 1, std::size_t max_len = 8) {
  static constexpr std::string_view kChars = "abcdefghijklmnopqrstuvwxyzABCDEFGHIJKLMNOPQRSTUVWXYZ0123456789_-.";
  std::uniform_int_distribution<std::size_t> len(min_len, max_len);
  std::uniform_int_distribution<std::size_t> pick(0, kChars.size() - 1);
  std::string s;
  const auto n = len(rng);
  for (std::size_t i = 0; i < n; ++i) s += kChars[pick(rng)];
  return s;
}

inline std::string random_description(std::mt19937_64& rng) {
  static const std::vector<std::string> kWords{"spin", "photon", "box", "α", "refill", "draw", "axis",
                                               "filter", "ball", "order", "x-axis", "45°"};
  std::uniform_int_distribution<std::size_t> count(0, 5);
  std::uniform_int_distribution<std::size_t> pick(0, kWords.size() - 1);
  std::string s;
  const auto n = count(rng);
  for (std::size_t i = 0; i < n; ++i) {
    if (i) s += " ";
    s += kWords[pick(rng)];
  }
  return s;
}

inline std::vector<std::string> distinct_words(std::mt19937_64& rng, std::size_t n) {
  std::vector<std::string> out;
  while (out.size() < n) {
    auto w = random_word(rng);
    if (std::find(out.begin(), out.end(), w) == out.end()) out.push_back(w);
  }
  return out;
}

inline double random_angle(std::mt19937_64& rng) {
  std::uniform_int_distribution<int> kind(0, 3);
  switch (kind(rng)) {
    case 0: return 45.0 * std::uniform_int_distribution<int>(-8, 8)(rng);
    case 1: return std::uniform_int_distribution<int>(-360, 360)(rng);
    default: return std::uniform_real_distribution<double>(-720.0, 720.0)(rng);
  }
}

/// Random valid spec of any of the three models.
inline ExperimentSpec random_spec(std::mt19937_64& rng) {
  const Context ctx(random_word(rng), random_description(rng));
  const int model = std::uniform_int_distribution<int>(0, 2)(rng);
  const std::size_t stages = std::uniform_int_distribution<std::size_t>(1, model == 2 ? 3 : 5)(rng);
  const auto labels = distinct_words(rng, stages);
  if (model < 2) {
    std::vector<ChainStage> chain;
    for (const auto& l : labels) chain.push_back({l, Angle::degrees(random_angle(rng))});
    const Angle init = Angle::degrees(random_angle(rng));
    if (model == 0) return PhotonChainSpec{ctx, init, chain};
    return SpinChainSpec{ctx, init, chain};
  }
  for (;;) {
    const auto keys = distinct_words(rng, std::uniform_int_distribution<std::size_t>(1, 3)(rng));
    const auto ids = distinct_words(rng, std::uniform_int_distribution<std::size_t>(1, 5)(rng));
    std::vector<Ball> universe;
    std::uniform_int_distribution<int> value(0, 2);
    for (const auto& id : ids) {
      Ball b{id, {}};
      for (const auto& k : keys) b.attributes[k] = "v" + std::to_string(value(rng));
      universe.push_back(std::move(b));
    }
    std::uniform_int_distribution<std::size_t> key(0, keys.size() - 1);
    std::vector<AttributeTest> filter;
    if (std::bernoulli_distribution(0.4)(rng)) {
      const auto& k = keys[key(rng)];
      filter.push_back({k, universe.front().attributes.at(k)});
    }
    std::vector<BallStage> st;
    for (const auto& l : labels) {
      Refill refill;
      switch (std::uniform_int_distribution<int>(0, 2)(rng)) {
        case 0: break;
        case 1: refill = {RefillKind::ByOutcome, keys[key(rng)]}; break;
        default: refill = {RefillKind::RemoveDrawn, {}}; break;
      }
      st.push_back({l, keys[key(rng)], refill});
    }
    ExperimentSpec spec = BallsProcessSpec{ctx, universe, filter, st};
    try {
      validate_spec(spec);
      return spec;
    } catch (const Error&) {
      // Boxes can run dry with removals; draw again.
    }
  }
}

}  // namespace ctxent::testing
