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

// Shannon entropy, conditional and composite entropies, and checks of the
// two identities every single-context composite distribution satisfies:
//
//   concavity          H(B|ctx) >= H(B|A∧ctx)
//   strong additivity  H(A∧B|ctx) = H(A|ctx) + H(B|A∧ctx)
//                                 = H(B|ctx) + H(A|B∧ctx)
//
// Comparing entropies of two different contexts is a separate operation
// with its own report type and never produces a property verdict.

#pragma once

#include <algorithm>
#include <cmath>
#include <numeric>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "ctxent/probability.hpp"

namespace ctxent {

inline constexpr double kPropertyTolerance = 1e-9;
inline constexpr std::string_view kCrossContextBanner =
    "cross-context comparison — not a property of Shannon entropy";

enum class Units { Bits, Nats };

inline constexpr std::string_view to_string(Units u) {
  return u == Units::Bits ? "bit" : "nat";
}

struct EntropyConfig {
  Units units = Units::Bits;
  double scale = 1.0;  // the positive constant K

  void validate() const {
    if (!(scale > 0.0) || !std::isfinite(scale)) {
      throw Error(ErrorKind::InvalidConfig, "entropy scale K must be positive and finite");
    }
  }
};

/// -K Σ p log p over a probability vector; entries <= 0 contribute nothing.
inline double shannon(std::span<const double> probs, const EntropyConfig& cfg = {}) {
  cfg.validate();
  double sum = 0.0;
  for (double p : probs) {
    if (p <= 0.0) continue;
    sum -= p * (cfg.units == Units::Bits ? std::log2(p) : std::log(p));
  }
  // -0.0 and tiny negative rounding of an exactly certain outcome.
  return sum <= 0.0 ? 0.0 : cfg.scale * sum;
}

inline double entropy(const Distribution& d, const EntropyConfig& cfg = {}) {
  validate(d).throw_if_failed();
  return shannon(d.probs(), cfg);
}

/// Entropy of the composite set of all stages.
inline double joint_entropy(const JointDistribution& joint, const EntropyConfig& cfg = {}) {
  validate(joint).throw_if_failed();
  return shannon(joint.probs(), cfg);
}

/// H[P(rest | given ∧ ctx)] = Σ_i P(given_i|ctx) H[P(rest | given_i ∧ ctx)],
/// where rest is the composite of every other stage. Outcomes whose
/// probability is at most 1e-12 contribute nothing.
inline double conditional_entropy(const JointDistribution& joint, std::size_t given,
                                  const EntropyConfig& cfg = {}) {
  validate(joint).throw_if_failed();
  if (joint.stage_count() < 2) {
    throw Error(ErrorKind::ShapeMismatch, "conditional entropy needs at least two stages");
  }
  if (given >= joint.stage_count()) {
    throw Error(ErrorKind::IndexOutOfRange, "stage " + std::to_string(given));
  }
  const std::size_t n_given = joint.stage(given).size();
  const std::size_t n_rest = joint.cell_count() / n_given;
  std::vector<std::vector<double>> rows(n_given);
  for (auto& r : rows) r.reserve(n_rest);
  for (std::size_t flat = 0; flat < joint.cell_count(); ++flat) {
    rows[joint.unflatten(flat)[given]].push_back(joint.probs()[flat]);
  }
  double total = 0.0;
  for (auto& row : rows) {
    const double weight = std::accumulate(row.begin(), row.end(), 0.0);
    if (weight <= kConditioningThreshold) continue;
    for (auto& p : row) p /= weight;
    total += weight * shannon(row, cfg);
  }
  return total;
}

/// H[P(target | given ∧ ctx)] for two stages of a joint of any size.
inline double conditional_entropy(const JointDistribution& joint, std::size_t target,
                                  std::size_t given, const EntropyConfig& cfg = {}) {
  if (target == given) throw Error(ErrorKind::IndexOutOfRange, "target equals given stage");
  const auto pair = marginalize(joint, {target, given});
  return conditional_entropy(pair, target < given ? 1 : 0, cfg);
}

/// Textual form of an entropy with its context written out, e.g.
/// "H[P(B|A∧l_two)]" or "H[P(A∧B|m)]".
inline std::string entropy_expr(std::string_view target, std::string_view given,
                                std::string_view context) {
  std::string s = "H[P(" + std::string(target) + "|";
  if (!given.empty()) s += std::string(given) + "∧";
  s += std::string(context) + ")]";
  return s;
}

inline std::string composite_name(const JointDistribution& joint,
                                  std::optional<std::size_t> skip = std::nullopt) {
  std::string out;
  for (std::size_t k = 0; k < joint.stage_count(); ++k) {
    if (skip && *skip == k) continue;
    if (!out.empty()) out += "∧";
    out += joint.stage(k).name();
  }
  return out;
}

struct ConcavityCheck {
  std::string target;  // composite of the non-conditioning stages
  std::string given;
  double h_target = 0.0;       // H(target|ctx)
  double h_conditional = 0.0;  // H(target|given∧ctx)
  double difference = 0.0;     // h_target - h_conditional
  bool holds = false;

  friend bool operator==(const ConcavityCheck&, const ConcavityCheck&) = default;
};

struct AdditivityTerm {
  std::string first;  // stage whose marginal entropy is taken
  double h_first = 0.0;
  double h_rest_given_first = 0.0;
  double sum = 0.0;

  friend bool operator==(const AdditivityTerm&, const AdditivityTerm&) = default;
};

struct StrongAdditivityCheck {
  double h_joint = 0.0;
  std::vector<AdditivityTerm> terms;  // one decomposition per stage
  double max_residual = 0.0;          // largest pairwise gap among all expressions
  bool holds = false;

  friend bool operator==(const StrongAdditivityCheck&, const StrongAdditivityCheck&) = default;
};

struct PropertyReport {
  std::string context_id;
  double tolerance = kPropertyTolerance;
  std::vector<ConcavityCheck> concavity;
  StrongAdditivityCheck strong_additivity;

  bool holds() const {
    return strong_additivity.holds &&
           std::all_of(concavity.begin(), concavity.end(),
                       [](const ConcavityCheck& c) { return c.holds; });
  }

  friend bool operator==(const PropertyReport&, const PropertyReport&) = default;
};

namespace detail {

inline void require_two_stages(const JointDistribution& joint) {
  if (joint.stage_count() < 2) {
    throw Error(ErrorKind::ShapeMismatch, "context '" + joint.context().id() +
                                              "' has a single set of alternatives; "
                                              "the identity relates two sets");
  }
}

inline double rest_entropy(const JointDistribution& joint, std::size_t skip,
                           const EntropyConfig& cfg) {
  std::vector<std::size_t> keep;
  for (std::size_t k = 0; k < joint.stage_count(); ++k) {
    if (k != skip) keep.push_back(k);
  }
  return joint_entropy(marginalize(joint, keep), cfg);
}

inline StrongAdditivityCheck finish_additivity(double h_joint, std::vector<AdditivityTerm> terms) {
  StrongAdditivityCheck out;
  out.h_joint = h_joint;
  std::vector<double> values{h_joint};
  for (const auto& t : terms) values.push_back(t.sum);
  const auto [lo, hi] = std::minmax_element(values.begin(), values.end());
  out.max_residual = *hi - *lo;
  out.holds = out.max_residual <= kPropertyTolerance;
  out.terms = std::move(terms);
  return out;
}

// Reorders `other` so that its stages line up by name with `reference`.
inline JointDistribution align_stages(const JointDistribution& reference,
                                      const JointDistribution& other) {
  if (reference.stage_count() != other.stage_count()) {
    throw Error(ErrorKind::ShapeMismatch, "joints have different stage counts");
  }
  std::vector<std::size_t> order;
  for (const auto& s : reference.stages()) {
    const auto k = other.stage_index(s.name());
    if (!k || !(other.stage(*k) == s)) {
      throw Error(ErrorKind::ShapeMismatch, "set '" + s.name() + "' differs between joints");
    }
    order.push_back(*k);
  }
  return permute_stages(other, order);
}

inline double max_abs_diff(std::span<const double> a, std::span<const double> b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

}  // namespace detail

/// Concavity with the conditioning stage explicit. The target is the
/// composite of every other stage.
inline ConcavityCheck check_concavity(const JointDistribution& joint, std::size_t given,
                                      const EntropyConfig& cfg = {}) {
  validate(joint).throw_if_failed();
  detail::require_two_stages(joint);
  ConcavityCheck c;
  c.target = composite_name(joint, given);
  c.given = joint.stage(given).name();
  c.h_target = detail::rest_entropy(joint, given, cfg);
  c.h_conditional = conditional_entropy(joint, given, cfg);
  c.difference = c.h_target - c.h_conditional;
  c.holds = c.difference >= -kPropertyTolerance;
  return c;
}

/// Concavity assembled from separately obtained pieces: the distribution of
/// the target set and a joint supplying the conditional entropy. Both must
/// belong to one context and agree on the target's probabilities.
inline ConcavityCheck check_concavity(const Distribution& target, const JointDistribution& joint,
                                      std::size_t given, const EntropyConfig& cfg = {}) {
  require_same_context_of(target, joint);
  if (joint.stage_count() != 2) {
    throw Error(ErrorKind::ShapeMismatch, "expected a two-stage joint");
  }
  const std::size_t other = given == 0 ? 1 : 0;
  const auto from_joint = marginal(joint, other);
  if (!(from_joint.set() == target.set())) {
    throw Error(ErrorKind::ShapeMismatch, "target set '" + target.set().name() +
                                              "' is not the non-conditioning stage");
  }
  if (detail::max_abs_diff(from_joint.probs(), target.probs()) > kNormalizationTolerance) {
    throw Error(ErrorKind::InvalidDistribution,
                "two different distributions for set '" + target.set().name() +
                    "' in the single context '" + target.context().id() + "'");
  }
  ConcavityCheck c = check_concavity(joint, given, cfg);
  c.h_target = entropy(target, cfg);
  c.difference = c.h_target - c.h_conditional;
  c.holds = c.difference >= -kPropertyTolerance;
  return c;
}

/// Computes H(joint) and, for each stage, H(stage) + H(rest|stage).
inline StrongAdditivityCheck check_strong_additivity(const JointDistribution& joint,
                                                     const EntropyConfig& cfg = {}) {
  validate(joint).throw_if_failed();
  detail::require_two_stages(joint);
  std::vector<AdditivityTerm> terms;
  for (std::size_t k = 0; k < joint.stage_count(); ++k) {
    AdditivityTerm t;
    t.first = joint.stage(k).name();
    t.h_first = entropy(marginal(joint, k), cfg);
    t.h_rest_given_first = conditional_entropy(joint, k, cfg);
    t.sum = t.h_first + t.h_rest_given_first;
    terms.push_back(std::move(t));
  }
  return detail::finish_additivity(joint_entropy(joint, cfg), std::move(terms));
}

/// Strong additivity assembled from two factorizations that were obtained
/// separately: `a_first` supplies H(A) + H(B|A), `b_first` supplies
/// H(B) + H(A|B). They must share a context, and in one context they are
/// necessarily the same composite distribution.
inline StrongAdditivityCheck check_strong_additivity(const JointDistribution& a_first,
                                                     const JointDistribution& b_first,
                                                     const EntropyConfig& cfg = {}) {
  require_same_context_of(a_first, b_first);
  if (a_first.stage_count() != 2) {
    throw Error(ErrorKind::ShapeMismatch, "expected two-stage joints");
  }
  const auto aligned = detail::align_stages(a_first, b_first);
  if (detail::max_abs_diff(aligned.probs(), a_first.probs()) > kNormalizationTolerance) {
    throw Error(ErrorKind::InvalidDistribution,
                "two different composite distributions in the single context '" +
                    a_first.context().id() + "'");
  }
  std::vector<AdditivityTerm> terms;
  for (const auto* j : {&a_first, &b_first}) {
    const std::size_t first = j == &a_first ? 0 : b_first.stage_index(a_first.stage(1).name()).value();
    AdditivityTerm t;
    t.first = j->stage(first).name();
    t.h_first = entropy(marginal(*j, first), cfg);
    t.h_rest_given_first = conditional_entropy(*j, first, cfg);
    t.sum = t.h_first + t.h_rest_given_first;
    terms.push_back(std::move(t));
  }
  return detail::finish_additivity(joint_entropy(a_first, cfg), std::move(terms));
}

/// Both property checks for one context; concavity is reported once per
/// conditioning stage.
inline PropertyReport property_report(const JointDistribution& joint,
                                      const EntropyConfig& cfg = {}) {
  PropertyReport r;
  r.context_id = joint.context().id();
  if (joint.stage_count() < 2) {
    r.strong_additivity.h_joint = joint_entropy(joint, cfg);
    r.strong_additivity.holds = true;
    return r;
  }
  for (std::size_t k = 0; k < joint.stage_count(); ++k) {
    r.concavity.push_back(check_concavity(joint, k, cfg));
  }
  r.strong_additivity = check_strong_additivity(joint, cfg);
  return r;
}

struct SetEntropy {
  std::string set;
  double value = 0.0;
  friend bool operator==(const SetEntropy&, const SetEntropy&) = default;
};

struct ConditionalEntropy {
  std::string target;
  std::string given;
  double value = 0.0;
  friend bool operator==(const ConditionalEntropy&, const ConditionalEntropy&) = default;
};

struct EntropyReport {
  std::string context_id;
  Units units = Units::Bits;
  std::vector<SetEntropy> sets;
  std::vector<ConditionalEntropy> conditionals;  // every ordered pair of stages
  double joint = 0.0;

  friend bool operator==(const EntropyReport&, const EntropyReport&) = default;
};

inline EntropyReport entropy_report(const JointDistribution& joint,
                                    const EntropyConfig& cfg = {}) {
  EntropyReport r;
  r.context_id = joint.context().id();
  r.units = cfg.units;
  for (std::size_t k = 0; k < joint.stage_count(); ++k) {
    r.sets.push_back({joint.stage(k).name(), entropy(marginal(joint, k), cfg)});
  }
  for (std::size_t t = 0; t < joint.stage_count(); ++t) {
    for (std::size_t g = 0; g < joint.stage_count(); ++g) {
      if (t == g) continue;
      r.conditionals.push_back(
          {joint.stage(t).name(), joint.stage(g).name(), conditional_entropy(joint, t, g, cfg)});
    }
  }
  r.joint = joint_entropy(joint, cfg);
  return r;
}

struct CrossContextEntry {
  std::string quantity;  // context-free shape, e.g. "H(B|A)"
  std::string expr_a;    // fully written, e.g. "H[P(B|l_one)]"
  double value_a = 0.0;
  std::string expr_b;
  double value_b = 0.0;
  double difference = 0.0;  // value_b - value_a

  friend bool operator==(const CrossContextEntry&, const CrossContextEntry&) = default;
};

struct CrossContextReport {
  std::string context_a;
  std::string context_b;
  Units units = Units::Bits;
  std::vector<CrossContextEntry> entries;
  std::string banner{kCrossContextBanner};

  friend bool operator==(const CrossContextReport&, const CrossContextReport&) = default;
};

/// Lines up the entropies of two different contexts. Where a set's
/// conditioning partner only exists in one of them, the other side uses the
/// set's own entropy, which is exactly the kind of comparison that must not
/// be read as a property check.
inline CrossContextReport compare_across_contexts(const JointDistribution& a,
                                                  const JointDistribution& b,
                                                  const EntropyConfig& cfg = {}) {
  if (same_context(a.context(), b.context())) {
    throw Error(ErrorKind::SameContext, "both values belong to context '" + a.context().id() +
                                            "'; use the property checks instead");
  }
  CrossContextReport r;
  r.context_a = a.context().id();
  r.context_b = b.context().id();
  r.units = cfg.units;

  auto add = [&](std::string quantity, std::string ea, double va, std::string eb, double vb) {
    r.entries.push_back({std::move(quantity), std::move(ea), va, std::move(eb), vb, vb - va});
  };

  add("H(all)", entropy_expr(composite_name(a), "", r.context_a), joint_entropy(a, cfg),
      entropy_expr(composite_name(b), "", r.context_b), joint_entropy(b, cfg));

  // Stage names in first-seen order over both contexts.
  std::vector<std::string> names;
  for (const auto* j : {&a, &b}) {
    for (const auto& s : j->stages()) {
      if (std::find(names.begin(), names.end(), s.name()) == names.end()) names.push_back(s.name());
    }
  }

  auto side = [&](const JointDistribution& j, const std::string& target,
                  const std::string& given) -> std::pair<std::string, double> {
    const auto t = j.stage_index(target).value();
    const auto g = given.empty() ? std::nullopt : j.stage_index(given);
    if (g) {
      return {entropy_expr(target, given, j.context().id()), conditional_entropy(j, t, *g, cfg)};
    }
    return {entropy_expr(target, "", j.context().id()), entropy(marginal(j, t), cfg)};
  };

  for (const auto& x : names) {
    if (!a.stage_index(x) || !b.stage_index(x)) continue;
    auto [ea, va] = side(a, x, "");
    auto [eb, vb] = side(b, x, "");
    add("H(" + x + ")", ea, va, eb, vb);
    for (const auto& y : names) {
      if (y == x) continue;
      const bool in_a = a.stage_index(y).has_value();
      const bool in_b = b.stage_index(y).has_value();
      if (!in_a && !in_b) continue;
      auto [ca, cva] = side(a, x, in_a ? y : "");
      auto [cb, cvb] = side(b, x, in_b ? y : "");
      add("H(" + x + "|" + y + ")", ca, cva, cb, cvb);
    }
  }
  return r;
}

}  // namespace ctxent
