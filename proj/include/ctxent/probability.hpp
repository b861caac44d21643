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

// Context-tagged discrete probability calculus.
//
// Every distribution carries exactly one Context: the experimental
// arrangement under which its numbers are defined. Operations never merge
// two contexts; anything that combines tagged values goes through
// require_same_context first.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <map>
#include <numeric>
#include <optional>
#include <set>
#include <span>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "ctxent/error.hpp"

namespace ctxent {

inline constexpr double kProbabilityFloor = -1e-12;
inline constexpr double kNormalizationTolerance = 1e-9;
inline constexpr double kConditioningThreshold = 1e-12;

/// Identifies one experimental arrangement. Two contexts are the same
/// context iff their ids are equal; the description is informational.
class Context {
 public:
  Context() = default;
  explicit Context(std::string id, std::string description = {})
      : id_(std::move(id)), description_(std::move(description)) {
    if (id_.empty()) {
      throw Error(ErrorKind::InvalidContext, "context id must be non-empty");
    }
  }

  const std::string& id() const noexcept { return id_; }
  const std::string& description() const noexcept { return description_; }

  // Member-wise value equality (id and description).
  friend bool operator==(const Context&, const Context&) = default;

 private:
  std::string id_;
  std::string description_;
};

inline bool same_context(const Context& a, const Context& b) {
  return a.id() == b.id();
}

/// Ordered, named set of mutually exclusive and exhaustive outcome labels.
class AlternativeSet {
 public:
  AlternativeSet() = default;
  AlternativeSet(std::string name, std::vector<std::string> outcomes)
      : name_(std::move(name)), outcomes_(std::move(outcomes)) {
    if (outcomes_.empty()) {
      throw Error(ErrorKind::EmptyAlternativeSet,
                  "set '" + name_ + "' has no outcomes");
    }
    std::set<std::string> seen;
    for (const auto& o : outcomes_) {
      if (!seen.insert(o).second) {
        throw Error(ErrorKind::DuplicateOutcome,
                    "outcome '" + o + "' repeated in set '" + name_ + "'");
      }
    }
  }

  const std::string& name() const noexcept { return name_; }
  const std::vector<std::string>& outcomes() const noexcept { return outcomes_; }
  std::size_t size() const noexcept { return outcomes_.size(); }

  std::optional<std::size_t> index_of(std::string_view label) const {
    auto it = std::find(outcomes_.begin(), outcomes_.end(), label);
    if (it == outcomes_.end()) return std::nullopt;
    return static_cast<std::size_t>(it - outcomes_.begin());
  }

  std::size_t require_index(std::string_view label) const {
    if (auto i = index_of(label)) return *i;
    throw Error(ErrorKind::UnknownOutcome, "no outcome '" + std::string(label) +
                                               "' in set '" + name_ + "'");
  }

  friend bool operator==(const AlternativeSet&, const AlternativeSet&) = default;

 private:
  std::string name_;
  std::vector<std::string> outcomes_;
};

/// Result of a non-throwing validation.
struct Validation {
  bool ok = true;
  ErrorKind kind = ErrorKind::InvalidDistribution;
  std::string detail;
  double residual = 0.0;  // how far the failing invariant is off

  explicit operator bool() const noexcept { return ok; }

  static Validation success() { return {}; }
  static Validation failure(ErrorKind kind, std::string detail,
                            double residual = 0.0) {
    return {false, kind, std::move(detail), residual};
  }
  void throw_if_failed() const {
    if (!ok) throw Error(kind, detail);
  }
};

/// Checks the probability-vector invariants: every entry finite and
/// >= -1e-12, total within 1e-9 of one.
inline Validation validate_probabilities(std::span<const double> probs) {
  if (probs.empty()) {
    return Validation::failure(ErrorKind::ShapeMismatch, "no probabilities");
  }
  double total = 0.0;
  for (std::size_t i = 0; i < probs.size(); ++i) {
    const double p = probs[i];
    if (!std::isfinite(p)) {
      return Validation::failure(ErrorKind::InvalidDistribution,
                                 "entry " + std::to_string(i) + " is not finite");
    }
    if (p < kProbabilityFloor) {
      std::ostringstream os;
      os << "entry " << i << " is " << p;
      return Validation::failure(ErrorKind::NegativeProbability, os.str(), -p);
    }
    if (p > 1.0 + kNormalizationTolerance) {
      std::ostringstream os;
      os << "entry " << i << " is " << p << " > 1";
      return Validation::failure(ErrorKind::NotNormalized, os.str(), p - 1.0);
    }
    total += p;
  }
  const double residual = total - 1.0;
  if (std::abs(residual) > kNormalizationTolerance) {
    std::ostringstream os;
    os << "probabilities sum to " << total << " (residual " << residual << ")";
    return Validation::failure(ErrorKind::NotNormalized, os.str(),
                               std::abs(residual));
  }
  return Validation::success();
}

/// Probability distribution for one set of alternatives in one context.
class Distribution {
 public:
  Distribution(AlternativeSet set, Context context, std::vector<double> probs)
      : set_(std::move(set)), context_(std::move(context)), probs_(std::move(probs)) {
    if (probs_.size() != set_.size()) {
      throw Error(ErrorKind::ShapeMismatch,
                  "set '" + set_.name() + "' has " + std::to_string(set_.size()) +
                      " outcomes but " + std::to_string(probs_.size()) +
                      " probabilities were given");
    }
    validate_probabilities(probs_).throw_if_failed();
  }

  const AlternativeSet& set() const noexcept { return set_; }
  const Context& context() const noexcept { return context_; }
  std::span<const double> probs() const noexcept { return probs_; }
  std::size_t size() const noexcept { return probs_.size(); }
  double operator[](std::size_t i) const { return probs_.at(i); }
  double prob(std::string_view outcome) const {
    return probs_[set_.require_index(outcome)];
  }

  friend bool operator==(const Distribution&, const Distribution&) = default;

 private:
  AlternativeSet set_;
  Context context_;
  std::vector<double> probs_;
};

/// Probabilities over the composite set of an ordered list of stages,
/// stored densely in row-major order (last stage varies fastest).
///
/// A single-stage joint is allowed so that one-observation arrangements
/// share the same representation; identities that relate two sets require
/// at least two stages.
class JointDistribution {
 public:
  JointDistribution(std::vector<AlternativeSet> stages, Context context,
                    std::vector<double> probs)
      : stages_(std::move(stages)), context_(std::move(context)), probs_(std::move(probs)) {
    if (stages_.empty()) {
      throw Error(ErrorKind::ShapeMismatch, "a joint needs at least one stage");
    }
    std::set<std::string> names;
    std::size_t cells = 1;
    for (const auto& s : stages_) {
      if (!names.insert(s.name()).second) {
        throw Error(ErrorKind::InvalidDistribution,
                    "stage name '" + s.name() + "' repeated");
      }
      cells *= s.size();
    }
    if (cells != probs_.size()) {
      throw Error(ErrorKind::ShapeMismatch,
                  "product space has " + std::to_string(cells) + " cells but " +
                      std::to_string(probs_.size()) + " probabilities were given");
    }
    validate_probabilities(probs_).throw_if_failed();
  }

  /// Wraps a Distribution as a one-stage joint.
  explicit JointDistribution(const Distribution& d)
      : JointDistribution({d.set()}, d.context(),
                          std::vector<double>(d.probs().begin(), d.probs().end())) {}

  std::size_t stage_count() const noexcept { return stages_.size(); }
  const std::vector<AlternativeSet>& stages() const noexcept { return stages_; }
  const AlternativeSet& stage(std::size_t i) const {
    if (i >= stages_.size()) {
      throw Error(ErrorKind::IndexOutOfRange, "stage " + std::to_string(i));
    }
    return stages_[i];
  }
  const Context& context() const noexcept { return context_; }
  std::span<const double> probs() const noexcept { return probs_; }
  std::size_t cell_count() const noexcept { return probs_.size(); }

  std::optional<std::size_t> stage_index(std::string_view name) const {
    for (std::size_t i = 0; i < stages_.size(); ++i) {
      if (stages_[i].name() == name) return i;
    }
    return std::nullopt;
  }

  std::vector<std::size_t> shape() const {
    std::vector<std::size_t> out;
    out.reserve(stages_.size());
    for (const auto& s : stages_) out.push_back(s.size());
    return out;
  }

  /// Multi-index of a flat cell position.
  std::vector<std::size_t> unflatten(std::size_t flat) const {
    std::vector<std::size_t> idx(stages_.size());
    for (std::size_t k = stages_.size(); k-- > 0;) {
      idx[k] = flat % stages_[k].size();
      flat /= stages_[k].size();
    }
    return idx;
  }

  std::size_t flatten(std::span<const std::size_t> idx) const {
    if (idx.size() != stages_.size()) {
      throw Error(ErrorKind::ShapeMismatch, "index rank mismatch");
    }
    std::size_t flat = 0;
    for (std::size_t k = 0; k < stages_.size(); ++k) {
      if (idx[k] >= stages_[k].size()) {
        throw Error(ErrorKind::IndexOutOfRange,
                    "outcome index " + std::to_string(idx[k]) + " in stage " +
                        std::to_string(k));
      }
      flat = flat * stages_[k].size() + idx[k];
    }
    return flat;
  }

  double cell(std::span<const std::size_t> idx) const { return probs_[flatten(idx)]; }
  double cell(std::initializer_list<std::size_t> idx) const {
    return cell(std::span<const std::size_t>(idx.begin(), idx.size()));
  }

  /// Single-stage joint viewed as a plain distribution.
  Distribution to_distribution() const {
    if (stages_.size() != 1) {
      throw Error(ErrorKind::ShapeMismatch,
                  "joint has " + std::to_string(stages_.size()) + " stages, not 1");
    }
    return Distribution(stages_[0], context_, probs_);
  }

  friend bool operator==(const JointDistribution&, const JointDistribution&) = default;

 private:
  std::vector<AlternativeSet> stages_;
  Context context_;
  std::vector<double> probs_;
};

inline Validation validate(const Distribution& d) { return validate_probabilities(d.probs()); }
inline Validation validate(const JointDistribution& j) { return validate_probabilities(j.probs()); }

/// Non-throwing check that every context id is equal. Vacuously ok.
inline Validation check_same_context(std::span<const Context> contexts) {
  std::vector<std::string> ids;
  for (const auto& c : contexts) {
    if (std::find(ids.begin(), ids.end(), c.id()) == ids.end()) ids.push_back(c.id());
  }
  if (ids.size() <= 1) return Validation::success();
  std::string detail = "values refer to different contexts:";
  for (const auto& id : ids) detail += " " + id;
  return Validation::failure(ErrorKind::ContextMismatch, detail);
}

inline void require_same_context(std::span<const Context> contexts) {
  check_same_context(contexts).throw_if_failed();
}

/// Variadic form over any values exposing context().
template <class... Tagged>
void require_same_context_of(const Tagged&... items) {
  const std::vector<Context> contexts{items.context()...};
  require_same_context(contexts);
}

/// Sums out every stage not in `keep`; the result keeps the original stage
/// order and the same context.
inline JointDistribution marginalize(const JointDistribution& joint,
                                     std::span<const std::size_t> keep) {
  if (keep.empty()) throw Error(ErrorKind::EmptyKeepSet, "keep set is empty");
  std::vector<std::size_t> kept(keep.begin(), keep.end());
  std::sort(kept.begin(), kept.end());
  kept.erase(std::unique(kept.begin(), kept.end()), kept.end());
  if (kept.back() >= joint.stage_count()) {
    throw Error(ErrorKind::IndexOutOfRange,
                "stage " + std::to_string(kept.back()) + " of " +
                    std::to_string(joint.stage_count()));
  }
  std::vector<AlternativeSet> stages;
  std::size_t cells = 1;
  for (auto k : kept) {
    stages.push_back(joint.stage(k));
    cells *= joint.stage(k).size();
  }
  std::vector<double> out(cells, 0.0);
  for (std::size_t flat = 0; flat < joint.cell_count(); ++flat) {
    const auto idx = joint.unflatten(flat);
    std::size_t target = 0;
    for (auto k : kept) target = target * joint.stage(k).size() + idx[k];
    out[target] += joint.probs()[flat];
  }
  return JointDistribution(std::move(stages), joint.context(), std::move(out));
}

inline JointDistribution marginalize(const JointDistribution& joint,
                                     std::initializer_list<std::size_t> keep) {
  return marginalize(joint, std::span<const std::size_t>(keep.begin(), keep.size()));
}

/// Distribution of a single stage.
inline Distribution marginal(const JointDistribution& joint, std::size_t stage) {
  return marginalize(joint, {stage}).to_distribution();
}

/// Bayes' rule: P(rest | given ∧ ctx) = P(rest ∧ given | ctx) / P(given | ctx).
inline JointDistribution condition(const JointDistribution& joint, std::size_t stage,
                                   std::size_t outcome) {
  if (stage >= joint.stage_count()) {
    throw Error(ErrorKind::IndexOutOfRange, "stage " + std::to_string(stage));
  }
  if (joint.stage_count() < 2) {
    throw Error(ErrorKind::ShapeMismatch, "conditioning needs at least two stages");
  }
  if (outcome >= joint.stage(stage).size()) {
    throw Error(ErrorKind::IndexOutOfRange, "outcome " + std::to_string(outcome) +
                                                " of stage " + joint.stage(stage).name());
  }
  std::vector<AlternativeSet> rest;
  std::size_t cells = 1;
  for (std::size_t k = 0; k < joint.stage_count(); ++k) {
    if (k == stage) continue;
    rest.push_back(joint.stage(k));
    cells *= joint.stage(k).size();
  }
  std::vector<double> out(cells, 0.0);
  double given = 0.0;
  for (std::size_t flat = 0; flat < joint.cell_count(); ++flat) {
    const auto idx = joint.unflatten(flat);
    if (idx[stage] != outcome) continue;
    std::size_t target = 0;
    for (std::size_t k = 0; k < joint.stage_count(); ++k) {
      if (k != stage) target = target * joint.stage(k).size() + idx[k];
    }
    out[target] += joint.probs()[flat];
    given += joint.probs()[flat];
  }
  if (given <= kConditioningThreshold) {
    std::ostringstream os;
    os << "P(" << joint.stage(stage).name() << "=" << joint.stage(stage).outcomes()[outcome]
       << "|" << joint.context().id() << ") = " << given;
    throw Error(ErrorKind::ConditionOnZeroProbability, os.str());
  }
  for (auto& p : out) p /= given;
  return JointDistribution(std::move(rest), joint.context(), std::move(out));
}

inline JointDistribution condition(const JointDistribution& joint, std::string_view stage_name,
                                   std::string_view outcome) {
  const auto s = joint.stage_index(stage_name);
  if (!s) {
    throw Error(ErrorKind::IndexOutOfRange, "no stage named '" + std::string(stage_name) + "'");
  }
  return condition(joint, *s, joint.stage(*s).require_index(outcome));
}

/// Product rule: joint[i, j] = prior[i] * conditional_i[j]. Conditionals are
/// keyed by prior outcome label; a missing key is allowed only for outcomes
/// of vanishing prior probability.
inline JointDistribution compose(const Distribution& prior,
                                 const std::map<std::string, Distribution>& conditionals) {
  std::vector<Context> contexts{prior.context()};
  const AlternativeSet* target = nullptr;
  for (const auto& [label, cond] : conditionals) {
    if (!prior.set().index_of(label)) {
      throw Error(ErrorKind::UnknownOutcome,
                  "conditional keyed by '" + label + "' not in set '" + prior.set().name() + "'");
    }
    contexts.push_back(cond.context());
    if (target == nullptr) {
      target = &cond.set();
    } else if (!(*target == cond.set())) {
      throw Error(ErrorKind::ShapeMismatch, "conditionals range over different sets");
    }
  }
  require_same_context(contexts);
  if (target == nullptr) {
    throw Error(ErrorKind::MissingConditional, "no conditionals given");
  }
  const std::size_t n_prior = prior.size();
  const std::size_t n_target = target->size();
  std::vector<double> out(n_prior * n_target, 0.0);
  for (std::size_t i = 0; i < n_prior; ++i) {
    const auto& label = prior.set().outcomes()[i];
    auto it = conditionals.find(label);
    if (it == conditionals.end()) {
      if (prior[i] > kConditioningThreshold) {
        throw Error(ErrorKind::MissingConditional,
                    "no conditional for " + prior.set().name() + "=" + label);
      }
      continue;
    }
    for (std::size_t j = 0; j < n_target; ++j) out[i * n_target + j] = prior[i] * it->second[j];
  }
  return JointDistribution({prior.set(), *target}, prior.context(), std::move(out));
}

/// Reorders stages; `order[k]` is the original index of the new k-th stage.
inline JointDistribution permute_stages(const JointDistribution& joint,
                                        std::span<const std::size_t> order) {
  const std::size_t s = joint.stage_count();
  if (order.size() != s) throw Error(ErrorKind::ShapeMismatch, "permutation rank mismatch");
  std::vector<bool> used(s, false);
  for (auto k : order) {
    if (k >= s || used[k]) throw Error(ErrorKind::IndexOutOfRange, "not a permutation");
    used[k] = true;
  }
  std::vector<AlternativeSet> stages;
  for (auto k : order) stages.push_back(joint.stage(k));
  std::vector<double> out(joint.cell_count());
  std::vector<std::size_t> new_idx(s);
  for (std::size_t flat = 0; flat < joint.cell_count(); ++flat) {
    const auto idx = joint.unflatten(flat);
    std::size_t target = 0;
    for (std::size_t k = 0; k < s; ++k) target = target * stages[k].size() + idx[order[k]];
    out[target] = joint.probs()[flat];
  }
  return JointDistribution(std::move(stages), joint.context(), std::move(out));
}

inline JointDistribution permute_stages(const JointDistribution& joint,
                                        std::initializer_list<std::size_t> order) {
  return permute_stages(joint, std::span<const std::size_t>(order.begin(), order.size()));
}

}  // namespace ctxent
