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

// Closed-form joints for three families of sequential experiments:
//
//   photon  a polarised photon through a chain of polarisation filters
//   spin    a spin-1/2 particle through a chain of Stern-Gerlach devices
//   balls   draws from a box of labelled balls, the box being refilled
//           between draws according to the observed outcome
//
// Each generator enumerates every path of the sequential model and
// multiplies the step probabilities (product rule), so the resulting joint
// is tagged with the spec's context and covers the full product space.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <numeric>
#include <optional>
#include <set>
#include <stdexcept>
#include <type_traits>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "ctxent/angle.hpp"
#include "ctxent/probability.hpp"

namespace ctxent {

// Size limits keep enumeration bounded for any accepted spec.
inline constexpr std::size_t kMaxChainStages = 20;
inline constexpr double kMaxDrawSequences = 1e7;

inline const std::vector<std::string> kPhotonOutcomes{"out", "not-out"};
inline const std::vector<std::string> kSpinOutcomes{"up", "down"};

/// One element of a photon or spin chain.
struct ChainStage {
  std::string label;
  Angle angle;
  friend bool operator==(const ChainStage&, const ChainStage&) = default;
};

/// Polarisation angles are measured from the horizontal.
struct PhotonChainSpec {
  Context context;
  Angle init_polarization;
  std::vector<ChainStage> filters;
  friend bool operator==(const PhotonChainSpec&, const PhotonChainSpec&) = default;
};

/// All axes lie in one plane; angles are measured from the z axis.
struct SpinChainSpec {
  Context context;
  Angle init_axis;
  std::vector<ChainStage> sg_axes;
  friend bool operator==(const SpinChainSpec&, const SpinChainSpec&) = default;
};

struct Ball {
  std::string id;
  std::map<std::string, std::string> attributes;
  friend bool operator==(const Ball&, const Ball&) = default;
};

struct AttributeTest {
  std::string attribute;
  std::string value;
  friend bool operator==(const AttributeTest&, const AttributeTest&) = default;
};

enum class RefillKind {
  None,         // the drawn ball goes back; the box is unchanged
  ByOutcome,    // box := every universe ball sharing the drawn ball's attribute value
  RemoveDrawn,  // the drawn ball is taken out
};

struct Refill {
  RefillKind kind = RefillKind::None;
  std::string attribute;  // only for ByOutcome
  friend bool operator==(const Refill&, const Refill&) = default;
};

struct BallStage {
  std::string label;
  std::string observe;
  Refill refill;
  friend bool operator==(const BallStage&, const BallStage&) = default;
};

struct BallsProcessSpec {
  Context context;
  std::vector<Ball> universe;
  std::vector<AttributeTest> init_filter;  // conjunction; empty selects all
  std::vector<BallStage> stages;
  friend bool operator==(const BallsProcessSpec&, const BallsProcessSpec&) = default;
};

using ExperimentSpec = std::variant<PhotonChainSpec, SpinChainSpec, BallsProcessSpec>;

inline const Context& context_of(const ExperimentSpec& spec) {
  return std::visit([](const auto& s) -> const Context& { return s.context; }, spec);
}

inline std::string_view model_name(const ExperimentSpec& spec) {
  switch (spec.index()) {
    case 0: return "photon";
    case 1: return "spin";
    default: return "balls";
  }
}

namespace detail {

inline void require_chain(const Context& ctx, Angle init, const std::vector<ChainStage>& stages,
                          std::string_view what) {
  if (stages.empty()) {
    throw Error(ErrorKind::InvalidSpec, ctx.id() + ": at least one " + std::string(what) + " is required");
  }
  if (stages.size() > kMaxChainStages) {
    throw Error(ErrorKind::InvalidSpec, ctx.id() + ": more than " + std::to_string(kMaxChainStages) + " stages");
  }
  if (!std::isfinite(init.deg())) throw Error(ErrorKind::InvalidSpec, ctx.id() + ": initial angle is not finite");
  std::set<std::string> labels;
  for (const auto& s : stages) {
    if (s.label.empty()) throw Error(ErrorKind::InvalidSpec, ctx.id() + ": empty stage label");
    if (!labels.insert(s.label).second) {
      throw Error(ErrorKind::InvalidSpec, ctx.id() + ": stage label '" + s.label + "' repeated");
    }
    if (!std::isfinite(s.angle.deg())) {
      throw Error(ErrorKind::InvalidSpec, ctx.id() + ": angle of stage '" + s.label + "' is not finite");
    }
  }
}

inline std::vector<AlternativeSet> chain_sets(const std::vector<ChainStage>& stages,
                                              const std::vector<std::string>& outcomes) {
  std::vector<AlternativeSet> sets;
  for (const auto& s : stages) sets.emplace_back(s.label, outcomes);
  return sets;
}

}  // namespace detail

/// Sequential Malus-law model. The photon either carries a polarisation
/// angle or has been absorbed; an absorbed photon never comes out again.
inline JointDistribution photon_joint(const PhotonChainSpec& spec) {
  detail::require_chain(spec.context, spec.init_polarization, spec.filters, "filter");
  const std::size_t s = spec.filters.size();
  std::vector<double> probs(std::size_t{1} << s, 0.0);
  // Paths are enumerated depth first; bit k of the cell index (from the
  // most significant end) is 1 for "not-out" at filter k.
  struct Walk {
    const PhotonChainSpec& spec;
    std::vector<double>& probs;
    void operator()(std::size_t k, std::optional<Angle> polarization, double weight,
                    std::size_t cell) const {
      if (k == spec.filters.size()) {
        probs[cell] += weight;
        return;
      }
      const Angle filter = spec.filters[k].angle;
      const double pass = polarization ? polarizer_pass_probability(filter - *polarization) : 0.0;
      (*this)(k + 1, filter, weight * pass, cell << 1);
      (*this)(k + 1, std::nullopt, weight * (1.0 - pass), (cell << 1) | 1);
    }
  };
  Walk{spec, probs}(0, spec.init_polarization, 1.0, 0);
  return JointDistribution(detail::chain_sets(spec.filters, kPhotonOutcomes), spec.context,
                           std::move(probs));
}

/// Sequential Born-rule model: each measurement leaves the spin along the
/// measured axis ("up") or its opposite ("down").
inline JointDistribution spin_joint(const SpinChainSpec& spec) {
  detail::require_chain(spec.context, spec.init_axis, spec.sg_axes, "Stern-Gerlach stage");
  std::vector<double> probs(std::size_t{1} << spec.sg_axes.size(), 0.0);
  struct Walk {
    const SpinChainSpec& spec;
    std::vector<double>& probs;
    void operator()(std::size_t k, Angle axis, double weight, std::size_t cell) const {
      if (k == spec.sg_axes.size()) {
        probs[cell] += weight;
        return;
      }
      const Angle measured = spec.sg_axes[k].angle;
      const double up = spin_up_probability(measured - axis);
      (*this)(k + 1, measured, weight * up, cell << 1);
      (*this)(k + 1, measured + Angle::degrees(180.0), weight * (1.0 - up), (cell << 1) | 1);
    }
  };
  Walk{spec, probs}(0, spec.init_axis, 1.0, 0);
  return JointDistribution(detail::chain_sets(spec.sg_axes, kSpinOutcomes), spec.context,
                           std::move(probs));
}

/// Thrown by Rational when a numerator or denominator leaves 64 bits.
struct RationalOverflow : std::overflow_error {
  RationalOverflow() : std::overflow_error("rational overflow") {}
};

/// Exact fraction with small denominators.
class Rational {
 public:
  constexpr Rational() = default;
  constexpr Rational(std::uint64_t num, std::uint64_t den) : num_(num), den_(den) { reduce(); }

  constexpr std::uint64_t num() const noexcept { return num_; }
  constexpr std::uint64_t den() const noexcept { return den_; }
  constexpr double to_double() const noexcept {
    return static_cast<double>(num_) / static_cast<double>(den_);
  }

  friend Rational operator+(Rational a, Rational b) {
    const std::uint64_t g = std::gcd(a.den_, b.den_);
    const std::uint64_t l = mul(a.den_ / g, b.den_);
    return {add(mul(a.num_, l / a.den_), mul(b.num_, l / b.den_)), l};
  }
  friend Rational operator*(Rational a, Rational b) {
    const std::uint64_t g1 = std::gcd(a.num_, b.den_);
    const std::uint64_t g2 = std::gcd(b.num_, a.den_);
    return {mul(a.num_ / std::max<std::uint64_t>(g1, 1), b.num_ / std::max<std::uint64_t>(g2, 1)),
            mul(a.den_ / std::max<std::uint64_t>(g2, 1), b.den_ / std::max<std::uint64_t>(g1, 1))};
  }
  friend constexpr bool operator==(Rational, Rational) = default;

 private:
  static std::uint64_t mul(std::uint64_t a, std::uint64_t b) {
    std::uint64_t r;
    if (__builtin_mul_overflow(a, b, &r)) throw RationalOverflow();
    return r;
  }
  static std::uint64_t add(std::uint64_t a, std::uint64_t b) {
    std::uint64_t r;
    if (__builtin_add_overflow(a, b, &r)) throw RationalOverflow();
    return r;
  }
  constexpr void reduce() {
    const std::uint64_t g = std::gcd(num_, den_);
    if (g > 1) {
      num_ /= g;
      den_ /= g;
    }
  }
  std::uint64_t num_ = 0;
  std::uint64_t den_ = 1;
};

namespace detail {

inline bool matches(const Ball& b, const std::vector<AttributeTest>& tests) {
  for (const auto& t : tests) {
    auto it = b.attributes.find(t.attribute);
    if (it == b.attributes.end() || it->second != t.value) return false;
  }
  return true;
}

inline bool any_ball_has(const BallsProcessSpec& spec, const std::string& attr) {
  for (const auto& b : spec.universe) {
    if (b.attributes.contains(attr)) return true;
  }
  return false;
}

inline const std::string& attribute_of(const BallsProcessSpec& spec, const Ball& b,
                                       const std::string& attr, std::size_t stage) {
  auto it = b.attributes.find(attr);
  if (it == b.attributes.end()) {
    throw Error(ErrorKind::UnknownAttribute, spec.context.id() + ": ball '" + b.id +
                                                 "' has no attribute '" + attr +
                                                 "' (stage " + std::to_string(stage) + ")",
                stage);
  }
  return it->second;
}

/// Observed values of one attribute in universe order of first appearance.
inline std::vector<std::string> attribute_values(const BallsProcessSpec& spec,
                                                 const std::string& attr) {
  std::vector<std::string> values;
  for (const auto& b : spec.universe) {
    auto it = b.attributes.find(attr);
    if (it != b.attributes.end() &&
        std::find(values.begin(), values.end(), it->second) == values.end()) {
      values.push_back(it->second);
    }
  }
  return values;
}

inline void require_balls(const BallsProcessSpec& spec) {
  const auto& id = spec.context.id();
  if (spec.universe.empty()) throw Error(ErrorKind::InvalidSpec, id + ": no balls");
  if (spec.stages.empty()) throw Error(ErrorKind::InvalidSpec, id + ": at least one stage is required");
  if (std::pow(static_cast<double>(spec.universe.size()), static_cast<double>(spec.stages.size())) >
      kMaxDrawSequences) {
    throw Error(ErrorKind::InvalidSpec, id + ": too many balls and stages to enumerate");
  }
  std::set<std::string> ids;
  for (const auto& b : spec.universe) {
    if (!ids.insert(b.id).second) throw Error(ErrorKind::InvalidSpec, id + ": ball id '" + b.id + "' repeated");
  }
  for (const auto& t : spec.init_filter) {
    if (!any_ball_has(spec, t.attribute)) {
      throw Error(ErrorKind::UnknownAttribute, id + ": no ball has attribute '" + t.attribute + "'");
    }
  }
  std::set<std::string> labels;
  for (const auto& st : spec.stages) {
    if (st.label.empty()) throw Error(ErrorKind::InvalidSpec, id + ": empty stage label");
    if (!labels.insert(st.label).second) {
      throw Error(ErrorKind::InvalidSpec, id + ": stage label '" + st.label + "' repeated");
    }
    if (!any_ball_has(spec, st.observe)) {
      throw Error(ErrorKind::UnknownAttribute, id + ": no ball has attribute '" + st.observe + "'");
    }
    if (st.refill.kind == RefillKind::ByOutcome && !any_ball_has(spec, st.refill.attribute)) {
      throw Error(ErrorKind::UnknownAttribute,
                  id + ": no ball has attribute '" + st.refill.attribute + "'");
    }
  }
}

inline std::vector<std::size_t> initial_box(const BallsProcessSpec& spec) {
  std::vector<std::size_t> box;
  for (std::size_t i = 0; i < spec.universe.size(); ++i) {
    if (matches(spec.universe[i], spec.init_filter)) box.push_back(i);
  }
  return box;
}

/// Box after drawing `drawn` at stage `k`.
inline std::vector<std::size_t> refill_box(const BallsProcessSpec& spec, std::size_t k,
                                           const std::vector<std::size_t>& box, std::size_t drawn) {
  const auto& refill = spec.stages[k].refill;
  switch (refill.kind) {
    case RefillKind::None:
      return box;
    case RefillKind::RemoveDrawn: {
      std::vector<std::size_t> out;
      bool removed = false;
      for (auto b : box) {
        if (!removed && b == drawn) {
          removed = true;
          continue;
        }
        out.push_back(b);
      }
      return out;
    }
    case RefillKind::ByOutcome: {
      const auto& value = attribute_of(spec, spec.universe[drawn], refill.attribute, k);
      std::vector<std::size_t> out;
      for (std::size_t i = 0; i < spec.universe.size(); ++i) {
        auto it = spec.universe[i].attributes.find(refill.attribute);
        if (it != spec.universe[i].attributes.end() && it->second == value) out.push_back(i);
      }
      return out;
    }
  }
  return box;
}

inline void require_box(const BallsProcessSpec& spec, const std::vector<std::size_t>& box,
                        std::size_t stage) {
  if (box.empty()) {
    throw Error(ErrorKind::EmptyBoxReached,
                spec.context.id() + ": box is empty before stage " + std::to_string(stage) + " ('" +
                    spec.stages[stage].label + "')",
                stage);
  }
}

}  // namespace detail

inline std::vector<AlternativeSet> balls_stage_sets(const BallsProcessSpec& spec) {
  std::vector<AlternativeSet> sets;
  for (const auto& st : spec.stages) {
    sets.emplace_back(st.label, detail::attribute_values(spec, st.observe));
  }
  return sets;
}

namespace detail {

// Enumerates every draw sequence; draws are uniform over the current box.
// `Num` is Rational for exact arithmetic or double as a fallback.
template <class Num>
std::vector<Num> enumerate_draws(const BallsProcessSpec& spec,
                                 const std::vector<AlternativeSet>& sets) {
  std::size_t cells = 1;
  for (const auto& s : sets) cells *= s.size();
  std::vector<Num> probs(cells, Num{});

  struct Walk {
    const BallsProcessSpec& spec;
    const std::vector<AlternativeSet>& sets;
    std::vector<Num>& probs;
    void operator()(std::size_t k, const std::vector<std::size_t>& box, Num weight,
                    std::size_t cell) const {
      if (k == spec.stages.size()) {
        probs[cell] = probs[cell] + weight;
        return;
      }
      require_box(spec, box, k);
      Num each;
      if constexpr (std::is_same_v<Num, Rational>) {
        each = weight * Rational(1, box.size());
      } else {
        each = weight / static_cast<double>(box.size());
      }
      for (auto drawn : box) {
        const auto& value = attribute_of(spec, spec.universe[drawn], spec.stages[k].observe, k);
        const std::size_t next_cell = cell * sets[k].size() + sets[k].require_index(value);
        if (k + 1 == spec.stages.size()) {
          (*this)(k + 1, box, each, next_cell);
        } else {
          (*this)(k + 1, refill_box(spec, k, box, drawn), each, next_cell);
        }
      }
    }
  };
  Num one;
  if constexpr (std::is_same_v<Num, Rational>) {
    one = Rational(1, 1);
  } else {
    one = 1.0;
  }
  Walk{spec, sets, probs}(0, initial_box(spec), one, 0);
  return probs;
}

}  // namespace detail

/// Exact joint as fractions. Throws RationalOverflow if the denominators
/// outgrow 64 bits.
inline std::vector<Rational> balls_joint_exact(const BallsProcessSpec& spec) {
  detail::require_balls(spec);
  return detail::enumerate_draws<Rational>(spec, balls_stage_sets(spec));
}

/// Joint of a ball process; exact fractions rendered as doubles whenever
/// they fit in 64 bits.
inline JointDistribution balls_joint(const BallsProcessSpec& spec) {
  detail::require_balls(spec);
  auto sets = balls_stage_sets(spec);
  std::vector<double> probs;
  try {
    const auto exact = detail::enumerate_draws<Rational>(spec, sets);
    probs.reserve(exact.size());
    for (const auto& r : exact) probs.push_back(r.to_double());
  } catch (const RationalOverflow&) {
    probs = detail::enumerate_draws<double>(spec, sets);
  }
  return JointDistribution(std::move(sets), spec.context, std::move(probs));
}

inline JointDistribution joint_of(const ExperimentSpec& spec) {
  return std::visit(
      [](const auto& s) -> JointDistribution {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, PhotonChainSpec>) return photon_joint(s);
        else if constexpr (std::is_same_v<T, SpinChainSpec>) return spin_joint(s);
        else return balls_joint(s);
      },
      spec);
}

/// Throws the generator's error if the spec cannot produce a joint.
inline void validate_spec(const ExperimentSpec& spec) { (void)joint_of(spec); }

// ---------------------------------------------------------------------------
// Builtin arrangements

inline constexpr Angle kDefaultAlpha = Angle::degrees(45.0);

struct NamedSpec {
  std::string name;
  ExperimentSpec spec;
};

namespace detail {

inline Ball ball(std::string id, std::map<std::string, std::string> attrs) {
  return {std::move(id), std::move(attrs)};
}

inline std::vector<Ball> four_ball_universe() {
  return {ball("bp1", {{"colour", "black"}, {"composition", "plastic"}}),
          ball("bp2", {{"colour", "black"}, {"composition", "plastic"}}),
          ball("wp", {{"colour", "white"}, {"composition", "plastic"}}),
          ball("ww", {{"colour", "white"}, {"composition", "wood"}})};
}

inline std::vector<Ball> sized_ball_universe() {
  return {ball("big_bp", {{"colour", "black"}, {"composition", "plastic"}, {"size", "big"}}),
          ball("small_bp", {{"colour", "black"}, {"composition", "plastic"}, {"size", "small"}}),
          ball("small_wp", {{"colour", "white"}, {"composition", "plastic"}, {"size", "small"}}),
          ball("small_ww", {{"colour", "white"}, {"composition", "wood"}, {"size", "small"}})};
}

inline BallStage observe(std::string label, std::string attr, Refill refill = {}) {
  return {std::move(label), std::move(attr), std::move(refill)};
}

inline Refill by(std::string attr) { return {RefillKind::ByOutcome, std::move(attr)}; }

}  // namespace detail

/// The eleven arrangements: photon chains l_one and l_two, spin chains m,
/// m_inv, q and q_inv (parameterised by α, the angle between the first
/// device's axis a and z), ball processes n, n_inv, k, k_inv, and the urn
/// l_u. In the spin chains the second device is along x (90° from z); in
/// q and q_inv the particle starts along the bisector of a and x.
inline std::vector<NamedSpec> builtin_contexts(Angle alpha = kDefaultAlpha) {
  using detail::by;
  using detail::observe;
  const Angle x_axis = Angle::degrees(90.0);
  const Angle bisector = Angle::degrees(45.0 + alpha.deg() / 2.0);
  std::vector<NamedSpec> out;
  out.push_back({"l_one", PhotonChainSpec{Context("l_one", "vertical photon, horizontal filter only"),
                                          Angle::degrees(90.0),
                                          {{"B", Angle::degrees(0.0)}}}});
  out.push_back({"l_two", PhotonChainSpec{Context("l_two", "vertical photon, diagonal filter then horizontal filter"),
                                          Angle::degrees(90.0),
                                          {{"A", Angle::degrees(45.0)}, {"B", Angle::degrees(0.0)}}}});
  out.push_back({"m", SpinChainSpec{Context("m", "spin up along z, Stern-Gerlach along a then along x"),
                                    Angle::degrees(0.0),
                                    {{"A", alpha}, {"B", x_axis}}}});
  out.push_back({"m_inv", SpinChainSpec{Context("m_inv", "spin up along z, Stern-Gerlach along x then along a"),
                                        Angle::degrees(0.0),
                                        {{"B", x_axis}, {"A", alpha}}}});
  out.push_back({"n", BallsProcessSpec{Context("n", "four balls; colour first, refill by colour, then composition"),
                                       detail::four_ball_universe(),
                                       {},
                                       {observe("A", "colour", by("colour")), observe("B", "composition")}}});
  out.push_back({"n_inv", BallsProcessSpec{Context("n_inv", "four balls; composition first, refill by composition, then colour"),
                                           detail::four_ball_universe(),
                                           {},
                                           {observe("B", "composition", by("composition")), observe("A", "colour")}}});
  out.push_back({"k", BallsProcessSpec{Context("k", "small balls only; colour first, refill with all balls of that colour, then composition"),
                                       detail::sized_ball_universe(),
                                       {{"size", "small"}},
                                       {observe("A", "colour", by("colour")), observe("B", "composition")}}});
  out.push_back({"k_inv", BallsProcessSpec{Context("k_inv", "small balls only; composition first, refill with all balls of that composition, then colour"),
                                           detail::sized_ball_universe(),
                                           {{"size", "small"}},
                                           {observe("B", "composition", by("composition")), observe("A", "colour")}}});
  out.push_back({"q", SpinChainSpec{Context("q", "spin up along the bisector of a and x, Stern-Gerlach along a then along x"),
                                    bisector,
                                    {{"A", alpha}, {"B", x_axis}}}});
  out.push_back({"q_inv", SpinChainSpec{Context("q_inv", "spin up along the bisector of a and x, Stern-Gerlach along x then along a"),
                                        bisector,
                                        {{"B", x_axis}, {"A", alpha}}}});
  out.push_back({"l_u", BallsProcessSpec{Context("l_u", "urn with a red, a green and a yellow ball; two draws without replacement"),
                                         {detail::ball("r", {{"colour", "red"}}),
                                          detail::ball("g", {{"colour", "green"}}),
                                          detail::ball("y", {{"colour", "yellow"}})},
                                         {},
                                         {observe("A", "colour", {RefillKind::RemoveDrawn, {}}),
                                          observe("B", "colour")}}});
  return out;
}

inline std::optional<ExperimentSpec> find_builtin(std::string_view name, Angle alpha = kDefaultAlpha) {
  for (auto& named : builtin_contexts(alpha)) {
    if (named.name == name) return std::move(named.spec);
  }
  return std::nullopt;
}

/// Builtins whose geometry depends on α.
inline bool is_alpha_parameterized(std::string_view name) {
  return name == "m" || name == "m_inv" || name == "q" || name == "q_inv";
}

}  // namespace ctxent
