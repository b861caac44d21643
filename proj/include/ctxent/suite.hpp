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

// Reference table of published values for the builtin arrangements.
//
// Two-decimal quotes are checked to ±0.005 bit, exact values to ±1e-12
// and zeros exactly. Rows relating two contexts carry the cross-context
// banner and only state how the two numbers relate.

#pragma once

#include <functional>
#include <map>
#include <string>
#include <vector>

#include "ctxent/report.hpp"

namespace ctxent::suite {

inline constexpr double kQuoteTolerance = 0.005;
inline constexpr double kExactTolerance = 1e-12;

using report::RowKind;
using report::SuiteBlock;
using report::SuiteRow;

/// Arrangements keyed by builtin name; the defaults are the builtins at
/// α = 45°, and entries given here replace them.
using SpecOverrides = std::map<std::string, ExperimentSpec>;

inline std::map<std::string, ExperimentSpec> suite_specs(const SpecOverrides& overrides = {}) {
  std::map<std::string, ExperimentSpec> out;
  for (auto& named : builtin_contexts(kDefaultAlpha)) out.emplace(named.name, std::move(named.spec));
  for (const auto& [name, spec] : overrides) out.insert_or_assign(name, spec);
  return out;
}

namespace detail {

class Lookup {
 public:
  explicit Lookup(const std::map<std::string, ExperimentSpec>& specs) : specs_(specs) {}

  const JointDistribution& joint(const std::string& name) {
    auto it = joints_.find(name);
    if (it != joints_.end()) return it->second;
    auto spec = specs_.find(name);
    if (spec == specs_.end()) throw Error(ErrorKind::InvalidSpec, "no arrangement named '" + name + "'");
    return joints_.emplace(name, joint_of(spec->second)).first->second;
  }

  std::size_t stage(const std::string& name, const std::string& set) {
    const auto& j = joint(name);
    auto k = j.stage_index(set);
    if (!k) throw Error(ErrorKind::IndexOutOfRange, "context '" + name + "' has no set '" + set + "'");
    return *k;
  }

  double prob(const std::string& name, const std::string& set, const std::string& outcome) {
    return marginal(joint(name), stage(name, set)).prob(outcome);
  }

  /// P(set=outcome | given=value ∧ ctx).
  double prob_given(const std::string& name, const std::string& set, const std::string& outcome,
                    const std::string& given, const std::string& value) {
    const auto& j = joint(name);
    const auto pair = marginalize(j, {stage(name, given), stage(name, set)});
    return condition(pair, given, value).to_distribution().prob(outcome);
  }

  double prob_both(const std::string& name, const std::string& a, const std::string& va, const std::string& b,
                   const std::string& vb) {
    const auto& j = joint(name);
    const auto pair = marginalize(j, {stage(name, a), stage(name, b)});
    std::vector<std::size_t> idx(2);
    idx[*pair.stage_index(a)] = pair.stage(*pair.stage_index(a)).require_index(va);
    idx[*pair.stage_index(b)] = pair.stage(*pair.stage_index(b)).require_index(vb);
    return pair.cell(idx);
  }

  double h(const std::string& name, const std::string& set) {
    return entropy(marginal(joint(name), stage(name, set)));
  }

  double h_given(const std::string& name, const std::string& set, const std::string& given) {
    return conditional_entropy(joint(name), stage(name, set), stage(name, given));
  }

  double h_joint(const std::string& name) { return joint_entropy(joint(name)); }

 private:
  const std::map<std::string, ExperimentSpec>& specs_;
  std::map<std::string, JointDistribution> joints_;
};

class Builder {
 public:
  explicit Builder(Lookup& lookup) : lookup_(lookup) {}

  void quote(std::string name, std::string ctx, std::string quantity, double expected,
             const std::function<double(Lookup&)>& value) {
    numeric(std::move(name), {std::move(ctx)}, std::move(quantity), RowKind::Quote, two_decimals(expected),
            expected, kQuoteTolerance, value);
  }

  void exact(std::string name, std::string ctx, std::string quantity, std::string expected_text,
             double expected, const std::function<double(Lookup&)>& value) {
    numeric(std::move(name), {std::move(ctx)}, std::move(quantity), RowKind::Exact, std::move(expected_text),
            expected, kExactTolerance, value);
  }

  void zero(std::string name, std::string ctx, std::string quantity, const std::function<double(Lookup&)>& value) {
    numeric(std::move(name), {std::move(ctx)}, std::move(quantity), RowKind::Zero, "0", 0.0, 0.0, value);
  }

  /// Both property checks in one context.
  void holds(const std::string& ctx) {
    SuiteRow r = base(ctx + "/properties", {ctx}, "concavity and strong additivity in " + ctx, RowKind::Holds,
                      "holds", 0.0, kPropertyTolerance);
    guard(r, [&] {
      const auto p = property_report(lookup_.joint(ctx));
      if (p.context_id != ctx) throw Error(ErrorKind::ContextMismatch, "joint is tagged '" + p.context_id + "'");
      r.actual = p.strong_additivity.max_residual;
      double worst = p.concavity.empty() ? 0.0 : p.concavity.front().difference;
      for (const auto& c : p.concavity) worst = std::min(worst, c.difference);
      r.pass = p.holds();
      r.observed = std::string(r.pass ? "holds" : "fails") + " (additivity residual " +
                   report::scientific(r.actual) + ", least concavity gap " + report::fixed6(worst) + ")";
    });
  }

  /// Relation between one quantity in two contexts: "<", "=" or "!=".
  void relation(const std::string& a, const std::string& b, const std::string& quantity, const std::string& rel,
                const std::function<std::pair<double, double>(Lookup&)>& values) {
    SuiteRow r = base(a + "~" + b, {a, b}, quantity, RowKind::Relation, rel, 0.0,
                      rel == "!=" ? kQuoteTolerance : kExactTolerance);
    r.banner = std::string(kCrossContextBanner);
    guard(r, [&] {
      if (a == b) throw Error(ErrorKind::SameContext, "relation rows need two contexts");
      const auto [va, vb] = values(lookup_);
      r.actual = va;
      r.actual_other = vb;
      if (rel == "<") r.pass = va < vb;
      else if (rel == "=") r.pass = std::abs(va - vb) <= r.tolerance;
      else r.pass = std::abs(va - vb) > r.tolerance;
      r.observed = report::fixed6(va) + " (" + a + ") " + rel + " " + report::fixed6(vb) + " (" + b + ")" +
                   (r.pass ? "" : ", relation does not hold");
    });
  }

  std::vector<SuiteRow> take() { return std::move(rows_); }

 private:
  static std::string two_decimals(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.2f", v);
    return buf;
  }

  SuiteRow base(std::string name, std::vector<std::string> contexts, std::string quantity, RowKind kind,
                std::string expected, double expected_value, double tolerance) {
    SuiteRow r;
    r.name = std::move(name);
    r.contexts = std::move(contexts);
    r.quantity = std::move(quantity);
    r.kind = kind;
    r.expected = std::move(expected);
    r.expected_value = expected_value;
    r.tolerance = tolerance;
    return r;
  }

  template <class F>
  void guard(SuiteRow& r, F&& body) {
    try {
      body();
    } catch (const std::exception& e) {
      r.pass = false;
      r.observed = std::string("error: ") + e.what();
    }
    rows_.push_back(std::move(r));
  }

  void numeric(std::string name, std::vector<std::string> contexts, std::string quantity, RowKind kind,
               std::string expected_text, double expected, double tolerance,
               const std::function<double(Lookup&)>& value) {
    SuiteRow r = base(std::move(name), std::move(contexts), std::move(quantity), kind, std::move(expected_text),
                      expected, tolerance);
    guard(r, [&] {
      r.actual = value(lookup_);
      r.pass = kind == RowKind::Zero ? r.actual == 0.0 : std::abs(r.actual - expected) <= tolerance;
      r.observed = report::fixed6(r.actual);
    });
  }

  Lookup& lookup_;
  std::vector<SuiteRow> rows_;
};

}  // namespace detail

/// Evaluates every reference row against the given arrangements.
inline SuiteBlock paper_suite(const std::map<std::string, ExperimentSpec>& specs) {
  detail::Lookup look(specs);
  detail::Builder row(look);
  using L = detail::Lookup;
  const auto H = [](const char* t, const char* g, const char* c) { return entropy_expr(t, g, c); };

  // Photon chains.
  row.zero("l_one/H(B)", "l_one", H("B", "", "l_one"), [](L& l) { return l.h("l_one", "B"); });
  row.exact("l_two/P(B=out)", "l_two", "P(B=out|l_two)", "1/4", 0.25,
            [](L& l) { return l.prob("l_two", "B", "out"); });
  row.zero("l_two/P(B=out|A=not-out)", "l_two", "P(B=out|A=not-out∧l_two)",
           [](L& l) { return l.prob_given("l_two", "B", "out", "A", "not-out"); });
  row.quote("l_two/H(B)", "l_two", H("B", "", "l_two"), 0.81, [](L& l) { return l.h("l_two", "B"); });
  row.exact("l_two/H(B|A)", "l_two", H("B", "A", "l_two"), "0.5", 0.5,
            [](L& l) { return l.h_given("l_two", "B", "A"); });
  row.holds("l_two");
  row.relation("l_one", "l_two", H("B", "", "l_one") + " vs " + H("B", "A", "l_two"), "<", [](L& l) {
    return std::pair{l.h("l_one", "B"), l.h_given("l_two", "B", "A")};
  });

  // Spin chains.
  row.quote("m/H(A∧B)", "m", H("A∧B", "", "m"), 1.20, [](L& l) { return l.h_joint("m"); });
  row.holds("m");
  row.exact("m_inv/P(B=up)", "m_inv", "P(B=up|m_inv)", "1/2", 0.5,
            [](L& l) { return l.prob("m_inv", "B", "up"); });
  row.quote("m_inv/H(A∧B)", "m_inv", H("A∧B", "", "m_inv"), 1.60, [](L& l) { return l.h_joint("m_inv"); });
  row.holds("m_inv");
  row.relation("m", "m_inv", H("A∧B", "", "m") + " vs " + H("A∧B", "", "m_inv"), "!=",
               [](L& l) { return std::pair{l.h_joint("m"), l.h_joint("m_inv")}; });

  // Balls.
  row.exact("n/P(A=black)", "n", "P(A=black|n)", "1/2", 0.5, [](L& l) { return l.prob("n", "A", "black"); });
  row.exact("n/P(B=plastic|A=black)", "n", "P(B=plastic|A=black∧n)", "1", 1.0,
            [](L& l) { return l.prob_given("n", "B", "plastic", "A", "black"); });
  row.exact("n/H(A)", "n", H("A", "", "n"), "1", 1.0, [](L& l) { return l.h("n", "A"); });
  row.exact("n/H(B|A)", "n", H("B", "A", "n"), "0.5", 0.5, [](L& l) { return l.h_given("n", "B", "A"); });
  row.exact("n/H(A)+H(B|A)", "n", H("A", "", "n") + " + " + H("B", "A", "n"), "1.5", 1.5,
            [](L& l) { return l.h("n", "A") + l.h_given("n", "B", "A"); });
  row.holds("n");
  row.quote("n_inv/H(B)", "n_inv", H("B", "", "n_inv"), 0.81, [](L& l) { return l.h("n_inv", "B"); });
  row.quote("n_inv/H(A|B)", "n_inv", H("A", "B", "n_inv"), 0.69, [](L& l) { return l.h_given("n_inv", "A", "B"); });
  row.exact("n_inv/H(B)+H(A|B)", "n_inv", H("B", "", "n_inv") + " + " + H("A", "B", "n_inv"), "1.5", 1.5,
            [](L& l) { return l.h("n_inv", "B") + l.h_given("n_inv", "A", "B"); });
  row.holds("n_inv");
  row.relation("n", "n_inv", H("A∧B", "", "n") + " vs " + H("A∧B", "", "n_inv"), "=",
               [](L& l) { return std::pair{l.h_joint("n"), l.h_joint("n_inv")}; });

  row.exact("k/P(A=black)", "k", "P(A=black|k)", "1/3", 1.0 / 3.0, [](L& l) { return l.prob("k", "A", "black"); });
  row.quote("k/H(A)", "k", H("A", "", "k"), 0.92, [](L& l) { return l.h("k", "A"); });
  row.quote("k/H(B|A)", "k", H("B", "A", "k"), 0.67, [](L& l) { return l.h_given("k", "B", "A"); });
  row.quote("k/H(A∧B)", "k", H("A∧B", "", "k"), 1.58, [](L& l) { return l.h_joint("k"); });
  row.holds("k");
  row.quote("k_inv/H(B)", "k_inv", H("B", "", "k_inv"), 0.92, [](L& l) { return l.h("k_inv", "B"); });
  row.quote("k_inv/H(A|B)", "k_inv", H("A", "B", "k_inv"), 0.61, [](L& l) { return l.h_given("k_inv", "A", "B"); });
  row.quote("k_inv/H(A∧B)", "k_inv", H("A∧B", "", "k_inv"), 1.53, [](L& l) { return l.h_joint("k_inv"); });
  row.holds("k_inv");
  row.relation("k", "k_inv", H("A∧B", "", "k") + " vs " + H("A∧B", "", "k_inv"), "!=",
               [](L& l) { return std::pair{l.h_joint("k"), l.h_joint("k_inv")}; });

  // Spin chains starting on the bisector.
  row.quote("q/H(A∧B)", "q", H("A∧B", "", "q"), 0.83, [](L& l) { return l.h_joint("q"); });
  row.holds("q");
  row.quote("q_inv/H(A∧B)", "q_inv", H("A∧B", "", "q_inv"), 0.83, [](L& l) { return l.h_joint("q_inv"); });
  row.holds("q_inv");
  row.relation("q", "q_inv", H("A∧B", "", "q") + " vs " + H("A∧B", "", "q_inv"), "=",
               [](L& l) { return std::pair{l.h_joint("q"), l.h_joint("q_inv")}; });

  // Urn without replacement.
  row.exact("l_u/P(A=red∧B=green)", "l_u", "P(A=red∧B=green|l_u)", "1/6", 1.0 / 6.0,
            [](L& l) { return l.prob_both("l_u", "A", "red", "B", "green"); });
  row.exact("l_u/P(A=red|B=green)", "l_u", "P(A=red|B=green∧l_u)", "1/2", 0.5,
            [](L& l) { return l.prob_given("l_u", "A", "red", "B", "green"); });
  row.holds("l_u");

  SuiteBlock out;
  out.alpha_deg = kDefaultAlpha.deg();
  out.rows = row.take();
  return out;
}

/// The five pairs whose comparison the reference discusses.
inline const std::vector<std::pair<std::string, std::string>>& comparison_pairs() {
  static const std::vector<std::pair<std::string, std::string>> pairs{
      {"l_one", "l_two"}, {"m", "m_inv"}, {"n", "n_inv"}, {"k", "k_inv"}, {"q", "q_inv"}};
  return pairs;
}

/// Full report: one block per arrangement, the cross-context pairs and the
/// reference table.
inline report::Report paper_suite_report(const SpecOverrides& overrides = {}) {
  const auto specs = suite_specs(overrides);
  report::Report r;
  r.units = Units::Bits;
  std::map<std::string, JointDistribution> joints;
  for (const auto& named : builtin_contexts()) {
    const auto& spec = specs.at(named.name);
    std::optional<Angle> alpha;
    if (is_alpha_parameterized(named.name)) alpha = kDefaultAlpha;
    try {
      r.contexts.push_back(report::context_block(spec, {}, alpha));
      joints.emplace(named.name, joint_of(spec));
    } catch (const Error&) {
      // Reported through the failing table rows.
    }
  }
  for (const auto& [a, b] : comparison_pairs()) {
    auto ja = joints.find(a);
    auto jb = joints.find(b);
    if (ja == joints.end() || jb == joints.end()) continue;
    if (same_context(ja->second.context(), jb->second.context())) continue;
    r.comparisons.push_back(compare_across_contexts(ja->second, jb->second));
  }
  r.suite = paper_suite(specs);
  return r;
}

}  // namespace ctxent::suite
