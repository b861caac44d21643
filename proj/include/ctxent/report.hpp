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

// Report values and their JSON and text forms.
//
// JSON layout:
//   { "version", "units",
//     "contexts":    [ {id, description, model, alpha_deg?, probabilities, entropies, properties} ],
//     "comparisons": [ {a, b, quantity, values, banner} ],
//     "samples":     [ ... ]       (sample command only)
//     "suite":       { ... } }     (paper-suite only)
// Every number sits inside an object naming its context, and every
// comparison between two contexts carries the cross-context banner.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

#include "ctxent/entropy.hpp"
#include "ctxent/models.hpp"
#include "ctxent/montecarlo.hpp"

namespace ctxent::report {

inline constexpr std::string_view kVersion = "0.1.0";

using nlohmann::json;

struct ContextBlock {
  std::string id;
  std::string description;
  std::string model;
  std::optional<double> alpha_deg;
  std::vector<AlternativeSet> stages;
  std::vector<double> joint;                  // row-major over stages
  std::vector<std::vector<double>> marginals;  // one per stage
  EntropyReport entropies;
  PropertyReport properties;

  friend bool operator==(const ContextBlock&, const ContextBlock&) = default;
};

struct SampleBlock {
  std::uint64_t seed = 0;
  std::uint32_t shards = 1;
  mc::Comparison comparison;

  friend bool operator==(const SampleBlock& a, const SampleBlock& b) {
    if (a.seed != b.seed || a.shards != b.shards) return false;
    const auto& x = a.comparison;
    const auto& y = b.comparison;
    if (x.context_id != y.context_id || x.n != y.n || x.cells.size() != y.cells.size()) return false;
    for (std::size_t i = 0; i < x.cells.size(); ++i) {
      const auto& c = x.cells[i];
      const auto& d = y.cells[i];
      if (c.index != d.index || c.outcomes != d.outcomes || c.count != d.count ||
          c.empirical != d.empirical || c.analytic != d.analytic ||
          c.standard_error != d.standard_error || c.bound != d.bound || c.pass != d.pass) {
        return false;
      }
    }
    return true;
  }
};

enum class RowKind {
  Quote,     // two-decimal quote, ±0.005
  Exact,     // exact value, ±1e-12
  Zero,      // must be exactly 0
  Holds,     // a property check must hold
  Relation,  // cross-context relation between two values
};

inline constexpr std::string_view to_string(RowKind k) {
  switch (k) {
    case RowKind::Quote: return "quote";
    case RowKind::Exact: return "exact";
    case RowKind::Zero: return "zero";
    case RowKind::Holds: return "holds";
    case RowKind::Relation: return "relation";
  }
  return "unknown";
}

inline RowKind row_kind_from(std::string_view s) {
  for (auto k : {RowKind::Quote, RowKind::Exact, RowKind::Zero, RowKind::Holds, RowKind::Relation}) {
    if (to_string(k) == s) return k;
  }
  throw Error(ErrorKind::InvalidConfig, "unknown row kind '" + std::string(s) + "'");
}

struct SuiteRow {
  std::string name;                   // stable row id, e.g. "l_two/H(B)"
  std::vector<std::string> contexts;  // one id, or two for cross-context rows
  std::string quantity;               // written out with its context(s)
  RowKind kind = RowKind::Quote;
  std::string expected;               // "0.81", "1/4", "holds", "<", ...
  double expected_value = 0.0;
  double tolerance = 0.0;
  double actual = 0.0;
  std::optional<double> actual_other;  // second value of a relation row
  std::string observed;
  bool pass = false;
  std::string banner;  // set on cross-context rows

  friend bool operator==(const SuiteRow&, const SuiteRow&) = default;
};

struct SuiteBlock {
  double alpha_deg = 45.0;
  std::vector<SuiteRow> rows;

  bool pass() const {
    return std::all_of(rows.begin(), rows.end(), [](const SuiteRow& r) { return r.pass; });
  }
  friend bool operator==(const SuiteBlock&, const SuiteBlock&) = default;
};

struct Report {
  std::string version{kVersion};
  Units units = Units::Bits;
  std::vector<ContextBlock> contexts;
  std::vector<CrossContextReport> comparisons;
  std::vector<SampleBlock> samples;
  std::optional<SuiteBlock> suite;

  friend bool operator==(const Report&, const Report&) = default;
};

inline ContextBlock context_block(const ExperimentSpec& spec, const EntropyConfig& cfg = {},
                                  std::optional<Angle> alpha = std::nullopt) {
  const auto joint = joint_of(spec);
  ContextBlock b;
  b.id = joint.context().id();
  b.description = joint.context().description();
  b.model = std::string(model_name(spec));
  if (alpha) b.alpha_deg = alpha->deg();
  b.stages = joint.stages();
  b.joint.assign(joint.probs().begin(), joint.probs().end());
  for (std::size_t k = 0; k < joint.stage_count(); ++k) {
    const auto m = marginal(joint, k);
    b.marginals.emplace_back(m.probs().begin(), m.probs().end());
  }
  b.entropies = entropy_report(joint, cfg);
  b.properties = property_report(joint, cfg);
  return b;
}

// ---------------------------------------------------------------------------
// JSON

inline Units units_from(std::string_view s) {
  if (s == "bit" || s == "bits") return Units::Bits;
  if (s == "nat" || s == "nats") return Units::Nats;
  throw Error(ErrorKind::InvalidConfig, "unknown units '" + std::string(s) + "' (expected bits or nats)");
}

inline std::string units_plural(Units u) { return u == Units::Bits ? "bits" : "nats"; }

namespace detail {

inline std::vector<std::string> outcome_labels(const std::vector<AlternativeSet>& stages, std::size_t flat) {
  std::vector<std::string> out(stages.size());
  for (std::size_t k = stages.size(); k-- > 0;) {
    out[k] = stages[k].outcomes()[flat % stages[k].size()];
    flat /= stages[k].size();
  }
  return out;
}

inline std::string stage_names(const std::vector<AlternativeSet>& stages) {
  std::string s;
  for (const auto& st : stages) {
    if (!s.empty()) s += "∧";
    s += st.name();
  }
  return s;
}

}  // namespace detail

inline json to_json(const ContextBlock& b) {
  json stages = json::array();
  for (const auto& s : b.stages) stages.push_back({{"name", s.name()}, {"outcomes", s.outcomes()}});
  json cells = json::array();
  for (std::size_t i = 0; i < b.joint.size(); ++i) {
    cells.push_back({{"outcome", detail::outcome_labels(b.stages, i)}, {"p", b.joint[i]}});
  }
  json marginals = json::array();
  for (std::size_t k = 0; k < b.marginals.size(); ++k) {
    json m = json::object();
    m["set"] = b.stages[k].name();
    m["probs"] = b.marginals[k];
    marginals.push_back(std::move(m));
  }

  const auto& e = b.entropies;
  json sets = json::array();
  for (const auto& s : e.sets) {
    sets.push_back({{"set", s.set}, {"expr", entropy_expr(s.set, "", b.id)}, {"value", s.value}});
  }
  json conditionals = json::array();
  for (const auto& c : e.conditionals) {
    conditionals.push_back({{"target", c.target},
                            {"given", c.given},
                            {"expr", entropy_expr(c.target, c.given, b.id)},
                            {"value", c.value}});
  }
  json entropies = {{"context", e.context_id},
                    {"units", units_plural(e.units)},
                    {"sets", sets},
                    {"conditionals", conditionals},
                    {"joint", {{"expr", entropy_expr(detail::stage_names(b.stages), "", b.id)}, {"value", e.joint}}}};

  const auto& p = b.properties;
  json concavity = json::array();
  for (const auto& c : p.concavity) {
    concavity.push_back({{"target", c.target},
                         {"given", c.given},
                         {"h_target", c.h_target},
                         {"h_conditional", c.h_conditional},
                         {"difference", c.difference},
                         {"holds", c.holds}});
  }
  json terms = json::array();
  for (const auto& t : p.strong_additivity.terms) {
    terms.push_back({{"first", t.first},
                     {"h_first", t.h_first},
                     {"h_rest_given_first", t.h_rest_given_first},
                     {"sum", t.sum}});
  }
  json properties = {{"context", p.context_id},
                     {"tolerance", p.tolerance},
                     {"concavity", concavity},
                     {"strong_additivity",
                      {{"h_joint", p.strong_additivity.h_joint},
                       {"terms", terms},
                       {"max_residual", p.strong_additivity.max_residual},
                       {"holds", p.strong_additivity.holds}}},
                     {"holds", p.holds()}};

  json out = {{"id", b.id},
              {"description", b.description},
              {"model", b.model},
              {"probabilities", {{"context", b.id}, {"stages", stages}, {"cells", cells}, {"marginals", marginals}}},
              {"entropies", entropies},
              {"properties", properties}};
  if (b.alpha_deg) out["alpha_deg"] = *b.alpha_deg;
  return out;
}

inline ContextBlock context_block_from(const json& j) {
  ContextBlock b;
  b.id = j.at("id").get<std::string>();
  b.description = j.at("description").get<std::string>();
  b.model = j.at("model").get<std::string>();
  if (j.contains("alpha_deg")) b.alpha_deg = j.at("alpha_deg").get<double>();
  const auto& probs = j.at("probabilities");
  for (const auto& s : probs.at("stages")) {
    b.stages.emplace_back(s.at("name").get<std::string>(), s.at("outcomes").get<std::vector<std::string>>());
  }
  for (const auto& c : probs.at("cells")) b.joint.push_back(c.at("p").get<double>());
  for (const auto& m : probs.at("marginals")) b.marginals.push_back(m.at("probs").get<std::vector<double>>());

  const auto& e = j.at("entropies");
  b.entropies.context_id = e.at("context").get<std::string>();
  b.entropies.units = units_from(e.at("units").get<std::string>());
  for (const auto& s : e.at("sets")) b.entropies.sets.push_back({s.at("set"), s.at("value")});
  for (const auto& c : e.at("conditionals")) {
    b.entropies.conditionals.push_back({c.at("target"), c.at("given"), c.at("value")});
  }
  b.entropies.joint = e.at("joint").at("value").get<double>();

  const auto& p = j.at("properties");
  b.properties.context_id = p.at("context").get<std::string>();
  b.properties.tolerance = p.at("tolerance").get<double>();
  for (const auto& c : p.at("concavity")) {
    b.properties.concavity.push_back({c.at("target"), c.at("given"), c.at("h_target"), c.at("h_conditional"),
                                      c.at("difference"), c.at("holds")});
  }
  const auto& sa = p.at("strong_additivity");
  b.properties.strong_additivity.h_joint = sa.at("h_joint").get<double>();
  for (const auto& t : sa.at("terms")) {
    b.properties.strong_additivity.terms.push_back({t.at("first"), t.at("h_first"), t.at("h_rest_given_first"), t.at("sum")});
  }
  b.properties.strong_additivity.max_residual = sa.at("max_residual").get<double>();
  b.properties.strong_additivity.holds = sa.at("holds").get<bool>();
  return b;
}

/// Cross-context reports are flattened to one comparison object per
/// quantity, each carrying both ids and the banner.
inline json comparisons_to_json(const std::vector<CrossContextReport>& reports) {
  json out = json::array();
  for (const auto& r : reports) {
    for (const auto& e : r.entries) {
      out.push_back({{"a", r.context_a},
                     {"b", r.context_b},
                     {"quantity", e.quantity},
                     {"values",
                      {{"a", {{"expr", e.expr_a}, {"value", e.value_a}}},
                       {"b", {{"expr", e.expr_b}, {"value", e.value_b}}},
                       {"difference", e.difference}}},
                     {"banner", r.banner}});
    }
  }
  return out;
}

inline std::vector<CrossContextReport> comparisons_from_json(const json& arr, Units units) {
  std::vector<CrossContextReport> out;
  for (const auto& c : arr) {
    const auto a = c.at("a").get<std::string>();
    const auto b = c.at("b").get<std::string>();
    if (out.empty() || out.back().context_a != a || out.back().context_b != b) {
      CrossContextReport r;
      r.context_a = a;
      r.context_b = b;
      r.units = units;
      r.banner = c.at("banner").get<std::string>();
      out.push_back(std::move(r));
    }
    const auto& v = c.at("values");
    out.back().entries.push_back({c.at("quantity"), v.at("a").at("expr"), v.at("a").at("value"),
                                  v.at("b").at("expr"), v.at("b").at("value"), v.at("difference")});
  }
  return out;
}

inline json to_json(const SampleBlock& s) {
  json cells = json::array();
  for (const auto& c : s.comparison.cells) {
    cells.push_back({{"index", c.index},
                     {"outcome", c.outcomes},
                     {"count", c.count},
                     {"empirical", c.empirical},
                     {"analytic", c.analytic},
                     {"standard_error", c.standard_error},
                     {"bound", c.bound},
                     {"pass", c.pass}});
  }
  return {{"context", s.comparison.context_id},
          {"n", s.comparison.n},
          {"seed", s.seed},
          {"shards", s.shards},
          {"rule", "|p_hat - p| <= max(4*SE, 10/n)"},
          {"cells", cells},
          {"pass", s.comparison.pass()}};
}

inline SampleBlock sample_block_from(const json& j) {
  SampleBlock s;
  s.seed = j.at("seed").get<std::uint64_t>();
  s.shards = j.at("shards").get<std::uint32_t>();
  s.comparison.context_id = j.at("context").get<std::string>();
  s.comparison.n = j.at("n").get<std::uint64_t>();
  for (const auto& c : j.at("cells")) {
    mc::CellVerdict v;
    v.index = c.at("index").get<std::size_t>();
    v.outcomes = c.at("outcome").get<std::vector<std::string>>();
    v.count = c.at("count").get<std::uint64_t>();
    v.empirical = c.at("empirical").get<double>();
    v.analytic = c.at("analytic").get<double>();
    v.standard_error = c.at("standard_error").get<double>();
    v.bound = c.at("bound").get<double>();
    v.pass = c.at("pass").get<bool>();
    s.comparison.cells.push_back(std::move(v));
  }
  return s;
}

inline json to_json(const SuiteRow& r) {
  json out = {{"name", r.name},
              {"contexts", r.contexts},
              {"quantity", r.quantity},
              {"kind", to_string(r.kind)},
              {"expected", r.expected},
              {"expected_value", r.expected_value},
              {"tolerance", r.tolerance},
              {"actual", r.actual},
              {"observed", r.observed},
              {"pass", r.pass}};
  if (r.actual_other) out["actual_other"] = *r.actual_other;
  if (!r.banner.empty()) out["banner"] = r.banner;
  return out;
}

inline SuiteRow suite_row_from(const json& j) {
  SuiteRow r;
  r.name = j.at("name").get<std::string>();
  r.contexts = j.at("contexts").get<std::vector<std::string>>();
  r.quantity = j.at("quantity").get<std::string>();
  r.kind = row_kind_from(j.at("kind").get<std::string>());
  r.expected = j.at("expected").get<std::string>();
  r.expected_value = j.at("expected_value").get<double>();
  r.tolerance = j.at("tolerance").get<double>();
  r.actual = j.at("actual").get<double>();
  if (j.contains("actual_other")) r.actual_other = j.at("actual_other").get<double>();
  r.observed = j.at("observed").get<std::string>();
  r.pass = j.at("pass").get<bool>();
  if (j.contains("banner")) r.banner = j.at("banner").get<std::string>();
  return r;
}

inline json to_json(const Report& r) {
  json contexts = json::array();
  for (const auto& c : r.contexts) contexts.push_back(to_json(c));
  json out = {{"version", r.version},
              {"units", units_plural(r.units)},
              {"contexts", contexts},
              {"comparisons", comparisons_to_json(r.comparisons)}};
  if (!r.samples.empty()) {
    json samples = json::array();
    for (const auto& s : r.samples) samples.push_back(to_json(s));
    out["samples"] = samples;
  }
  if (r.suite) {
    json rows = json::array();
    for (const auto& row : r.suite->rows) rows.push_back(to_json(row));
    out["suite"] = {{"alpha_deg", r.suite->alpha_deg}, {"rows", rows}, {"pass", r.suite->pass()}};
  }
  return out;
}

inline Report report_from_json(const json& j) {
  Report r;
  r.version = j.at("version").get<std::string>();
  r.units = units_from(j.at("units").get<std::string>());
  for (const auto& c : j.at("contexts")) r.contexts.push_back(context_block_from(c));
  r.comparisons = comparisons_from_json(j.at("comparisons"), r.units);
  if (j.contains("samples")) {
    for (const auto& s : j.at("samples")) r.samples.push_back(sample_block_from(s));
  }
  if (j.contains("suite")) {
    SuiteBlock s;
    s.alpha_deg = j.at("suite").at("alpha_deg").get<double>();
    for (const auto& row : j.at("suite").at("rows")) s.rows.push_back(suite_row_from(row));
    r.suite = std::move(s);
  }
  return r;
}

// ---------------------------------------------------------------------------
// Text

/// Fixed six-decimal rendering without a negative zero.
inline std::string fixed6(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6f", v);
  std::string s(buf);
  if (s == "-0.000000") s = "0.000000";
  return s;
}

inline std::string signed6(double v) {
  const auto s = fixed6(v);
  return s[0] == '-' ? s : "+" + s;
}

inline std::string scientific(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.1e", v);
  return buf;
}

namespace detail {

inline std::string cell_prob(const std::vector<AlternativeSet>& stages, const std::vector<std::string>& outcome,
                             const std::string& ctx) {
  std::string s = "P(";
  for (std::size_t k = 0; k < stages.size(); ++k) {
    if (k) s += "∧";
    s += stages[k].name() + "=" + outcome[k];
  }
  return s + "|" + ctx + ")";
}

}  // namespace detail

inline void write_text(std::ostream& os, const ContextBlock& b, Units units) {
  const std::string u = std::string(to_string(units));
  os << "context " << b.id;
  if (!b.description.empty()) os << ": " << b.description;
  os << "\n";
  os << "  model " << b.model;
  if (b.alpha_deg) os << ", alpha = " << fixed6(*b.alpha_deg) << " deg";
  os << "\n";
  os << "probabilities\n";
  for (std::size_t i = 0; i < b.joint.size(); ++i) {
    os << "  " << detail::cell_prob(b.stages, detail::outcome_labels(b.stages, i), b.id) << " = "
       << fixed6(b.joint[i]) << "\n";
  }
  if (b.stages.size() > 1) {
    for (std::size_t k = 0; k < b.stages.size(); ++k) {
      for (std::size_t o = 0; o < b.stages[k].size(); ++o) {
        os << "  P(" << b.stages[k].name() << "=" << b.stages[k].outcomes()[o] << "|" << b.id
           << ") = " << fixed6(b.marginals[k][o]) << "\n";
      }
    }
  }
  os << "entropies (" << u << ")\n";
  for (const auto& s : b.entropies.sets) {
    os << "  " << entropy_expr(s.set, "", b.id) << " = " << fixed6(s.value) << "\n";
  }
  for (const auto& c : b.entropies.conditionals) {
    os << "  " << entropy_expr(c.target, c.given, b.id) << " = " << fixed6(c.value) << "\n";
  }
  if (b.stages.size() > 1) {
    os << "  " << entropy_expr(detail::stage_names(b.stages), "", b.id) << " = " << fixed6(b.entropies.joint)
       << "\n";
  }
  const auto& p = b.properties;
  os << "properties in context " << b.id << " (tolerance " << scientific(p.tolerance) << ")\n";
  if (b.stages.size() < 2) {
    os << "  single set of alternatives; nothing to check\n";
    return;
  }
  for (const auto& c : p.concavity) {
    os << "  concavity: " << entropy_expr(c.target, "", b.id) << " - " << entropy_expr(c.target, c.given, b.id)
       << " = " << fixed6(c.difference) << " >= 0 " << (c.holds ? "holds" : "FAILS") << "\n";
  }
  const auto& sa = p.strong_additivity;
  os << "  strong additivity: " << entropy_expr(detail::stage_names(b.stages), "", b.id) << " = "
     << fixed6(sa.h_joint) << "\n";
  for (const auto& t : sa.terms) {
    std::string rest;
    for (const auto& s : b.stages) {
      if (s.name() == t.first) continue;
      if (!rest.empty()) rest += "∧";
      rest += s.name();
    }
    os << "    " << entropy_expr(t.first, "", b.id) << " + " << entropy_expr(rest, t.first, b.id) << " = "
       << fixed6(t.sum) << "\n";
  }
  os << "    max residual " << scientific(sa.max_residual) << " " << (sa.holds ? "holds" : "FAILS") << "\n";
}

inline void write_text(std::ostream& os, const CrossContextReport& r) {
  os << r.banner << "\n";
  os << "contexts " << r.context_a << " and " << r.context_b << " (" << to_string(r.units) << ")\n";
  for (const auto& e : r.entries) {
    os << "  " << e.expr_a << " = " << fixed6(e.value_a) << " vs " << e.expr_b << " = " << fixed6(e.value_b)
       << ", difference " << signed6(e.difference) << " [" << r.banner << "]\n";
  }
}

inline void write_text(std::ostream& os, const SampleBlock& s) {
  const auto& c = s.comparison;
  os << "samples of context " << c.context_id << ": n = " << c.n << ", seed = " << s.seed
     << ", shards = " << s.shards << "\n";
  os << "  rule |p_hat - p| <= max(4*SE, 10/n)\n";
  for (const auto& cell : c.cells) {
    std::string label;
    for (std::size_t k = 0; k < cell.outcomes.size(); ++k) {
      if (k) label += ",";
      label += cell.outcomes[k];
    }
    os << "  [" << label << "] count " << cell.count << ", p_hat " << fixed6(cell.empirical) << ", p "
       << fixed6(cell.analytic) << ", bound " << fixed6(cell.bound) << " " << (cell.pass ? "pass" : "FAIL")
       << "\n";
  }
  os << (c.pass() ? "all cells pass" : "statistical mismatch") << "\n";
}

/// Display width of UTF-8 text, counting code points.
inline std::size_t display_width(std::string_view s) {
  return static_cast<std::size_t>(
      std::count_if(s.begin(), s.end(), [](char c) { return (static_cast<unsigned char>(c) & 0xC0) != 0x80; }));
}

inline void write_text(std::ostream& os, const SuiteBlock& s) {
  os << "reference suite at alpha = " << fixed6(s.alpha_deg) << " deg (bit)\n";
  std::size_t width = 0;
  for (const auto& r : s.rows) width = std::max(width, display_width(r.name));
  std::size_t passed = 0;
  for (const auto& r : s.rows) {
    passed += r.pass;
    os << "  " << (r.pass ? "PASS " : "FAIL ") << r.name << std::string(width - display_width(r.name) + 2, ' ')
       << r.quantity << ": expected " << r.expected << ", observed " << r.observed;
    if (!r.banner.empty()) os << " [" << r.banner << "]";
    os << "\n";
  }
  os << passed << "/" << s.rows.size() << " rows pass\n";
}

inline void write_text(std::ostream& os, const Report& r) {
  bool first = true;
  auto sep = [&] {
    if (!first) os << "\n";
    first = false;
  };
  for (const auto& c : r.contexts) {
    sep();
    write_text(os, c, r.units);
  }
  for (const auto& c : r.comparisons) {
    sep();
    write_text(os, c);
  }
  for (const auto& s : r.samples) {
    sep();
    write_text(os, s);
  }
  if (r.suite) {
    sep();
    write_text(os, *r.suite);
  }
}

}  // namespace ctxent::report
