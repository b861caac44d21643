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

// Command-line front end. Kept in a header so tests can drive it in-process.
//
//   ctxent run <file> [--units bits|nats] [--alpha <rad>] [--json]
//   ctxent compare <fileA> <fileB> [--units bits|nats] [--alpha <rad>] [--json]
//   ctxent sample <file> [--n N] [--seed S] [--shards K] [--threads T] [--alpha <rad>] [--json]
//   ctxent paper-suite [--json] [--builtins-dir DIR]
//
// Exit codes: 0 success, 1 input error, 2 expected-value or property
// mismatch, 3 statistical mismatch.

#pragma once

#include <CLI11.hpp>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "ctxent/dsl.hpp"
#include "ctxent/montecarlo.hpp"
#include "ctxent/report.hpp"
#include "ctxent/suite.hpp"

namespace ctxent::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitInput = 1;
inline constexpr int kExitMismatch = 2;
inline constexpr int kExitStatistical = 3;

inline constexpr const char* kUnitsEnv = "CTXENT_UNITS";

struct Io {
  std::ostream& out;
  std::ostream& err;
  /// Value of CTXENT_UNITS; nullopt when unset.
  std::optional<std::string> env_units;
};

namespace detail {

struct InputError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

inline Units resolve_units(const std::string& flag, const std::optional<std::string>& env) {
  try {
    if (!flag.empty()) return report::units_from(flag);
    if (env && !env->empty()) return report::units_from(*env);
  } catch (const Error& e) {
    throw InputError(std::string(flag.empty() ? kUnitsEnv : "--units") + ": " + e.what());
  }
  return Units::Bits;
}

inline ExperimentSpec load_spec(const std::string& path, std::ostream& err) {
  auto src = dsl::load(path);
  if (!src) throw InputError(path + ": cannot open file");
  auto result = dsl::parse(*src);
  for (const auto& d : result.diagnostics) err << dsl::format(d, path) << "\n";
  if (!result.ok()) throw InputError(path + ": " + std::to_string(result.diagnostics.size()) + " diagnostic(s)");
  return std::move(*result.spec);
}

/// Rebuilds an α-dependent builtin at the requested angle. Only files that
/// describe such a builtin at its default geometry are rewritten; anything
/// else keeps the angles written in the file.
inline std::optional<Angle> apply_alpha(ExperimentSpec& spec, std::optional<double> alpha_rad,
                                        const std::string& path, std::ostream& err) {
  if (!alpha_rad) return std::nullopt;
  if (!std::isfinite(*alpha_rad)) throw InputError("--alpha must be finite");
  const Context ctx = context_of(spec);
  if (!std::holds_alternative<SpinChainSpec>(spec)) {
    err << path << ": note: --alpha applies only to spin experiments; ignored\n";
    return std::nullopt;
  }
  if (is_alpha_parameterized(ctx.id())) {
    auto reference = *find_builtin(ctx.id(), kDefaultAlpha);
    std::get<SpinChainSpec>(reference).context = ctx;
    if (reference == spec) {
      const Angle alpha = Angle::radians(*alpha_rad);
      spec = *find_builtin(ctx.id(), alpha);
      std::get<SpinChainSpec>(spec).context = ctx;
      return alpha;
    }
  }
  err << path << ": note: --alpha ignored; this file fixes its own angles\n";
  return std::nullopt;
}

inline void emit(const report::Report& r, bool as_json, std::ostream& out) {
  if (as_json) {
    out << report::to_json(r).dump(2) << "\n";
  } else {
    report::write_text(out, r);
  }
}

}  // namespace detail

inline int main_with(std::vector<std::string> args, Io io) {
  CLI::App app{"Context-tagged probabilities and Shannon entropies of sequential experiments", "ctxent"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(report::kVersion));

  std::string file, file_b, units_flag, builtins_dir;
  std::optional<double> alpha;
  bool as_json = false;
  std::uint64_t n = 1'000'000, seed = 0;
  std::uint32_t shards = 8;
  unsigned threads = 0;

  auto add_units = [&](CLI::App* c) {
    c->add_option("--units", units_flag, "bits or nats (overrides " + std::string(kUnitsEnv) + ")")
        ->check(CLI::IsMember({"bits", "nats", "bit", "nat"}));
  };
  auto add_alpha = [&](CLI::App* c) {
    c->add_option("--alpha", alpha, "angle between the first device's axis and z, in radians");
  };

  auto* run = app.add_subcommand("run", "entropies and property checks for one experiment");
  run->add_option("file", file, "experiment file (.exp)")->required();
  add_units(run);
  add_alpha(run);
  run->add_flag("--json", as_json, "machine-readable output");

  auto* compare = app.add_subcommand("compare", "label-safe comparison of two different contexts");
  compare->add_option("file_a", file, "first experiment file")->required();
  compare->add_option("file_b", file_b, "second experiment file")->required();
  add_units(compare);
  add_alpha(compare);
  compare->add_flag("--json", as_json, "machine-readable output");

  auto* sample = app.add_subcommand("sample", "Monte Carlo check of the closed-form joint");
  sample->add_option("file", file, "experiment file (.exp)")->required();
  sample->add_option("--n", n, "number of samples")->check(CLI::Range(std::uint64_t{1}, std::uint64_t{1} << 40));
  sample->add_option("--seed", seed, "master seed");
  sample->add_option("--shards", shards, "independent random streams")->check(CLI::Range(1u, 4096u));
  sample->add_option("--threads", threads, "worker threads, 0 for all cores; never changes results");
  add_alpha(sample);
  sample->add_flag("--json", as_json, "machine-readable output");

  auto* suite = app.add_subcommand("paper-suite", "check every reference value of the builtin arrangements");
  suite->add_flag("--json", as_json, "machine-readable output");
  suite->add_option("--builtins-dir", builtins_dir, "read <name>.exp from this directory in place of builtins")
      ->check(CLI::ExistingDirectory);

  try {
    std::reverse(args.begin(), args.end());
    app.parse(args);
  } catch (const CLI::CallForHelp&) {
    io.out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    io.out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::CallForVersion&) {
    io.out << report::kVersion << "\n";
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    io.err << "error: " << e.what() << "\n";
    if (auto* sub = app.get_subcommands().empty() ? &app : app.get_subcommands().front()) {
      io.err << "usage: " << sub->help().substr(0, sub->help().find('\n')) << "\n";
    }
    return kExitInput;
  }

  try {
    if (run->parsed()) {
      const Units units = detail::resolve_units(units_flag, io.env_units);
      auto spec = detail::load_spec(file, io.err);
      const auto used_alpha = detail::apply_alpha(spec, alpha, file, io.err);
      report::Report r;
      r.units = units;
      r.contexts.push_back(report::context_block(spec, {units, 1.0}, used_alpha));
      detail::emit(r, as_json, io.out);
      return r.contexts.front().properties.holds() ? kExitOk : kExitMismatch;
    }
    if (compare->parsed()) {
      const Units units = detail::resolve_units(units_flag, io.env_units);
      auto a = detail::load_spec(file, io.err);
      auto b = detail::load_spec(file_b, io.err);
      detail::apply_alpha(a, alpha, file, io.err);
      detail::apply_alpha(b, alpha, file_b, io.err);
      report::Report r;
      r.units = units;
      r.comparisons.push_back(compare_across_contexts(joint_of(a), joint_of(b), {units, 1.0}));
      detail::emit(r, as_json, io.out);
      return kExitOk;
    }
    if (sample->parsed()) {
      auto spec = detail::load_spec(file, io.err);
      detail::apply_alpha(spec, alpha, file, io.err);
      const auto emp = mc::simulate({spec, n, seed, shards, threads});
      report::Report r;
      r.samples.push_back({seed, shards, mc::compare(emp, joint_of(spec))});
      detail::emit(r, as_json, io.out);
      return r.samples.front().comparison.pass() ? kExitOk : kExitStatistical;
    }
    if (suite->parsed()) {
      suite::SpecOverrides overrides;
      if (!builtins_dir.empty()) {
        for (const auto& named : builtin_contexts()) {
          const auto path = std::filesystem::path(builtins_dir) / (named.name + ".exp");
          if (std::filesystem::exists(path)) overrides.emplace(named.name, detail::load_spec(path.string(), io.err));
        }
      }
      const auto r = suite::paper_suite_report(overrides);
      detail::emit(r, as_json, io.out);
      if (r.suite->pass()) return kExitOk;
      for (const auto& row : r.suite->rows) {
        if (!row.pass) io.err << "failing row: " << row.name << ": " << row.observed << "\n";
      }
      return kExitMismatch;
    }
  } catch (const detail::InputError& e) {
    io.err << "error: " << e.what() << "\n";
    return kExitInput;
  } catch (const Error& e) {
    io.err << "error: " << e.what() << "\n";
    return kExitInput;
  }
  return kExitInput;
}

inline int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  std::optional<std::string> env;
  if (const char* v = std::getenv(kUnitsEnv)) env = v;
  return main_with(std::move(args), {std::cout, std::cerr, env});
}

}  // namespace ctxent::cli
