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

// Monte Carlo check of the closed-form joints.
//
// Each sample walks the sequential model step by step (collapse for photons
// and spins, draws and refills for balls); the analytic joint is never used
// to generate samples.
//
// Reproducibility contract:
//   * shard i draws from std::mt19937_64 seeded with mix(master_seed, i),
//     where mix is splitmix64 applied to master_seed + (i + 1) * 0x9E3779B97F4A7C15;
//   * shard i takes n / shards samples, plus one if i < n % shards;
//   * a uniform double is (x >> 11) * 2^-53 for a 64-bit output x;
//   * counts are summed shard by shard in index order.
// Counts therefore depend only on (spec, n, master_seed, shards), never on
// how many threads execute the shards.

#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <exception>
#include <mutex>
#include <random>
#include <thread>
#include <vector>

#include "ctxent/models.hpp"

namespace ctxent::mc {

inline constexpr double kSigmaBound = 4.0;
inline constexpr double kCountFloor = 10.0;

struct SampleRun {
  ExperimentSpec spec;
  std::uint64_t n_samples = 1'000'000;
  std::uint64_t master_seed = 0;
  std::uint32_t shards = 1;
  /// Worker threads; 0 picks the hardware concurrency. Never affects results.
  unsigned threads = 0;
};

/// splitmix64 finaliser.
constexpr std::uint64_t splitmix64(std::uint64_t z) {
  z += 0x9E3779B97F4A7C15ULL;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

constexpr std::uint64_t shard_seed(std::uint64_t master, std::uint64_t shard) {
  return splitmix64(master + (shard + 1) * 0x9E3779B97F4A7C15ULL);
}

inline double uniform01(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

class EmpiricalJoint {
 public:
  EmpiricalJoint(std::vector<AlternativeSet> stages, Context context, std::vector<std::uint64_t> counts)
      : stages_(std::move(stages)), context_(std::move(context)), counts_(std::move(counts)) {
    std::size_t cells = 1;
    for (const auto& s : stages_) cells *= s.size();
    if (cells != counts_.size()) {
      throw Error(ErrorKind::ShapeMismatch, "count vector has " + std::to_string(counts_.size()) +
                                                " cells, outcome space has " + std::to_string(cells));
    }
    for (auto c : counts_) n_ += c;
  }

  const std::vector<AlternativeSet>& stages() const noexcept { return stages_; }
  const Context& context() const noexcept { return context_; }
  const std::vector<std::uint64_t>& counts() const noexcept { return counts_; }
  std::uint64_t n() const noexcept { return n_; }

  std::vector<double> frequencies() const {
    std::vector<double> f(counts_.size(), 0.0);
    if (n_ == 0) return f;
    for (std::size_t i = 0; i < f.size(); ++i) f[i] = static_cast<double>(counts_[i]) / static_cast<double>(n_);
    return f;
  }

  /// sqrt(p̂(1 − p̂)/n) per cell.
  std::vector<double> standard_errors() const {
    auto f = frequencies();
    for (auto& p : f) p = n_ ? std::sqrt(p * (1.0 - p) / static_cast<double>(n_)) : 0.0;
    return f;
  }

 private:
  std::vector<AlternativeSet> stages_;
  Context context_;
  std::vector<std::uint64_t> counts_;
  std::uint64_t n_ = 0;
};

namespace detail {

/// Per-sample walkers. Each returns the row-major cell of one sampled path.
class PhotonWalker {
 public:
  explicit PhotonWalker(const PhotonChainSpec& s) : spec_(s) {}
  std::size_t operator()(std::mt19937_64& rng) const {
    std::optional<Angle> pol = spec_.init_polarization;
    std::size_t cell = 0;
    for (const auto& f : spec_.filters) {
      const double pass = pol ? polarizer_pass_probability(f.angle - *pol) : 0.0;
      if (uniform01(rng) < pass) {
        pol = f.angle;
        cell = cell * 2;
      } else {
        pol.reset();
        cell = cell * 2 + 1;
      }
    }
    return cell;
  }

 private:
  const PhotonChainSpec& spec_;
};

class SpinWalker {
 public:
  explicit SpinWalker(const SpinChainSpec& s) : spec_(s) {}
  std::size_t operator()(std::mt19937_64& rng) const {
    Angle axis = spec_.init_axis;
    std::size_t cell = 0;
    for (const auto& st : spec_.sg_axes) {
      if (uniform01(rng) < spin_up_probability(st.angle - axis)) {
        axis = st.angle;
        cell = cell * 2;
      } else {
        axis = st.angle + Angle::degrees(180.0);
        cell = cell * 2 + 1;
      }
    }
    return cell;
  }

 private:
  const SpinChainSpec& spec_;
};

class BallsWalker {
 public:
  explicit BallsWalker(const BallsProcessSpec& s) : spec_(s), sets_(balls_stage_sets(s)) {
    const std::size_t stages = s.stages.size();
    const std::size_t balls = s.universe.size();
    outcome_.assign(stages, std::vector<std::size_t>(balls, kNone));
    groups_.assign(stages, std::vector<std::vector<std::size_t>>(balls));
    for (std::size_t k = 0; k < stages; ++k) {
      const auto& st = s.stages[k];
      for (std::size_t b = 0; b < balls; ++b) {
        const auto& attrs = s.universe[b].attributes;
        if (auto it = attrs.find(st.observe); it != attrs.end()) outcome_[k][b] = sets_[k].require_index(it->second);
        if (st.refill.kind == RefillKind::ByOutcome) {
          auto own = attrs.find(st.refill.attribute);
          if (own == attrs.end()) continue;
          for (std::size_t o = 0; o < balls; ++o) {
            auto it = s.universe[o].attributes.find(st.refill.attribute);
            if (it != s.universe[o].attributes.end() && it->second == own->second) groups_[k][b].push_back(o);
          }
        }
      }
    }
    init_ = ctxent::detail::initial_box(s);
  }

  const std::vector<AlternativeSet>& sets() const { return sets_; }

  std::size_t operator()(std::mt19937_64& rng, std::vector<std::size_t>& box) const {
    box = init_;
    std::size_t cell = 0;
    for (std::size_t k = 0; k < spec_.stages.size(); ++k) {
      ctxent::detail::require_box(spec_, box, k);
      const double u = uniform01(rng) * static_cast<double>(box.size());
      const std::size_t slot = std::min(static_cast<std::size_t>(u), box.size() - 1);
      const std::size_t drawn = box[slot];
      const std::size_t o = outcome_[k][drawn];
      if (o == kNone) {
        throw Error(ErrorKind::UnknownAttribute,
                    spec_.context.id() + ": ball '" + spec_.universe[drawn].id + "' has no attribute '" +
                        spec_.stages[k].observe + "'",
                    k);
      }
      cell = cell * sets_[k].size() + o;
      if (k + 1 == spec_.stages.size()) break;
      switch (spec_.stages[k].refill.kind) {
        case RefillKind::None: break;
        case RefillKind::RemoveDrawn: box.erase(box.begin() + static_cast<std::ptrdiff_t>(slot)); break;
        case RefillKind::ByOutcome: box = groups_[k][drawn]; break;
      }
    }
    return cell;
  }

 private:
  static constexpr std::size_t kNone = static_cast<std::size_t>(-1);
  const BallsProcessSpec& spec_;
  std::vector<AlternativeSet> sets_;
  std::vector<std::vector<std::size_t>> outcome_;
  std::vector<std::vector<std::vector<std::size_t>>> groups_;
  std::vector<std::size_t> init_;
};

}  // namespace detail

inline std::uint64_t shard_size(std::uint64_t n, std::uint32_t shards, std::uint32_t i) {
  return n / shards + (i < n % shards ? 1 : 0);
}

/// Runs one shard and returns its counts.
inline std::vector<std::uint64_t> simulate_shard(const ExperimentSpec& spec, std::size_t cells,
                                                 std::uint64_t samples, std::uint64_t seed) {
  std::vector<std::uint64_t> counts(cells, 0);
  std::mt19937_64 rng(seed);
  std::visit(
      [&](const auto& s) {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, BallsProcessSpec>) {
          detail::BallsWalker walk(s);
          std::vector<std::size_t> box;
          for (std::uint64_t j = 0; j < samples; ++j) ++counts[walk(rng, box)];
        } else if constexpr (std::is_same_v<T, PhotonChainSpec>) {
          detail::PhotonWalker walk(s);
          for (std::uint64_t j = 0; j < samples; ++j) ++counts[walk(rng)];
        } else {
          detail::SpinWalker walk(s);
          for (std::uint64_t j = 0; j < samples; ++j) ++counts[walk(rng)];
        }
      },
      spec);
  return counts;
}

inline std::vector<AlternativeSet> outcome_space(const ExperimentSpec& spec) {
  return joint_of(spec).stages();
}

inline EmpiricalJoint simulate(const SampleRun& run) {
  if (run.n_samples == 0) throw Error(ErrorKind::InvalidConfig, "sample count must be at least 1");
  if (run.shards == 0) throw Error(ErrorKind::InvalidConfig, "shard count must be at least 1");
  try {
    validate_spec(run.spec);
  } catch (const Error& e) {
    throw Error(ErrorKind::InvalidSpec, e.what(), e.stage());
  }
  auto stages = outcome_space(run.spec);
  std::size_t cells = 1;
  for (const auto& s : stages) cells *= s.size();

  std::vector<std::vector<std::uint64_t>> per_shard(run.shards);
  unsigned threads = run.threads ? run.threads : std::max(1u, std::thread::hardware_concurrency());
  threads = std::min<unsigned>(threads, run.shards);

  std::atomic<std::uint32_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto worker = [&] {
    for (std::uint32_t i; (i = next.fetch_add(1)) < run.shards;) {
      try {
        per_shard[i] = simulate_shard(run.spec, cells, shard_size(run.n_samples, run.shards, i),
                                      shard_seed(run.master_seed, i));
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
      }
    }
  };
  if (threads <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(threads);
    for (unsigned t = 0; t < threads; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  if (failure) std::rethrow_exception(failure);

  std::vector<std::uint64_t> counts(cells, 0);
  for (const auto& shard : per_shard) {
    for (std::size_t c = 0; c < cells; ++c) counts[c] += shard[c];
  }
  return EmpiricalJoint(std::move(stages), context_of(run.spec), std::move(counts));
}

struct CellVerdict {
  std::size_t index = 0;
  std::vector<std::string> outcomes;
  std::uint64_t count = 0;
  double empirical = 0.0;
  double analytic = 0.0;
  double standard_error = 0.0;
  double bound = 0.0;  // max(4·SE, 10/n)
  bool pass = false;
};

struct Comparison {
  std::string context_id;
  std::uint64_t n = 0;
  std::vector<CellVerdict> cells;

  bool pass() const {
    return std::all_of(cells.begin(), cells.end(), [](const auto& c) { return c.pass; });
  }
  std::vector<std::size_t> failing() const {
    std::vector<std::size_t> out;
    for (const auto& c : cells) {
      if (!c.pass) out.push_back(c.index);
    }
    return out;
  }
};

/// Per-cell test |p̂ − p| ≤ max(4·SE, 10/n).
inline Comparison compare(const EmpiricalJoint& emp, const JointDistribution& analytic) {
  if (!same_context(emp.context(), analytic.context())) {
    throw Error(ErrorKind::ContextMismatch,
                "samples of '" + emp.context().id() + "' against joint of '" + analytic.context().id() + "'");
  }
  if (emp.stages() != analytic.stages()) {
    throw Error(ErrorKind::ShapeMismatch, "empirical and analytic outcome spaces differ");
  }
  if (emp.n() == 0) throw Error(ErrorKind::InvalidConfig, "no samples");
  const auto freq = emp.frequencies();
  const auto se = emp.standard_errors();
  const double n = static_cast<double>(emp.n());
  Comparison out{emp.context().id(), emp.n(), {}};
  out.cells.reserve(freq.size());
  for (std::size_t i = 0; i < freq.size(); ++i) {
    CellVerdict v;
    v.index = i;
    const auto idx = analytic.unflatten(i);
    for (std::size_t k = 0; k < idx.size(); ++k) v.outcomes.push_back(analytic.stages()[k].outcomes()[idx[k]]);
    v.count = emp.counts()[i];
    v.empirical = freq[i];
    v.analytic = analytic.probs()[i];
    v.standard_error = se[i];
    v.bound = std::max(kSigmaBound * se[i], kCountFloor / n);
    v.pass = std::abs(v.empirical - v.analytic) <= v.bound;
    out.cells.push_back(std::move(v));
  }
  return out;
}

}  // namespace ctxent::mc
