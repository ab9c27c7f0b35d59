#include <algorithm>
#include <deque>
#include <functional>
#include <random>

#include "dfmsynth/abstraction.h"
#include "dfmsynth/errors.h"
#include "scc.h"

namespace dfmsynth {
namespace {

std::vector<std::size_t> random_controls(std::mt19937_64& rng, std::size_t count, std::size_t horizon) {
  std::uniform_int_distribution<std::size_t> pick(0, count - 1);
  std::vector<std::size_t> out(horizon);
  for (auto& u : out) u = pick(rng);
  return out;
}

}  // namespace

std::vector<TraceSample> random_traces(const Plant1D& plant, std::size_t count, std::size_t horizon,
                                       std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> grid(0, 960);
  std::vector<TraceSample> out;
  out.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    TraceSample s;
    s.x0 = plant.height * Rational(grid(rng), 960);
    s.controls = random_controls(rng, plant.controls.size(), horizon);
    out.push_back(std::move(s));
  }
  return out;
}

std::vector<TraceSample> grid_traces(const Plant1D& plant, std::size_t points, std::size_t horizon,
                                     std::uint64_t seed) {
  if (points < 2) throw ParameterError("grid needs at least two points");
  std::mt19937_64 rng(seed);
  std::vector<TraceSample> out;
  for (std::size_t i = 0; i < points; ++i) {
    TraceSample s;
    s.x0 = plant.height * Rational(i, points - 1);
    s.controls = random_controls(rng, plant.controls.size(), horizon);
    out.push_back(std::move(s));
  }
  return out;
}

CheckReport check_behavioral_inclusion(const ObserverMachine& observer, const Plant1D& plant,
                                       std::span<const TraceSample> samples) {
  CheckReport report;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    std::vector<LiftedStep> lifted;
    try {
      lifted = lift_trace(observer, plant, samples[i].x0, samples[i].controls);
    } catch (const InvariantError& e) {
      report.passed = false;
      report.failed_trace = i;
      report.message = e.what();
      return report;
    }
    const Trajectory plant_run = simulate_open_loop(plant, samples[i].x0, samples[i].controls);
    for (std::size_t t = 0; t < lifted.size(); ++t) {
      const auto& step = lifted[t];
      // The observer's reading is its prediction corrected by w; it must
      // reproduce the plant's (u, y) exactly.
      const Sensor observer_y =
          step.w == 0 ? step.predicted : (step.predicted == Sensor::kFull ? Sensor::kEmpty : Sensor::kFull);
      if (observer_y != plant_run[t].y || step.u != plant_run[t].u) {
        report.passed = false;
        report.failed_trace = i;
        report.failed_step = t;
        report.message = "(u, y) mismatch between plant and lifted observer run";
        return report;
      }
    }
    ++report.traces;
    report.steps += lifted.size();
  }
  return report;
}

CheckReport check_condition_b(const ObserverMachine& coarse, const ObserverMachine& fine,
                              const Plant1D& plant, const Objective& objective,
                              std::span<const TraceSample> samples) {
  if (coarse.partition.height != fine.partition.height ||
      fine.partition.cells % coarse.partition.cells != 0) {
    throw ConfigError("partitions are not nested");
  }
  const Rational rho = objective.rho(objective.rho.alphabet().front());
  CheckReport report;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const auto a = lift_trace(coarse, plant, samples[i].x0, samples[i].controls);
    const auto b = lift_trace(fine, plant, samples[i].x0, samples[i].controls);
    for (std::size_t t = 0; t < a.size(); ++t) {
      const Rational actual = rho - objective.mu(bit_symbol(b[t].v));
      const Rational fine_value = rho - objective.mu(bit_symbol(b[t].vhat));
      const Rational coarse_value = rho - objective.mu(bit_symbol(a[t].vhat));
      if (!(actual >= fine_value && fine_value >= coarse_value)) {
        report.passed = false;
        report.failed_trace = i;
        report.failed_step = t;
        report.message = "performance ordering violated at x=" + to_decimal_string(a[t].x) +
                         " (v=" + std::to_string(b[t].v) + ", fine vhat=" + std::to_string(b[t].vhat) +
                         ", coarse vhat=" + std::to_string(a[t].vhat) + ")";
        return report;
      }
    }
    ++report.traces;
    report.steps += a.size();
  }
  return report;
}

std::optional<ExactnessCertificate> check_eventual_exactness(const ObserverMachine& observer,
                                                             const Plant1D& plant,
                                                             const EdgeFilter& filter) {
  const std::size_t n = observer.states.size();
  std::vector<std::vector<std::size_t>> adj(n);
  std::vector<bool> self_loop(n, false);
  for (std::size_t s = 0; s < n; ++s) {
    for (Sensor y : kSensorValues) {
      for (std::size_t u = 0; u < observer.controls.size(); ++u) {
        auto next = observer.successor(s, y, u);
        if (!next) continue;
        if (filter && !filter(ObserverEdge{s, y, u, *next})) continue;
        adj[s].push_back(*next);
        if (*next == s) self_loop[s] = true;
      }
    }
  }

  std::vector<bool> reach(n, false);
  std::deque<std::size_t> queue{observer.initial};
  reach[observer.initial] = true;
  while (!queue.empty()) {
    const std::size_t s = queue.front();
    queue.pop_front();
    for (std::size_t m : adj[s]) {
      if (!reach[m]) {
        reach[m] = true;
        queue.push_back(m);
      }
    }
  }

  const Interval band = Interval::closed(plant.band.lo, plant.band.hi);
  auto decided = [&](std::size_t s) {
    const auto& st = observer.states[s];
    if (st.ambiguous) return false;
    if (st.vhat == 0) return true;
    return range_interval(st.range, observer.partition).intersect(band).empty();
  };

  const auto comp = internal::scc_ids(n, adj);
  std::vector<std::size_t> comp_size(n, 0);
  for (std::size_t s = 0; s < n; ++s) ++comp_size[comp[s]];
  std::vector<bool> cyclic(n, false);
  for (std::size_t s = 0; s < n; ++s) cyclic[s] = reach[s] && (self_loop[s] || comp_size[comp[s]] > 1);

  for (std::size_t s = 0; s < n; ++s) {
    if (cyclic[s] && !decided(s)) return std::nullopt;
  }

  // Undecided states reachable after a cycle could be visited arbitrarily
  // late, so no uniform bound exists.
  std::vector<bool> after_cycle(n, false);
  for (std::size_t s = 0; s < n; ++s) {
    if (cyclic[s]) {
      after_cycle[s] = true;
      queue.push_back(s);
    }
  }
  while (!queue.empty()) {
    const std::size_t s = queue.front();
    queue.pop_front();
    for (std::size_t m : adj[s]) {
      if (!after_cycle[m]) {
        after_cycle[m] = true;
        queue.push_back(m);
      }
    }
  }
  for (std::size_t s = 0; s < n; ++s) {
    if (after_cycle[s] && !decided(s)) return std::nullopt;
  }

  // Remaining undecided states lie on acyclic prefixes. t_star is one past
  // the latest step at which any run can still visit one of them.
  std::vector<std::optional<std::size_t>> latest(n);  // longest path to an undecided state
  std::vector<bool> done(n, false);
  std::function<std::optional<std::size_t>(std::size_t)> longest = [&](std::size_t s) {
    if (done[s]) return latest[s];
    done[s] = true;
    std::optional<std::size_t> best;
    if (!decided(s)) best = 0;
    if (!after_cycle[s]) {
      for (std::size_t m : adj[s]) {
        if (auto d = longest(m)) best = std::max(best.value_or(0), *d + 1);
      }
    }
    latest[s] = best;
    return best;
  };
  ExactnessCertificate cert;
  if (auto d = longest(observer.initial)) cert.t_star = *d + 1;
  return cert;
}

}  // namespace dfmsynth
