#include "dfmsynth/abstraction.h"

#include <algorithm>
#include <deque>
#include <map>
#include <sstream>

#include "dfmsynth/errors.h"

namespace dfmsynth {

Objective reach_and_hold_objective() {
  return {Valuation({{kExogenousSymbol, Rational(0)}}),
          Valuation({{"0", Rational(0)}, {"1", Rational(1)}})};
}

ErrorModel mismatch_error_model(std::span<const Symbol> controls) {
  return {Valuation::constant(controls, Rational(1)),
          Valuation({{"0", Rational(0)}, {"1", Rational(1)}})};
}

Interval Partition::cell(std::size_t k) const {
  if (k > cells) throw DomainError("cell index out of range");
  const Rational lo = width * Rational(k);
  if (k == cells) return Interval::closed(height, height);
  return Interval::half_open(lo, width * Rational(k + 1));
}

Partition build_partition(const Plant1D& plant, std::size_t base, int level) {
  if (base < 1) throw ParameterError("partition base must be at least 1");
  if (level < 1) throw ParameterError("abstraction level must be at least 1");
  if (level > 40) throw ParameterError("abstraction level too large");
  Partition p;
  p.level = level;
  p.cells = base << (level - 1);
  p.height = plant.height;
  p.width = plant.height / Rational(p.cells);
  return p;
}

std::string to_string(const CellRange& range) {
  return "[" + std::to_string(range.lo) + "," + std::to_string(range.hi) + "]";
}

Interval range_interval(const CellRange& range, const Partition& partition) {
  Interval lo = partition.cell(range.lo);
  Interval hi = partition.cell(range.hi);
  return {lo.lo, hi.hi, hi.hi_closed};
}

CellRange snap(const Interval& interval, const Partition& p) {
  if (interval.empty()) throw DomainError("cannot snap an empty interval");
  if (interval.lo < 0 || interval.hi > p.height) throw DomainError("interval outside [0, h]");
  auto index = [](const Integer& k) { return static_cast<std::size_t>(k.convert_to<std::uint64_t>()); };
  CellRange r;
  r.lo = index(floor(interval.lo / p.width));
  if (interval.hi_closed) {
    r.hi = index(floor(interval.hi / p.width));
  } else {
    // The open end hi belongs to the cell left of it when it is a boundary.
    r.hi = index(ceil(interval.hi / p.width) - 1);
  }
  return r;
}

std::optional<std::size_t> ObserverMachine::find(const CellRange& range) const {
  for (std::size_t i = 0; i < states.size(); ++i) {
    if (states[i].range == range) return i;
  }
  return std::nullopt;
}

namespace {

ObserverState label_state(const CellRange& range, const Plant1D& plant, const Partition& p) {
  ObserverState s;
  s.range = range;
  const Interval u = range_interval(range, p);
  const bool any_empty = !u.intersect(plant.sensor_region(Sensor::kEmpty)).empty();
  const bool any_full = !u.intersect(plant.sensor_region(Sensor::kFull)).empty();
  s.ambiguous = any_empty && any_full;
  if (!s.ambiguous) {
    s.predicted = any_full ? Sensor::kFull : Sensor::kEmpty;
  } else {
    // Majority side by measure; a tie predicts Empty.
    const Rational below = plant.threshold - u.lo;
    const Rational above = u.hi - plant.threshold;
    s.predicted = above > below ? Sensor::kFull : Sensor::kEmpty;
  }
  s.vhat = (u.lo >= plant.band.lo && u.hi <= plant.band.hi) ? 0 : 1;
  return s;
}

// Cell-wise successor range of `range` after reading y and applying u.
std::optional<CellRange> successor_range(const CellRange& range, Sensor y, std::size_t u,
                                         const Plant1D& plant, const Partition& p) {
  const Interval region = plant.sensor_region(y);
  std::optional<CellRange> hull;
  for (std::size_t k = range.lo; k <= range.hi; ++k) {
    const Interval part = p.cell(k).intersect(region);
    if (part.empty()) continue;
    const CellRange image = snap(interval_image(plant, u, part), p);
    if (!hull) {
      hull = image;
    } else {
      hull->lo = std::min(hull->lo, image.lo);
      hull->hi = std::max(hull->hi, image.hi);
    }
  }
  return hull;
}

}  // namespace

ObserverMachine build_observer(const Plant1D& plant, const Partition& partition) {
  plant.validate();
  ObserverMachine obs;
  obs.partition = partition;
  obs.controls = plant.control_names();
  const std::size_t nu = plant.controls.size();

  std::map<CellRange, std::size_t> ids;
  std::deque<std::size_t> queue;
  auto intern = [&](const CellRange& r) {
    auto [it, inserted] = ids.emplace(r, obs.states.size());
    if (inserted) {
      obs.states.push_back(label_state(r, plant, partition));
      queue.push_back(it->second);
    }
    return it->second;
  };
  obs.initial = intern({0, partition.cells});

  while (!queue.empty()) {
    const std::size_t s = queue.front();
    queue.pop_front();
    const CellRange range = obs.states[s].range;
    for (Sensor y : kSensorValues) {
      std::vector<std::optional<std::size_t>> row(nu);
      for (std::size_t u = 0; u < nu; ++u) {
        if (auto next = successor_range(range, y, u, plant, partition)) row[u] = intern(*next);
      }
      obs.states[s].next[static_cast<int>(y)] = std::move(row);
    }
  }
  return obs;
}

std::vector<LiftedStep> lift_trace(const ObserverMachine& observer, const Plant1D& plant,
                                   const Rational& x0, std::span<const std::size_t> controls) {
  if (x0 < 0 || x0 > plant.height) throw DomainError("initial state outside [0, h]");
  std::vector<LiftedStep> steps;
  steps.reserve(controls.size() + 1);
  Rational x = x0;
  std::size_t state = observer.initial;
  for (std::size_t t = 0; t <= controls.size(); ++t) {
    const ObserverState& s = observer.states.at(state);
    LiftedStep step;
    step.t = t;
    step.x = x;
    step.state = state;
    step.predicted = s.predicted;
    step.y = plant.sense(x);
    step.w = step.y != s.predicted ? 1 : 0;
    step.vhat = s.vhat;
    step.v = plant.performance(x);
    const Interval refined =
        range_interval(s.range, observer.partition).intersect(plant.sensor_region(step.y));
    if (!refined.contains(x)) {
      throw InvariantError("soundness violated at t=" + std::to_string(t) + ": x=" +
                           to_decimal_string(x) + " outside refined " + to_string(refined) +
                           " of state " + observer.label(state));
    }
    if (t < controls.size()) {
      step.u = controls[t];
      auto next = observer.successor(state, step.y, controls[t]);
      if (!next) {
        throw InvariantError("observer has no transition from " + observer.label(state) + " on (" +
                             std::string(sensor_name(step.y)) + ", " + observer.controls.at(controls[t]) +
                             ") at t=" + std::to_string(t));
      }
      state = *next;
      x = plant_step(plant, x, controls[t]);
    }
    steps.push_back(std::move(step));
  }
  return steps;
}

ObserverGraph observer_graph(const ObserverMachine& observer, const ErrorModel& model) {
  ObserverGraph og;
  og.graph = WeightedGraph(observer.states.size(), observer.initial);
  for (std::size_t s = 0; s < observer.states.size(); ++s) {
    const auto& state = observer.states[s];
    const Rational& mu = model.mu(bit_symbol(state.ambiguous ? 1 : 0));
    for (Sensor y : kSensorValues) {
      for (std::size_t u = 0; u < observer.controls.size(); ++u) {
        auto next = observer.successor(s, y, u);
        if (!next) continue;
        og.graph.add_edge(s, *next, model.rho(observer.controls[u]), mu);
        og.edges.push_back({s, y, u, *next});
      }
    }
  }
  return og;
}

DeltaBound delta_gain_bound(const ObserverMachine& observer, const ErrorModel& model) {
  const ObserverGraph og = observer_graph(observer, model);
  DeltaBound bound;
  auto to_edges = [&](const Cycle& cycle) {
    std::vector<ObserverEdge> out;
    for (std::size_t e : cycle.edges) out.push_back(og.edges[e]);
    return out;
  };

  std::vector<Rational> rho_values;
  for (const auto& c : observer.controls) rho_values.push_back(model.rho(c));
  const bool constant_rho =
      std::all_of(rho_values.begin(), rho_values.end(), [&](const Rational& r) { return r == rho_values.front(); });

  if (constant_rho && rho_values.front() > 0) {
    // gain = max cycle mean of mu / constant rho.
    auto best = max_cycle_mean(og.graph, EdgeWeight::kMu);
    if (!best) {
      bound.gamma_bound = 0;
      return bound;
    }
    bound.gamma_bound = best->mean / rho_values.front();
    if (bound.gamma_bound > 0) bound.witness = to_edges(best->cycle);
    return bound;
  }

  const ExtendedRational gain = compute_gain(og.graph);
  if (gain.is_infinite()) throw ParameterError("error-system gain is unbounded for this rho_delta");
  bound.gamma_bound = *gain.finite;
  if (bound.gamma_bound > 0) {
    if (auto cycle = critical_cycle(og.graph, bound.gamma_bound)) bound.witness = to_edges(*cycle);
  }
  return bound;
}

DeltaBound delta_gain_bound(const ObserverMachine& observer) {
  return delta_gain_bound(observer, mismatch_error_model(observer.controls));
}

Dfm observer_channel_dfm(const ObserverMachine& observer) {
  Dfm m;
  const std::size_t n = observer.states.size();
  const std::size_t nu = observer.controls.size();
  for (std::size_t s = 0; s < n; ++s) m.state_labels.push_back(observer.label(s));
  m.state_labels.push_back("infeasible");
  const std::size_t sink = n;
  for (const auto& u : observer.controls) {
    for (int w = 0; w < 2; ++w) m.inputs.push_back(pair_symbol(u, bit_symbol(w)));
  }
  for (Sensor y : kSensorValues) {
    for (const auto& u : observer.controls) m.outputs.push_back(pair_symbol(std::string(sensor_name(y)), u));
  }
  auto out_index = [&](Sensor y, std::size_t u) { return static_cast<std::size_t>(y) * nu + u; };
  m.initial = observer.initial;
  m.next.assign(n + 1, std::vector<StateId>(m.inputs.size(), sink));
  m.out.assign(n + 1, std::vector<std::size_t>(m.inputs.size(), 0));
  for (std::size_t s = 0; s <= n; ++s) {
    for (std::size_t u = 0; u < nu; ++u) {
      for (int w = 0; w < 2; ++w) {
        const std::size_t in = u * 2 + static_cast<std::size_t>(w);
        if (s == sink) {
          m.out[s][in] = out_index(Sensor::kEmpty, u);
          continue;
        }
        const Sensor predicted = observer.states[s].predicted;
        const Sensor y = w == 0 ? predicted : (predicted == Sensor::kFull ? Sensor::kEmpty : Sensor::kFull);
        m.out[s][in] = out_index(y, u);
        if (auto next = observer.successor(s, y, u)) m.next[s][in] = *next;
      }
    }
  }
  return m;
}

std::string write_observer_edges(const ObserverMachine& observer) {
  std::ostringstream os;
  os << "# level " << observer.partition.level << " cells " << observer.partition.cells << " width "
     << to_decimal_string(observer.partition.width) << " states " << observer.states.size() << '\n';
  os << "# cell " << observer.partition.cells << " is the point " << to_decimal_string(observer.partition.height)
     << '\n';
  os << "# state y u next predicted vhat ambiguous\n";
  for (std::size_t s = 0; s < observer.states.size(); ++s) {
    const auto& st = observer.states[s];
    for (Sensor y : kSensorValues) {
      for (std::size_t u = 0; u < observer.controls.size(); ++u) {
        auto next = observer.successor(s, y, u);
        if (!next) continue;
        os << observer.label(s) << ' ' << sensor_name(y) << ' ' << observer.controls[u] << ' '
           << observer.label(*next) << ' ' << sensor_name(st.predicted) << ' ' << st.vhat << ' '
           << (st.ambiguous ? 1 : 0) << '\n';
      }
    }
  }
  return os.str();
}

}  // namespace dfmsynth
