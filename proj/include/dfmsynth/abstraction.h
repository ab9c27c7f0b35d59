#ifndef DFMSYNTH_ABSTRACTION_H_
#define DFMSYNTH_ABSTRACTION_H_

// Finite-state observers of a Plant1D over a uniform cell partition. An
// observer state is a contiguous range of cells known to contain the plant
// state before the current measurement. Each sampling instant refines the
// range by the sensor reading, applies the held control cell by cell, and
// snaps the result back onto the grid.

#include <array>
#include <compare>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "dfmsynth/gain.h"
#include "dfmsynth/machine.h"
#include "dfmsynth/objective.h"
#include "dfmsynth/plant.h"

namespace dfmsynth {

struct Partition {
  int level = 1;
  std::size_t cells = 1;
  Rational height;
  Rational width;

  // [k w, (k+1) w) for k < n, and the degenerate cell {h} at index n. The
  // top level gets its own cell so that shifting down from h lands in the
  // cell below without dragging the whole top cell along.
  Interval cell(std::size_t k) const;
  std::size_t cell_count() const { return cells + 1; }
};

// n = base * 2^(level-1) cells of equal width, plus the cell {h}.
Partition build_partition(const Plant1D& plant, std::size_t base, int level);

struct CellRange {
  std::size_t lo = 0;
  std::size_t hi = 0;
  auto operator<=>(const CellRange&) const = default;
};

std::string to_string(const CellRange& range);
// Union of the cells in the range.
Interval range_interval(const CellRange& range, const Partition& partition);

// Smallest cell range whose union contains the interval.
CellRange snap(const Interval& interval, const Partition& partition);

struct ObserverState {
  CellRange range;
  Sensor predicted = Sensor::kEmpty;
  bool ambiguous = false;
  int vhat = 1;
  // next[y][u]; nullopt when reading y is impossible from this range.
  std::array<std::vector<std::optional<std::size_t>>, 2> next;

  bool feasible(Sensor y) const { return next[static_cast<int>(y)].front().has_value(); }
};

struct ObserverMachine {
  Partition partition;
  std::vector<Symbol> controls;
  std::vector<ObserverState> states;
  std::size_t initial = 0;

  std::optional<std::size_t> successor(std::size_t state, Sensor y, std::size_t control) const {
    return states.at(state).next[static_cast<int>(y)].at(control);
  }
  std::optional<std::size_t> find(const CellRange& range) const;
  std::string label(std::size_t state) const { return to_string(states.at(state).range); }
};

ObserverMachine build_observer(const Plant1D& plant, const Partition& partition);

// One instant of a plant run paired with the observer run it drives.
struct LiftedStep {
  std::size_t t = 0;
  Rational x;
  std::size_t state = 0;  // pre-measurement observer state S_t
  Sensor predicted = Sensor::kEmpty;
  Sensor y = Sensor::kEmpty;
  int w = 0;  // 1 iff y != predicted
  int vhat = 1;
  int v = 1;
  std::optional<std::size_t> u;  // z = u; absent on the final row
};

// Throws InvariantError if the plant state ever leaves the y-refined range or
// the observer has no transition for the observed (y, u).
std::vector<LiftedStep> lift_trace(const ObserverMachine& observer, const Plant1D& plant,
                                   const Rational& x0, std::span<const std::size_t> controls);

struct ObserverEdge {
  std::size_t state = 0;
  Sensor y = Sensor::kEmpty;
  std::size_t control = 0;
  std::size_t target = 0;
};

// Observer transition graph; edge i of the graph corresponds to edges[i].
struct ObserverGraph {
  WeightedGraph graph;
  std::vector<ObserverEdge> edges;
};

// rho weight rho_delta(u); mu weight mu_delta(1) on ambiguous states (every
// prediction there counts as false) and mu_delta(0) elsewhere.
ObserverGraph observer_graph(const ObserverMachine& observer, const ErrorModel& model);

struct DeltaBound {
  Rational gamma_bound;
  std::vector<ObserverEdge> witness;  // empty when the bound is 0
};

// rho_delta/mu_delta gain of the error system over all reachable cycles.
// Throws ParameterError when the gain is unbounded.
DeltaBound delta_gain_bound(const ObserverMachine& observer, const ErrorModel& model);
DeltaBound delta_gain_bound(const ObserverMachine& observer);

// The observer as a machine with inputs (u, w) and outputs (y, z): it emits
// y = predicted xor w and z = u. Readings impossible from the current range
// lead to an absorbing "infeasible" state.
Dfm observer_channel_dfm(const ObserverMachine& observer);

// Text edge list: state y u next predicted vhat ambiguous.
std::string write_observer_edges(const ObserverMachine& observer);

// --- Finite-horizon checks of the approximation conditions ---

struct TraceSample {
  Rational x0;
  std::vector<std::size_t> controls;
};

// Uniform x0 on a 1/960-of-height grid (every cell boundary up to level 5 is
// hit) and uniformly random controls.
std::vector<TraceSample> random_traces(const Plant1D& plant, std::size_t count, std::size_t horizon,
                                       std::uint64_t seed);
// x0 = h*i/(points-1), i = 0..points-1, random controls.
std::vector<TraceSample> grid_traces(const Plant1D& plant, std::size_t points, std::size_t horizon,
                                     std::uint64_t seed);

struct CheckReport {
  bool passed = true;
  std::size_t traces = 0;
  std::size_t steps = 0;
  std::optional<std::size_t> failed_trace;
  std::optional<std::size_t> failed_step;
  std::string message;
};

// Every sampled plant trace lifts to a legal observer run with the same
// (u, y), and the plant state stays inside the refined range.
CheckReport check_behavioral_inclusion(const ObserverMachine& observer, const Plant1D& plant,
                                       std::span<const TraceSample> samples);

// rho(r) - mu(v) >= rho(r) - mu(vhat_fine) >= rho(r) - mu(vhat_coarse) at
// every step. The fine partition must refine the coarse one.
CheckReport check_condition_b(const ObserverMachine& coarse, const ObserverMachine& fine,
                              const Plant1D& plant, const Objective& objective,
                              std::span<const TraceSample> samples);

struct ExactnessCertificate {
  // From step t_star on every run sits in states that are sensor-unambiguous
  // and whose range is entirely inside or entirely outside the band.
  std::size_t t_star = 0;
};

using EdgeFilter = std::function<bool(const ObserverEdge&)>;

// Sufficient condition for eventual exactness: every state on a reachable
// cycle is decided (unambiguous, band-decided) and no undecided state can be
// reached from a cycle. The optional filter restricts the transitions, e.g.
// to those a controller takes.
std::optional<ExactnessCertificate> check_eventual_exactness(const ObserverMachine& observer,
                                                             const Plant1D& plant,
                                                             const EdgeFilter& filter = {});

}  // namespace dfmsynth

#endif  // DFMSYNTH_ABSTRACTION_H_
