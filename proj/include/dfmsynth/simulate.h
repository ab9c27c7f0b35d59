#ifndef DFMSYNTH_SIMULATE_H_
#define DFMSYNTH_SIMULATE_H_

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "dfmsynth/abstraction.h"
#include "dfmsynth/objective.h"
#include "dfmsynth/plant.h"
#include "dfmsynth/synthesis.h"

namespace dfmsynth {

struct ClosedLoopRow {
  std::size_t t = 0;
  Rational x;
  Sensor y = Sensor::kEmpty;
  std::size_t u = 0;
  int v = 0;
  std::optional<int> w;  // mismatch of the observer run; needs the observer
  Rational partial_sum;  // sum_{k<=t} rho(r) - mu(v(k))
};

using ClosedLoopRun = std::vector<ClosedLoopRow>;

// Rows t = 0..steps. At each instant the plant emits y, the controller reads
// it and emits u, and (for t < steps) the plant advances under u. When an
// observer is given it is run alongside to recover w and must agree with the
// controller's memory. Throws InvariantError if the controller reaches its
// infeasible state.
ClosedLoopRun closed_loop_sim(const Plant1D& plant, const ControllerDfm& controller, const Rational& x0,
                              std::size_t steps, const Objective& objective,
                              const ObserverMachine* observer = nullptr);

struct ObjectiveReport {
  Rational min_partial_sum;
  std::optional<std::size_t> last_nonzero_v;
};

ObjectiveReport empirical_objective_check(std::span<const ClosedLoopRow> run, const Objective& objective);

// First T with sum_{t<=T} [mu(v) - rho(r)] > B + tau * sum_{t<=T} [mu_delta(w) - gamma * rho_delta(u)],
// or nullopt when the certified inequality holds along the whole run. Rows
// must carry w.
std::optional<std::size_t> certificate_violation(std::span<const ClosedLoopRow> run, const Certificate& certificate,
                                                 const Objective& objective, const ErrorModel& model,
                                                 std::span<const Symbol> controls);

// x0 = h*i/(count-1), i = 0..count-1.
std::vector<Rational> initial_condition_sweep(const Plant1D& plant, std::size_t count = 13);

// Header t,x_cm,y,u,v,partial_sum with exact decimal values.
std::string write_trajectory_csv(std::span<const ClosedLoopRow> run, std::span<const Symbol> controls);

}  // namespace dfmsynth

#endif  // DFMSYNTH_SIMULATE_H_
