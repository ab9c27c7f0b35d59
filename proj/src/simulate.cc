#include "dfmsynth/simulate.h"

#include <sstream>

#include "dfmsynth/errors.h"

namespace dfmsynth {

ClosedLoopRun closed_loop_sim(const Plant1D& plant, const ControllerDfm& controller, const Rational& x0,
                              std::size_t steps, const Objective& objective, const ObserverMachine* observer) {
  if (x0 < 0 || x0 > plant.height) throw DomainError("initial state outside [0, h]");
  const Dfm& m = controller.machine;
  const Rational rho_r = objective.rho.min();
  ClosedLoopRun run;
  run.reserve(steps + 1);
  Rational x = x0;
  StateId q = m.initial;
  std::optional<std::size_t> obs_state;
  if (observer) obs_state = observer->initial;
  Rational sum = 0;
  for (std::size_t t = 0; t <= steps; ++t) {
    if (!controller.node[q]) throw InvariantError("controller entered its infeasible state at t=" + std::to_string(t));
    ClosedLoopRow row;
    row.t = t;
    row.x = x;
    row.y = plant.sense(x);
    row.v = plant.performance(x);
    const std::size_t yi = m.input_index(std::string(sensor_name(row.y)));
    row.u = m.out[q][yi];
    sum += rho_r - objective.mu(bit_symbol(row.v));
    row.partial_sum = sum;
    if (observer) {
      if (*obs_state != *controller.node[q]) {
        throw InvariantError("controller memory diverged from the observer at t=" + std::to_string(t));
      }
      row.w = row.y != observer->states[*obs_state].predicted ? 1 : 0;
      obs_state = observer->successor(*obs_state, row.y, row.u);
      if (!obs_state) throw InvariantError("observer rejects the closed-loop reading at t=" + std::to_string(t));
    }
    run.push_back(std::move(row));
    if (t < steps) {
      x = plant_step(plant, x, run.back().u);
      q = m.next[q][yi];
    }
  }
  return run;
}

ObjectiveReport empirical_objective_check(std::span<const ClosedLoopRow> run, const Objective& objective) {
  ObjectiveReport report;
  const Rational rho_r = objective.rho.min();
  Rational sum = 0;
  bool first = true;
  for (const auto& row : run) {
    sum += rho_r - objective.mu(bit_symbol(row.v));
    if (first || sum < report.min_partial_sum) report.min_partial_sum = sum;
    first = false;
    if (row.v != 0) report.last_nonzero_v = row.t;
  }
  return report;
}

std::optional<std::size_t> certificate_violation(std::span<const ClosedLoopRow> run, const Certificate& certificate,
                                                 const Objective& objective, const ErrorModel& model,
                                                 std::span<const Symbol> controls) {
  const Rational rho_r = objective.rho.min();
  Rational lhs = 0;
  Rational credit = 0;
  for (const auto& row : run) {
    if (!row.w) throw InvariantError("run carries no mismatch channel");
    lhs += objective.mu(bit_symbol(row.v)) - rho_r;
    credit += model.mu(bit_symbol(*row.w)) - certificate.gamma_bound * model.rho(controls[row.u]);
    if (lhs > certificate.value_bound + certificate.tau * credit) return row.t;
  }
  return std::nullopt;
}

std::vector<Rational> initial_condition_sweep(const Plant1D& plant, std::size_t count) {
  if (count < 2) throw ParameterError("sweep needs at least two points");
  std::vector<Rational> out;
  for (std::size_t i = 0; i < count; ++i) out.push_back(plant.height * Rational(i, count - 1));
  return out;
}

std::string write_trajectory_csv(std::span<const ClosedLoopRow> run, std::span<const Symbol> controls) {
  std::ostringstream os;
  os << "t,x_cm,y,u,v,partial_sum\n";
  for (const auto& row : run) {
    os << row.t << ',' << to_decimal_string(row.x) << ',' << sensor_name(row.y) << ',' << controls[row.u] << ','
       << row.v << ',' << to_decimal_string(row.partial_sum) << '\n';
  }
  return os.str();
}

}  // namespace dfmsynth
