#ifndef DFMSYNTH_SYNTHESIS_H_
#define DFMSYNTH_SYNTHESIS_H_

// Controller synthesis against a finite observer. The observer, the
// controller and any error system whose gain is at most gamma_bound form a
// total-payoff game: the adversary picks the sensor reading (and through it
// the mismatch w), the controller then picks u, and the per-step cost
//
//   c = mu(vhat) + tau * gamma_bound * rho_delta(u) - rho(r) - tau * mu_delta(w)
//
// must have bounded partial sums. A finite value at the initial node yields a
// controller and a certificate for the original plant.

#include <cstddef>
#include <functional>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "dfmsynth/abstraction.h"
#include "dfmsynth/machine.h"
#include "dfmsynth/objective.h"
#include "dfmsynth/plant.h"

namespace dfmsynth {

struct GameMove {
  std::size_t control = 0;
  Rational cost;
  std::size_t successor = 0;
};

struct GameBranch {
  Symbol reading;
  int w = 0;
  std::vector<GameMove> moves;
};

struct GameNode {
  std::string label;
  std::vector<GameBranch> branches;  // one per feasible reading
};

struct GameGraph {
  std::vector<Symbol> controls;
  std::vector<Symbol> readings;
  std::vector<GameNode> nodes;
  std::size_t initial = 0;

  // Throws MalformedError if a node has no branch, a branch has no move, or a
  // successor is out of range.
  void validate() const;
};

GameGraph build_game(const ObserverMachine& observer, const Objective& objective, const ErrorModel& model,
                     const Rational& gamma_bound, const Rational& tau);

enum class UpdateOrder { kJacobi, kGaussSeidel };

struct ValueIterationOptions {
  UpdateOrder order = UpdateOrder::kJacobi;
  // Called with the current iterate after every sweep (nullopt = unbounded).
  std::function<void(const std::vector<std::optional<Rational>>&)> on_sweep;
};

struct ValueFunction {
  // nullopt marks nodes whose value exceeded the divergence threshold.
  std::vector<std::optional<Rational>> values;
  bool diverged = false;  // value at the initial node is unbounded
  Rational threshold;     // N * C in cost units
  std::size_t sweeps = 0;

  std::size_t unbounded_count() const;
};

// Least fixed point of V(S) = max(0, max_y min_u [c(S,y,u) + V(S')]) from
// V = 0. Costs are scaled to integers by their common denominator; a value
// above N * C (N nodes, C the largest positive cost) can only come from a
// positive cycle the controller cannot avoid and is marked unbounded.
ValueFunction value_iteration(const GameGraph& game, const ValueIterationOptions& options = {});

struct ControllerDfm {
  Dfm machine;  // inputs: readings, outputs: controls
  // Game node per machine state; nullopt for the absorbing "infeasible"
  // state taken on readings the observer rules out.
  std::vector<std::optional<std::size_t>> node;

  std::size_t reachable_state_count() const;
  std::optional<std::size_t> policy(std::size_t node_id, const Symbol& reading) const;
};

// Argmin policy of the converged backup, restricted to the nodes it reaches
// from the initial node. Ties go to the control listed first in tie_order.
ControllerDfm extract_controller(const GameGraph& game, const ValueFunction& values,
                                 std::span<const Symbol> tie_order);

// Restricts observer transitions to those the controller takes.
EdgeFilter controller_edge_filter(const ControllerDfm& controller);

struct Certificate {
  int level = 0;
  std::size_t cells = 0;
  Rational gamma_bound;
  Rational tau;
  Rational delta_bound;  // computed error-system gain bound, <= gamma_bound
  Rational value_bound;  // B = max certified value over controller states
  std::vector<std::string> chain;
  std::string plant_digest;
  std::string observer_digest;
  std::string controller_digest;
  std::map<std::string, Rational> values;  // per controller state label
  std::size_t controller_states = 0;

  bool operator==(const Certificate&) const = default;
};

std::string plant_canonical_text(const Plant1D& plant);

// Checks gamma_bound against the computed error bound and that the values
// satisfy V(S) >= c(S,y,K(S,y)) + V(S') along every controller transition,
// which bounds every partial sum of c by V(initial) <= B.
Certificate certify(const Plant1D& plant, const ObserverMachine& observer, const ControllerDfm& controller,
                    const ValueFunction& values, const Objective& objective, const ErrorModel& model,
                    const Rational& gamma_bound, const Rational& tau);

// Re-derives every check of `certificate` from the given inputs. Throws
// CertificateError on any mismatch.
void verify_certificate(const Certificate& certificate, const Plant1D& plant, const ObserverMachine& observer,
                        const ControllerDfm& controller, const Objective& objective, const ErrorModel& model);

// Rebuilds the game-node mapping of a controller read back from a table.
ControllerDfm attach_controller(const Dfm& machine, const ObserverMachine& observer);

struct LevelAttempt {
  int level = 0;
  std::size_t cells = 0;
  std::size_t observer_states = 0;
  Rational delta_bound;
  Rational tau;
  bool converged = false;
  std::string diagnosis;
};

struct SynthesisResult {
  int level = 0;
  Rational tau;
  ObserverMachine observer;
  GameGraph game;
  ValueFunction values;
  ControllerDfm controller;
  Certificate certificate;
};

struct PipelineOptions {
  std::size_t base_cells = 6;
  int max_level = 4;
  Rational tau = 1;
  std::vector<Symbol> tie_order;  // defaults to the plant's control order
  bool retry_tau = false;         // also try tau in {2, 4} on divergence
};

struct PipelineResult {
  std::vector<LevelAttempt> attempts;
  std::optional<SynthesisResult> success;
};

// Attempt at a single level with gamma_bound = computed error bound.
PipelineResult synthesize_level(const Plant1D& plant, const Objective& objective, const ErrorModel& model,
                                int level, const PipelineOptions& options);

// Builds levels 1, 2, ... and stops at the first successful synthesis.
PipelineResult synthesize_pipeline(const Plant1D& plant, const Objective& objective, const ErrorModel& model,
                                   const PipelineOptions& options);

}  // namespace dfmsynth

#endif  // DFMSYNTH_SYNTHESIS_H_
