#include "dfmsynth/synthesis.h"

#include <algorithm>
#include <deque>
#include <set>
#include <sstream>
#include <tuple>

#include "dfmsynth/errors.h"
#include "digest.h"

namespace dfmsynth {

void GameGraph::validate() const {
  if (nodes.empty()) throw MalformedError("game has no nodes");
  if (initial >= nodes.size()) throw MalformedError("game initial node out of range");
  for (const auto& node : nodes) {
    if (node.branches.empty()) throw MalformedError("game node " + node.label + " has no feasible reading");
    for (const auto& branch : node.branches) {
      if (branch.moves.empty()) {
        throw MalformedError("game node " + node.label + " has no move on reading " + branch.reading);
      }
      for (const auto& move : branch.moves) {
        if (move.successor >= nodes.size()) throw MalformedError("game successor out of range");
        if (move.control >= controls.size()) throw MalformedError("game control out of range");
      }
    }
  }
}

GameGraph build_game(const ObserverMachine& observer, const Objective& objective, const ErrorModel& model,
                     const Rational& gamma_bound, const Rational& tau) {
  if (tau <= 0) throw ParameterError("tau must be positive");
  if (gamma_bound < 0) throw ParameterError("gain bound must be nonnegative");
  GameGraph game;
  game.controls = observer.controls;
  game.readings = sensor_alphabet();
  game.initial = observer.initial;
  // The exogenous input is chosen by the environment, so it contributes its
  // least favourable weight.
  const Rational rho_r = objective.rho.min();
  for (std::size_t s = 0; s < observer.states.size(); ++s) {
    const ObserverState& st = observer.states[s];
    GameNode node;
    node.label = observer.label(s);
    const Rational base = objective.mu(bit_symbol(st.vhat)) - rho_r;
    for (Sensor y : kSensorValues) {
      if (!st.feasible(y)) continue;
      GameBranch branch;
      branch.reading = std::string(sensor_name(y));
      branch.w = y != st.predicted ? 1 : 0;
      const Rational credit = tau * model.mu(bit_symbol(branch.w));
      for (std::size_t u = 0; u < observer.controls.size(); ++u) {
        auto next = observer.successor(s, y, u);
        if (!next) continue;
        GameMove move;
        move.control = u;
        move.cost = base + tau * gamma_bound * model.rho(observer.controls[u]) - credit;
        move.successor = *next;
        branch.moves.push_back(std::move(move));
      }
      node.branches.push_back(std::move(branch));
    }
    if (node.branches.empty()) throw MalformedError("observer state " + node.label + " admits no reading");
    game.nodes.push_back(std::move(node));
  }
  game.validate();
  return game;
}

std::size_t ValueFunction::unbounded_count() const {
  return static_cast<std::size_t>(std::count(values.begin(), values.end(), std::nullopt));
}

namespace {

using Value = std::optional<Integer>;  // nullopt = unbounded

// max(0, max_y min_u [c + V(S')]) on scaled integer costs.
Value backup(const GameNode& node, const std::vector<std::vector<std::vector<Integer>>>& costs,
             std::size_t index, const std::vector<Value>& values) {
  Integer best = 0;
  for (std::size_t b = 0; b < node.branches.size(); ++b) {
    std::optional<Integer> branch_min;
    const auto& moves = node.branches[b].moves;
    for (std::size_t m = 0; m < moves.size(); ++m) {
      const Value& next = values[moves[m].successor];
      if (!next) continue;
      Integer total = costs[index][b][m] + *next;
      if (!branch_min || total < *branch_min) branch_min = std::move(total);
    }
    if (!branch_min) return std::nullopt;
    if (*branch_min > best) best = *branch_min;
  }
  return best;
}

}  // namespace

ValueFunction value_iteration(const GameGraph& game, const ValueIterationOptions& options) {
  game.validate();
  const std::size_t n = game.nodes.size();

  Integer scale = 1;
  for (const auto& node : game.nodes) {
    for (const auto& branch : node.branches) {
      for (const auto& move : branch.moves) scale = lcm(scale, denominator(move.cost));
    }
  }
  std::vector<std::vector<std::vector<Integer>>> costs(n);
  Integer max_cost = 0;
  for (std::size_t s = 0; s < n; ++s) {
    for (const auto& branch : game.nodes[s].branches) {
      std::vector<Integer> row;
      for (const auto& move : branch.moves) {
        const Rational scaled = move.cost * Rational(scale);
        row.push_back(numerator(scaled));
        max_cost = std::max(max_cost, row.back());
      }
      costs[s].push_back(std::move(row));
    }
  }
  const Integer threshold = Integer(n) * max_cost;

  auto to_rational = [&](const std::vector<Value>& values) {
    std::vector<std::optional<Rational>> out(values.size());
    for (std::size_t i = 0; i < values.size(); ++i) {
      if (values[i]) out[i] = Rational(*values[i], scale);
    }
    return out;
  };

  std::vector<Value> values(n, Integer(0));
  ValueFunction result;
  result.threshold = Rational(threshold, scale);
  bool changed = true;
  while (changed) {
    changed = false;
    std::vector<Value> source = values;
    for (std::size_t s = 0; s < n; ++s) {
      if (!values[s]) continue;
      Value next = backup(game.nodes[s], costs, s,
                          options.order == UpdateOrder::kJacobi ? source : values);
      if (next && *next > threshold) next.reset();
      if (next != values[s]) {
        values[s] = std::move(next);
        changed = true;
      }
    }
    ++result.sweeps;
    if (options.on_sweep) options.on_sweep(to_rational(values));
  }
  result.values = to_rational(values);
  result.diverged = !result.values[game.initial].has_value();
  return result;
}

std::size_t ControllerDfm::reachable_state_count() const {
  const auto reach = reachable_states(machine);
  std::size_t count = 0;
  for (std::size_t s = 0; s < reach.size(); ++s) {
    if (reach[s] && node[s]) ++count;
  }
  return count;
}

std::optional<std::size_t> ControllerDfm::policy(std::size_t node_id, const Symbol& reading) const {
  for (std::size_t q = 0; q < node.size(); ++q) {
    if (node[q] == node_id) return machine.out[q][machine.input_index(reading)];
  }
  return std::nullopt;
}

namespace {

std::vector<std::size_t> tie_ranks(const std::vector<Symbol>& controls, std::span<const Symbol> tie_order) {
  std::vector<std::size_t> rank(controls.size());
  for (std::size_t u = 0; u < controls.size(); ++u) {
    auto it = std::find(tie_order.begin(), tie_order.end(), controls[u]);
    rank[u] = it == tie_order.end() ? tie_order.size() + u : static_cast<std::size_t>(it - tie_order.begin());
  }
  for (const auto& symbol : tie_order) {
    if (std::find(controls.begin(), controls.end(), symbol) == controls.end()) {
      throw ConfigError("tie order names unknown control " + symbol);
    }
  }
  return rank;
}

}  // namespace

ControllerDfm extract_controller(const GameGraph& game, const ValueFunction& values,
                                 std::span<const Symbol> tie_order) {
  if (values.diverged) throw InfeasibleError("value iteration diverged; no controller exists at this bound");
  if (values.values.size() != game.nodes.size()) throw MalformedError("value function does not match game");
  const auto rank = tie_ranks(game.controls, tie_order);
  const std::size_t default_control =
      static_cast<std::size_t>(std::min_element(rank.begin(), rank.end()) - rank.begin());

  // Chosen move per (node, branch).
  auto choose = [&](std::size_t s, const GameBranch& branch) -> const GameMove& {
    const GameMove* best = nullptr;
    std::optional<Rational> best_total;
    for (const auto& move : branch.moves) {
      const auto& next = values.values[move.successor];
      if (!next) continue;
      Rational total = move.cost + *next;
      if (!best_total || total < *best_total ||
          (total == *best_total && rank[move.control] < rank[best->control])) {
        best = &move;
        best_total = std::move(total);
      }
    }
    if (!best) throw InfeasibleError("no bounded move at node " + game.nodes[s].label);
    return *best;
  };

  ControllerDfm k;
  k.machine.inputs = game.readings;
  k.machine.outputs = game.controls;
  std::vector<std::optional<std::size_t>> state_of(game.nodes.size());
  std::deque<std::size_t> queue;
  auto intern = [&](std::size_t s) {
    if (!state_of[s]) {
      state_of[s] = k.node.size();
      k.node.push_back(s);
      k.machine.state_labels.push_back(game.nodes[s].label);
      queue.push_back(s);
    }
    return *state_of[s];
  };
  k.machine.initial = intern(game.initial);
  std::vector<std::vector<std::pair<std::optional<std::size_t>, std::size_t>>> rows;
  bool needs_sink = false;
  while (!queue.empty()) {
    const std::size_t s = queue.front();
    queue.pop_front();
    if (!values.values[s]) throw InfeasibleError("policy reaches unbounded node " + game.nodes[s].label);
    const std::size_t q = *state_of[s];
    if (rows.size() <= q) rows.resize(q + 1);
    rows[q].assign(game.readings.size(), {std::nullopt, default_control});
    for (const auto& branch : game.nodes[s].branches) {
      const GameMove& move = choose(s, branch);
      const std::size_t y = static_cast<std::size_t>(
          std::find(game.readings.begin(), game.readings.end(), branch.reading) - game.readings.begin());
      rows[q][y] = {intern(move.successor), move.control};
    }
    for (const auto& cell : rows[q]) needs_sink |= !cell.first.has_value();
  }

  const std::size_t states = k.node.size();
  const std::size_t sink = states;
  if (needs_sink) {
    k.node.push_back(std::nullopt);
    k.machine.state_labels.push_back("infeasible");
  }
  k.machine.next.assign(k.node.size(), std::vector<StateId>(game.readings.size(), sink));
  k.machine.out.assign(k.node.size(), std::vector<std::size_t>(game.readings.size(), default_control));
  for (std::size_t q = 0; q < states; ++q) {
    for (std::size_t y = 0; y < game.readings.size(); ++y) {
      if (rows[q][y].first) k.machine.next[q][y] = *rows[q][y].first;
      k.machine.out[q][y] = rows[q][y].second;
    }
  }
  k.machine.validate();
  return k;
}

EdgeFilter controller_edge_filter(const ControllerDfm& controller) {
  std::set<std::tuple<std::size_t, int, std::size_t>> taken;
  const auto& m = controller.machine;
  for (std::size_t q = 0; q < m.state_count(); ++q) {
    if (!controller.node[q]) continue;
    for (std::size_t y = 0; y < m.inputs.size(); ++y) {
      if (!controller.node[m.next[q][y]]) continue;
      taken.emplace(*controller.node[q], static_cast<int>(parse_sensor(m.inputs[y])), m.out[q][y]);
    }
  }
  return [taken = std::move(taken)](const ObserverEdge& e) {
    return taken.count({e.state, static_cast<int>(e.y), e.control}) != 0;
  };
}

std::string plant_canonical_text(const Plant1D& plant) {
  std::ostringstream os;
  os << "plant1d\nheight " << to_string(plant.height) << "\nthreshold " << to_string(plant.threshold)
     << "\nband " << to_string(plant.band.lo) << ' ' << to_string(plant.band.hi) << '\n';
  for (const auto& c : plant.controls) {
    os << "control " << c.name;
    for (const auto& [x, y] : c.map.knots()) os << ' ' << to_string(x) << ':' << to_string(y);
    os << '\n';
  }
  return os.str();
}

namespace {

std::vector<std::string> chain_statements(const Certificate& c) {
  const std::string g = to_string(c.gamma_bound);
  const std::string t = to_string(c.tau);
  const std::string b = to_string(c.value_bound);
  return {
      "error-system gain bound " + to_string(c.delta_bound) + " <= gamma " + g,
      "V >= 0 and V(S) >= c(S,y,K(S,y)) + V(S') on every controller transition, V(initial) <= B = " + b,
      "observer loop: inf_T sum rho(r) + " + t + "*mu_delta(w) - mu(vhat) - " + t + "*" + g +
          "*rho_delta(z) >= -" + b,
      "observer-error loop: inf_T sum rho(r) - mu(vhat) > -inf for every error system of gain <= " + g,
      "plant loop: inf_T sum rho(r) - mu(v) > -inf",
  };
}

}  // namespace

Certificate certify(const Plant1D& plant, const ObserverMachine& observer, const ControllerDfm& controller,
                    const ValueFunction& values, const Objective& objective, const ErrorModel& model,
                    const Rational& gamma_bound, const Rational& tau) {
  if (tau <= 0) throw CertificateError("tau must be positive");
  if (gamma_bound < 0) throw CertificateError("gain bound must be nonnegative");
  const DeltaBound delta = delta_gain_bound(observer, model);
  if (gamma_bound < delta.gamma_bound) {
    throw CertificateError("claimed gain bound " + to_string(gamma_bound) + " is below the error-system bound " +
                           to_string(delta.gamma_bound));
  }
  const GameGraph game = build_game(observer, objective, model, gamma_bound, tau);
  if (values.values.size() != game.nodes.size()) throw CertificateError("value function does not match observer");
  const Dfm& m = controller.machine;
  m.validate();
  if (m.inputs != game.readings || m.outputs != game.controls) {
    throw CertificateError("controller alphabets do not match the observer");
  }
  if (controller.node.size() != m.state_count()) throw CertificateError("controller node map has wrong size");

  const auto reach = reachable_states(m);
  if (!controller.node[m.initial] || *controller.node[m.initial] != game.initial) {
    throw CertificateError("controller does not start at the observer's initial state");
  }
  Certificate cert;
  cert.level = observer.partition.level;
  cert.cells = observer.partition.cells;
  cert.gamma_bound = gamma_bound;
  cert.tau = tau;
  cert.delta_bound = delta.gamma_bound;
  cert.value_bound = 0;

  for (std::size_t q = 0; q < m.state_count(); ++q) {
    if (!reach[q] || !controller.node[q]) continue;
    const std::size_t s = *controller.node[q];
    const GameNode& node = game.nodes.at(s);
    if (node.label != m.state_labels[q]) throw CertificateError("controller state " + m.state_labels[q] + " mislabeled");
    const auto& vs = values.values[s];
    if (!vs) throw CertificateError("unbounded value at controller state " + node.label);
    if (*vs < 0) throw CertificateError("negative value at " + node.label);
    for (std::size_t y = 0; y < m.inputs.size(); ++y) {
      auto branch = std::find_if(node.branches.begin(), node.branches.end(),
                                 [&](const GameBranch& b) { return b.reading == m.inputs[y]; });
      const StateId q_next = m.next[q][y];
      if (branch == node.branches.end()) {
        if (controller.node[q_next]) {
          throw CertificateError("controller continues on impossible reading at " + node.label);
        }
        continue;
      }
      auto move = std::find_if(branch->moves.begin(), branch->moves.end(),
                               [&](const GameMove& mv) { return mv.control == m.out[q][y]; });
      if (move == branch->moves.end()) throw CertificateError("controller picks an unavailable control");
      if (controller.node[q_next] != move->successor) {
        throw CertificateError("controller transition disagrees with the observer at " + node.label);
      }
      const auto& vn = values.values[move->successor];
      if (!vn) throw CertificateError("controller moves into an unbounded state from " + node.label);
      if (*vs < move->cost + *vn) {
        throw CertificateError("value inequality fails at " + node.label + " on " + m.inputs[y]);
      }
    }
    cert.values[node.label] = *vs;
    cert.value_bound = std::max(cert.value_bound, *vs);
    ++cert.controller_states;
  }
  cert.chain = chain_statements(cert);
  cert.plant_digest = internal::sha256_hex(plant_canonical_text(plant));
  cert.observer_digest = internal::sha256_hex(write_observer_edges(observer));
  cert.controller_digest = internal::sha256_hex(write_dfm_table(m));
  return cert;
}

void verify_certificate(const Certificate& certificate, const Plant1D& plant, const ObserverMachine& observer,
                        const ControllerDfm& controller, const Objective& objective, const ErrorModel& model) {
  if (internal::sha256_hex(plant_canonical_text(plant)) != certificate.plant_digest) {
    throw CertificateError("plant digest mismatch");
  }
  if (internal::sha256_hex(write_observer_edges(observer)) != certificate.observer_digest) {
    throw CertificateError("observer digest mismatch");
  }
  if (internal::sha256_hex(write_dfm_table(controller.machine)) != certificate.controller_digest) {
    throw CertificateError("controller digest mismatch");
  }
  ValueFunction values;
  values.values.assign(observer.states.size(), std::nullopt);
  for (const auto& [label, value] : certificate.values) {
    bool found = false;
    for (std::size_t s = 0; s < observer.states.size(); ++s) {
      if (observer.label(s) == label) {
        values.values[s] = value;
        found = true;
      }
    }
    if (!found) throw CertificateError("certificate names unknown state " + label);
  }
  const Certificate again =
      certify(plant, observer, controller, values, objective, model, certificate.gamma_bound, certificate.tau);
  if (!(again == certificate)) throw CertificateError("certificate contents do not re-derive");
}

ControllerDfm attach_controller(const Dfm& machine, const ObserverMachine& observer) {
  machine.validate();
  ControllerDfm k;
  k.machine = machine;
  for (const auto& label : machine.state_labels) {
    if (label == "infeasible") {
      k.node.push_back(std::nullopt);
      continue;
    }
    bool found = false;
    for (std::size_t s = 0; s < observer.states.size(); ++s) {
      if (observer.label(s) == label) {
        k.node.push_back(s);
        found = true;
        break;
      }
    }
    if (!found) throw MalformedError("controller state " + label + " is not an observer state");
  }
  return k;
}

namespace {

std::string divergence_diagnosis(const ValueFunction& values) {
  std::ostringstream os;
  os << "value iteration diverged after " << values.sweeps << " sweeps: initial value exceeds "
     << to_decimal_string(values.threshold) << "; " << values.unbounded_count() << " of " << values.values.size()
     << " states unbounded";
  return os.str();
}

}  // namespace

PipelineResult synthesize_level(const Plant1D& plant, const Objective& objective, const ErrorModel& model,
                                int level, const PipelineOptions& options) {
  PipelineResult result;
  const Partition partition = build_partition(plant, options.base_cells, level);
  ObserverMachine observer = build_observer(plant, partition);
  const DeltaBound delta = delta_gain_bound(observer, model);
  std::vector<Symbol> tie_order = options.tie_order.empty() ? plant.control_names() : options.tie_order;

  std::vector<Rational> taus{options.tau};
  if (options.retry_tau) {
    taus.push_back(options.tau * 2);
    taus.push_back(options.tau * 4);
  }
  for (const Rational& tau : taus) {
    LevelAttempt attempt;
    attempt.level = level;
    attempt.cells = partition.cells;
    attempt.observer_states = observer.states.size();
    attempt.delta_bound = delta.gamma_bound;
    attempt.tau = tau;
    GameGraph game = build_game(observer, objective, model, delta.gamma_bound, tau);
    ValueFunction values = value_iteration(game);
    if (values.diverged) {
      attempt.diagnosis = divergence_diagnosis(values);
      result.attempts.push_back(std::move(attempt));
      continue;
    }
    ControllerDfm controller = extract_controller(game, values, tie_order);
    Certificate certificate =
        certify(plant, observer, controller, values, objective, model, delta.gamma_bound, tau);
    attempt.converged = true;
    attempt.diagnosis = "converged after " + std::to_string(values.sweeps) + " sweeps; B = " +
                        to_decimal_string(certificate.value_bound) + "; controller states " +
                        std::to_string(certificate.controller_states);
    result.attempts.push_back(std::move(attempt));
    result.success = SynthesisResult{level,          tau,
                                     std::move(observer), std::move(game),
                                     std::move(values),   std::move(controller),
                                     std::move(certificate)};
    return result;
  }
  return result;
}

PipelineResult synthesize_pipeline(const Plant1D& plant, const Objective& objective, const ErrorModel& model,
                                   const PipelineOptions& options) {
  if (options.max_level < 1) throw ConfigError("max_level must be at least 1");
  PipelineResult result;
  for (int level = 1; level <= options.max_level; ++level) {
    PipelineResult one = synthesize_level(plant, objective, model, level, options);
    for (auto& a : one.attempts) result.attempts.push_back(std::move(a));
    if (one.success) {
      result.success = std::move(one.success);
      return result;
    }
  }
  return result;
}

}  // namespace dfmsynth
