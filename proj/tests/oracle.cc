#include "oracle.h"

#include <algorithm>
#include <functional>

namespace dfmsynth::testing {

std::vector<std::vector<std::size_t>> enumerate_simple_cycles(const WeightedGraph& graph) {
  const std::size_t n = graph.node_count();
  const auto reach = graph.reachable();
  const auto& edges = graph.edges();
  std::vector<std::vector<std::size_t>> out_edges(n);
  for (std::size_t e = 0; e < edges.size(); ++e) out_edges[edges[e].source].push_back(e);

  std::vector<std::vector<std::size_t>> cycles;
  std::vector<bool> on_path(n, false);
  std::vector<std::size_t> path;
  // Each cycle is found once, from its smallest node.
  std::function<void(std::size_t, std::size_t)> dfs = [&](std::size_t start, std::size_t v) {
    for (std::size_t e : out_edges[v]) {
      const std::size_t t = edges[e].target;
      if (t < start) continue;
      if (t == start) {
        path.push_back(e);
        cycles.push_back(path);
        path.pop_back();
      } else if (!on_path[t]) {
        on_path[t] = true;
        path.push_back(e);
        dfs(start, t);
        path.pop_back();
        on_path[t] = false;
      }
    }
  };
  for (std::size_t s = 0; s < n; ++s) {
    if (!reach[s]) continue;
    on_path[s] = true;
    dfs(s, s);
    on_path[s] = false;
  }
  return cycles;
}

std::optional<Rational> brute_max_cycle_mean(const WeightedGraph& graph,
                                             const std::function<Rational(const WeightedEdge&)>& weight) {
  std::optional<Rational> best;
  for (const auto& cycle : enumerate_simple_cycles(graph)) {
    Rational sum = 0;
    for (std::size_t e : cycle) sum += weight(graph.edges()[e]);
    const Rational mean = sum / Rational(cycle.size());
    if (!best || mean > *best) best = mean;
  }
  return best;
}

ExtendedRational brute_gain(const WeightedGraph& graph) {
  Rational best = 0;
  for (const auto& cycle : enumerate_simple_cycles(graph)) {
    Rational rho = 0, mu = 0;
    for (std::size_t e : cycle) {
      rho += graph.edges()[e].rho;
      mu += graph.edges()[e].mu;
    }
    if (rho == 0) {
      if (mu > 0) return ExtendedRational::infinity();
      continue;
    }
    best = std::max(best, Rational(mu / rho));
  }
  return ExtendedRational::of(best);
}

bool brute_stable(const WeightedGraph& graph, const Rational& gamma) {
  for (const auto& cycle : enumerate_simple_cycles(graph)) {
    Rational sum = 0;
    for (std::size_t e : cycle) sum += gamma * graph.edges()[e].rho - graph.edges()[e].mu;
    if (sum < 0) return false;
  }
  return true;
}

WeightedGraph random_graph(std::mt19937_64& rng, std::size_t max_nodes, int rho_lo, int rho_hi, int mu_lo,
                           int mu_hi) {
  std::uniform_int_distribution<std::size_t> node_count(1, max_nodes);
  const std::size_t n = node_count(rng);
  std::uniform_int_distribution<std::size_t> node(0, n - 1);
  std::uniform_int_distribution<std::size_t> edge_count(0, 3 * n);
  std::uniform_int_distribution<int> rho(rho_lo, rho_hi);
  std::uniform_int_distribution<int> mu(mu_lo, mu_hi);
  WeightedGraph g(n, node(rng));
  const std::size_t m = edge_count(rng);
  for (std::size_t i = 0; i < m; ++i) g.add_edge(node(rng), node(rng), rho(rng), mu(rng));
  return g;
}

namespace {

// sup over walks from each node of max(0, best prefix sum) for a fixed
// strategy graph; nullopt when a positive cycle is reachable.
std::vector<std::optional<Rational>> evaluate_strategy(
    std::size_t n, const std::vector<std::vector<std::pair<std::size_t, Rational>>>& adj) {
  std::vector<std::optional<Rational>> result(n);
  for (std::size_t s = 0; s < n; ++s) {
    // Longest simple path search; a positive cycle shows up as a revisit
    // with a larger accumulated sum.
    bool unbounded = false;
    Rational best = 0;
    std::vector<std::optional<Rational>> on_path(n);
    std::function<void(std::size_t, const Rational&)> dfs = [&](std::size_t v, const Rational& acc) {
      if (unbounded) return;
      best = std::max(best, acc);
      on_path[v] = acc;
      for (const auto& [t, c] : adj[v]) {
        const Rational next = acc + c;
        if (on_path[t]) {
          if (next > *on_path[t]) unbounded = true;
          continue;
        }
        dfs(t, next);
        if (unbounded) return;
      }
      on_path[v].reset();
    };
    dfs(s, 0);
    if (!unbounded) result[s] = best;
  }
  return result;
}

}  // namespace

std::vector<std::optional<Rational>> brute_game_values(const GameGraph& game) {
  const std::size_t n = game.nodes.size();
  std::vector<std::pair<std::size_t, std::size_t>> slots;  // (node, branch)
  for (std::size_t s = 0; s < n; ++s) {
    for (std::size_t b = 0; b < game.nodes[s].branches.size(); ++b) slots.emplace_back(s, b);
  }
  std::vector<std::size_t> choice(slots.size(), 0);
  std::vector<std::optional<Rational>> best(n);
  std::vector<bool> seen(n, false);
  while (true) {
    std::vector<std::vector<std::pair<std::size_t, Rational>>> adj(n);
    for (std::size_t i = 0; i < slots.size(); ++i) {
      const auto& move = game.nodes[slots[i].first].branches[slots[i].second].moves[choice[i]];
      adj[slots[i].first].emplace_back(move.successor, move.cost);
    }
    const auto values = evaluate_strategy(n, adj);
    for (std::size_t s = 0; s < n; ++s) {
      if (!values[s]) continue;
      if (!best[s] || *values[s] < *best[s]) best[s] = values[s];
    }
    std::size_t i = 0;
    for (; i < slots.size(); ++i) {
      const auto& moves = game.nodes[slots[i].first].branches[slots[i].second].moves;
      if (++choice[i] < moves.size()) break;
      choice[i] = 0;
    }
    if (i == slots.size()) break;
  }
  return best;
}

GameGraph random_game(std::mt19937_64& rng, std::size_t nodes, int cost_lo, int cost_hi) {
  std::uniform_int_distribution<std::size_t> node(0, nodes - 1);
  std::uniform_int_distribution<int> cost(cost_lo, cost_hi);
  std::uniform_int_distribution<int> coin(0, 1);
  GameGraph g;
  g.controls = {"a", "b"};
  g.readings = {"Empty", "Full"};
  for (std::size_t s = 0; s < nodes; ++s) {
    GameNode n;
    n.label = "n" + std::to_string(s);
    const int branches = 1 + coin(rng);
    for (int b = 0; b < branches; ++b) {
      GameBranch br;
      br.reading = g.readings[static_cast<std::size_t>(b)];
      const int moves = 1 + coin(rng);
      for (int m = 0; m < moves; ++m) {
        br.moves.push_back({static_cast<std::size_t>(m), Rational(cost(rng), 1 + coin(rng)), node(rng)});
      }
      n.branches.push_back(std::move(br));
    }
    g.nodes.push_back(std::move(n));
  }
  g.initial = node(rng);
  return g;
}

ObserverMachine synthetic_observer(bool ambiguous_a) {
  ObserverMachine obs;
  obs.partition = Partition{1, 3, Rational(3), Rational(1)};
  obs.controls = {"Go", "Idle"};
  constexpr std::size_t kA = 0, kB = 1, kZ = 2;
  auto state = [](std::size_t cell, int vhat) {
    ObserverState s;
    s.range = {cell, cell};
    s.predicted = Sensor::kEmpty;
    s.vhat = vhat;
    s.next[1] = {std::nullopt, std::nullopt};
    return s;
  };
  ObserverState a = state(kA, 1);
  a.next[0] = {kB, kZ};
  if (ambiguous_a) {
    a.ambiguous = true;
    a.next[1] = {kB, kZ};
  }
  ObserverState b = state(kB, 0);
  b.next[0] = {kA, kZ};
  ObserverState z = state(kZ, 0);
  z.next[0] = {kZ, kZ};
  obs.states = {a, b, z};
  obs.initial = kA;
  return obs;
}

ErrorModel synthetic_error_model() {
  return {Valuation({{"Go", Rational(1)}, {"Idle", Rational(0)}}),
          Valuation({{"0", Rational(0)}, {"1", Rational(1)}})};
}

}  // namespace dfmsynth::testing
