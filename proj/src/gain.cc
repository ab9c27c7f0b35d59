#include "dfmsynth/gain.h"

#include <algorithm>
#include <deque>

#include "dfmsynth/errors.h"
#include "scc.h"

namespace dfmsynth {

Valuation::Valuation(std::map<Symbol, Rational> weights) : weights_(std::move(weights)) {}

Valuation Valuation::constant(std::span<const Symbol> alphabet, const Rational& value) {
  std::map<Symbol, Rational> weights;
  for (const auto& s : alphabet) weights.emplace(s, value);
  return Valuation(std::move(weights));
}

const Rational& Valuation::operator()(const Symbol& symbol) const {
  auto it = weights_.find(symbol);
  if (it == weights_.end()) throw AlphabetError("symbol '" + symbol + "' not in valuation alphabet");
  return it->second;
}

std::vector<Symbol> Valuation::alphabet() const {
  std::vector<Symbol> out;
  out.reserve(weights_.size());
  for (const auto& [s, w] : weights_) out.push_back(s);
  return out;
}

Rational Valuation::min() const {
  if (weights_.empty()) throw AlphabetError("empty valuation");
  Rational best = weights_.begin()->second;
  for (const auto& [s, w] : weights_) best = std::min(best, w);
  return best;
}

Rational Valuation::max() const {
  if (weights_.empty()) throw AlphabetError("empty valuation");
  Rational best = weights_.begin()->second;
  for (const auto& [s, w] : weights_) best = std::max(best, w);
  return best;
}

bool Valuation::is_constant() const { return weights_.empty() || min() == max(); }

PairValuation::PairValuation(std::vector<Symbol> first, std::vector<Symbol> second,
                             std::function<Rational(const Symbol&, const Symbol&)> weight)
    : first_(std::move(first)), second_(std::move(second)) {
  for (const auto& a : first_) {
    for (const auto& b : second_) weights_.emplace(std::make_pair(a, b), weight(a, b));
  }
}

const Rational& PairValuation::operator()(const Symbol& a, const Symbol& b) const {
  auto it = weights_.find({a, b});
  if (it == weights_.end()) {
    throw AlphabetError("pair (" + a + "," + b + ") not in valuation alphabet");
  }
  return it->second;
}

std::string to_string(const ExtendedRational& value) {
  return value.is_infinite() ? std::string("inf") : to_string(*value.finite);
}

WeightedGraph::WeightedGraph(std::size_t node_count, std::size_t initial)
    : labels_(node_count), initial_(initial) {
  for (std::size_t i = 0; i < node_count; ++i) labels_[i] = std::to_string(i);
}

std::size_t WeightedGraph::add_node(std::string label) {
  if (label.empty()) label = std::to_string(labels_.size());
  labels_.push_back(std::move(label));
  return labels_.size() - 1;
}

std::size_t WeightedGraph::add_edge(std::size_t source, std::size_t target, Rational rho,
                                    Rational mu, std::string label) {
  edges_.push_back({source, target, std::move(rho), std::move(mu), std::move(label)});
  return edges_.size() - 1;
}

void WeightedGraph::set_initial(std::size_t node) { initial_ = node; }

void WeightedGraph::validate() const {
  if (initial_ >= labels_.size()) throw MalformedError("initial node is not a declared node");
  for (const auto& e : edges_) {
    if (e.source >= labels_.size() || e.target >= labels_.size()) {
      throw MalformedError("edge endpoint is not a declared node");
    }
  }
}

std::vector<bool> WeightedGraph::reachable() const {
  validate();
  std::vector<std::vector<std::size_t>> adj(labels_.size());
  for (const auto& e : edges_) adj[e.source].push_back(e.target);
  std::vector<bool> seen(labels_.size(), false);
  std::deque<std::size_t> queue{initial_};
  seen[initial_] = true;
  while (!queue.empty()) {
    std::size_t n = queue.front();
    queue.pop_front();
    for (std::size_t m : adj[n]) {
      if (!seen[m]) {
        seen[m] = true;
        queue.push_back(m);
      }
    }
  }
  return seen;
}

std::vector<Rational> partial_sums(std::span<const Symbol> inputs, std::span<const Symbol> outputs,
                                   const GainSpec& spec, std::size_t horizon) {
  if (spec.gamma.is_infinite()) throw ParameterError("partial sums need a finite gamma");
  const Rational& gamma = *spec.gamma.finite;
  if (gamma < 0) throw ParameterError("gamma must be nonnegative");
  if (inputs.size() < horizon + 1 || outputs.size() < horizon + 1) {
    throw ParameterError("signal shorter than horizon + 1");
  }
  std::vector<Rational> sums;
  sums.reserve(horizon + 1);
  Rational acc = 0;
  for (std::size_t t = 0; t <= horizon; ++t) {
    acc += gamma * spec.rho(inputs[t]) - spec.mu(outputs[t]);
    sums.push_back(acc);
  }
  return sums;
}

namespace {

// Edges whose source is reachable (hence whose target is reachable too).
std::vector<std::size_t> reachable_edges(const WeightedGraph& g, const std::vector<bool>& reach) {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < g.edges().size(); ++i) {
    if (reach[g.edges()[i].source]) out.push_back(i);
  }
  return out;
}

// Bellman-Ford negative cycle search with an implicit zero-weight super
// source attached to every reachable node.
template <typename Weight>
std::optional<Cycle> find_negative_cycle(const WeightedGraph& g, const std::vector<bool>& reach,
                                         const std::vector<std::size_t>& edge_ids,
                                         const std::vector<Weight>& weight) {
  const std::size_t n = g.node_count();
  std::vector<Weight> dist(n, Weight(0));
  std::vector<std::ptrdiff_t> pred(n, -1);
  std::size_t reachable_count = std::count(reach.begin(), reach.end(), true);

  std::ptrdiff_t relaxed_node = -1;
  for (std::size_t round = 0; round < reachable_count; ++round) {
    relaxed_node = -1;
    for (std::size_t k = 0; k < edge_ids.size(); ++k) {
      const auto& e = g.edges()[edge_ids[k]];
      Weight candidate = dist[e.source] + weight[k];
      if (candidate < dist[e.target]) {
        dist[e.target] = std::move(candidate);
        pred[e.target] = static_cast<std::ptrdiff_t>(k);
        relaxed_node = static_cast<std::ptrdiff_t>(e.target);
      }
    }
    if (relaxed_node < 0) return std::nullopt;
  }
  if (relaxed_node < 0) return std::nullopt;

  // Walking back |V| predecessors lands on the cycle.
  std::size_t v = static_cast<std::size_t>(relaxed_node);
  for (std::size_t i = 0; i < reachable_count; ++i) v = g.edges()[edge_ids[pred[v]]].source;

  Cycle cycle;
  std::size_t u = v;
  do {
    std::size_t k = static_cast<std::size_t>(pred[u]);
    cycle.edges.push_back(edge_ids[k]);
    u = g.edges()[edge_ids[k]].source;
  } while (u != v);
  std::reverse(cycle.edges.begin(), cycle.edges.end());
  return cycle;
}

bool stable_at(const WeightedGraph& g, const std::vector<bool>& reach,
               const std::vector<std::size_t>& edge_ids, const std::vector<Integer>& rho,
               const std::vector<Integer>& mu, const Integer& p, const Integer& q) {
  std::vector<Integer> w(edge_ids.size());
  for (std::size_t k = 0; k < edge_ids.size(); ++k) w[k] = p * rho[k] - q * mu[k];
  return !find_negative_cycle(g, reach, edge_ids, w).has_value();
}

// Largest k >= 1 with ok(k), given ok(1) and ok monotone decreasing in k, and
// k <= limit when a limit is given.
template <typename Pred>
Integer gallop(const Pred& ok, const std::optional<Integer>& limit) {
  Integer good = 1;
  Integer step = 2;
  std::optional<Integer> bad;
  while (!bad) {
    Integer k = good * step;
    if (limit && k > *limit) {
      if (good == *limit) return good;
      k = *limit;
      if (ok(k)) return k;
      bad = k;
      break;
    }
    if (ok(k)) {
      good = k;
    } else {
      bad = k;
    }
  }
  while (*bad - good > 1) {
    Integer mid = (good + *bad) / 2;
    if (ok(mid)) {
      good = mid;
    } else {
      bad = mid;
    }
  }
  return good;
}

}  // namespace

StabilityVerdict verify_gain_stable(const WeightedGraph& graph, const Rational& gamma) {
  if (gamma < 0) throw ParameterError("gamma must be nonnegative");
  const auto reach = graph.reachable();
  const auto ids = reachable_edges(graph, reach);
  std::vector<Rational> w;
  w.reserve(ids.size());
  for (std::size_t id : ids) w.push_back(gamma * graph.edges()[id].rho - graph.edges()[id].mu);
  StabilityVerdict verdict;
  verdict.witness = find_negative_cycle(graph, reach, ids, w);
  verdict.stable = !verdict.witness.has_value();
  return verdict;
}

ExtendedRational compute_gain(const WeightedGraph& graph) {
  const auto reach = graph.reachable();
  const auto ids = reachable_edges(graph, reach);
  for (std::size_t id : ids) {
    const auto& e = graph.edges()[id];
    if (e.rho < 0 || e.mu < 0) throw ParameterError("gain requires nonnegative weights");
  }

  // Common scale turns every weight into an integer without changing ratios.
  Integer scale = 1;
  for (std::size_t id : ids) {
    const auto& e = graph.edges()[id];
    scale = lcm(scale, boost::multiprecision::denominator(e.rho));
    scale = lcm(scale, boost::multiprecision::denominator(e.mu));
  }
  std::vector<Integer> rho(ids.size()), mu(ids.size());
  Integer max_rho = 0;
  for (std::size_t k = 0; k < ids.size(); ++k) {
    const auto& e = graph.edges()[ids[k]];
    rho[k] = boost::multiprecision::numerator(e.rho * Rational(scale));
    mu[k] = boost::multiprecision::numerator(e.mu * Rational(scale));
    max_rho = std::max(max_rho, rho[k]);
  }

  // A cycle of rho-free edges carrying some mu makes every gamma fail.
  const std::size_t n = graph.node_count();
  std::vector<std::vector<std::size_t>> zero_adj(n);
  for (std::size_t k = 0; k < ids.size(); ++k) {
    if (rho[k] == 0) zero_adj[graph.edges()[ids[k]].source].push_back(graph.edges()[ids[k]].target);
  }
  const auto comp = internal::scc_ids(n, zero_adj);
  for (std::size_t k = 0; k < ids.size(); ++k) {
    const auto& e = graph.edges()[ids[k]];
    if (rho[k] == 0 && mu[k] > 0 && comp[e.source] == comp[e.target]) {
      return ExtendedRational::infinity();
    }
  }

  if (stable_at(graph, reach, ids, rho, mu, 0, 1)) return ExtendedRational::of(0);

  // The gain is sum(mu)/sum(rho) of some simple cycle, so its reduced
  // denominator is at most |V| * max rho. Stern-Brocot descent with galloping
  // keeps gain in (a/b, c/d] until no fraction with a small enough
  // denominator is left strictly inside.
  const std::size_t reachable_count = std::count(reach.begin(), reach.end(), true);
  const Integer max_den = Integer(reachable_count) * max_rho;
  auto stable = [&](const Integer& p, const Integer& q) {
    return stable_at(graph, reach, ids, rho, mu, p, q);
  };

  Integer a = 0, b = 1, c = 1, d = 0;
  while (b + d <= max_den) {
    if (stable(a + c, b + d)) {
      std::optional<Integer> limit;
      if (b > 0) limit = (max_den - d) / b;
      Integer k = gallop([&](const Integer& k) { return stable(c + k * a, d + k * b); }, limit);
      c += k * a;
      d += k * b;
    } else {
      std::optional<Integer> limit;
      if (d > 0) limit = (max_den - b) / d;
      Integer k = gallop([&](const Integer& k) { return !stable(a + k * c, b + k * d); }, limit);
      a += k * c;
      b += k * d;
    }
  }
  if (d == 0) throw InvariantError("gain search ended without a finite upper bound");
  return ExtendedRational::of(Rational(c, d));
}

std::optional<Cycle> critical_cycle(const WeightedGraph& graph, const Rational& gamma) {
  const auto reach = graph.reachable();
  const auto ids = reachable_edges(graph, reach);
  const std::size_t n = graph.node_count();
  std::vector<Rational> w(ids.size());
  for (std::size_t k = 0; k < ids.size(); ++k) {
    w[k] = gamma * graph.edges()[ids[k]].rho - graph.edges()[ids[k]].mu;
  }

  // Shortest-path potentials from a zero super source.
  std::vector<Rational> dist(n, Rational(0));
  const std::size_t reachable_count = std::count(reach.begin(), reach.end(), true);
  bool changed = true;
  for (std::size_t round = 0; changed; ++round) {
    if (round > reachable_count) throw ParameterError("negative cycle present at this gamma");
    changed = false;
    for (std::size_t k = 0; k < ids.size(); ++k) {
      const auto& e = graph.edges()[ids[k]];
      if (dist[e.source] + w[k] < dist[e.target]) {
        dist[e.target] = dist[e.source] + w[k];
        changed = true;
      }
    }
  }

  // Zero cycles consist of tight edges only, and every cycle of tight edges
  // has zero weight.
  std::vector<std::size_t> tight;
  std::vector<std::vector<std::size_t>> adj(n);
  for (std::size_t k = 0; k < ids.size(); ++k) {
    const auto& e = graph.edges()[ids[k]];
    if (dist[e.source] + w[k] == dist[e.target]) {
      tight.push_back(k);
      adj[e.source].push_back(e.target);
    }
  }
  const auto comp = internal::scc_ids(n, adj);
  for (std::size_t k : tight) {
    const auto& e = graph.edges()[ids[k]];
    if (e.mu <= 0 || comp[e.source] != comp[e.target]) continue;
    // Close the cycle with a BFS from e.target back to e.source inside the
    // component.
    std::vector<std::size_t> via(n, SIZE_MAX);
    std::vector<bool> seen(n, false);
    std::deque<std::size_t> queue{e.target};
    seen[e.target] = true;
    while (!queue.empty() && !seen[e.source]) {
      const std::size_t u = queue.front();
      queue.pop_front();
      for (std::size_t j : tight) {
        const auto& f = graph.edges()[ids[j]];
        if (f.source != u || seen[f.target] || comp[f.target] != comp[e.source]) continue;
        seen[f.target] = true;
        via[f.target] = j;
        queue.push_back(f.target);
      }
    }
    Cycle cycle;
    for (std::size_t u = e.source; u != e.target; u = graph.edges()[ids[via[u]]].source) {
      cycle.edges.push_back(ids[via[u]]);
    }
    std::reverse(cycle.edges.begin(), cycle.edges.end());
    cycle.edges.insert(cycle.edges.begin(), ids[k]);
    return cycle;
  }
  return std::nullopt;
}

std::optional<CycleMean> max_cycle_mean(const WeightedGraph& graph,
                                        const std::function<Rational(const WeightedEdge&)>& weight) {
  const auto reach = graph.reachable();
  const auto ids = reachable_edges(graph, reach);
  const std::size_t n = graph.node_count();
  const std::size_t reachable_count = std::count(reach.begin(), reach.end(), true);

  Integer scale = 1;
  std::vector<Rational> raw(ids.size());
  for (std::size_t k = 0; k < ids.size(); ++k) {
    raw[k] = weight(graph.edges()[ids[k]]);
    scale = lcm(scale, boost::multiprecision::denominator(raw[k]));
  }
  std::vector<Integer> w(ids.size());
  for (std::size_t k = 0; k < ids.size(); ++k) {
    w[k] = boost::multiprecision::numerator(raw[k] * Rational(scale));
  }

  // best[k][v]: maximum weight of a k-edge walk from the initial node to v.
  std::vector<std::vector<std::optional<Integer>>> best(
      reachable_count + 1, std::vector<std::optional<Integer>>(n));
  best[0][graph.initial()] = Integer(0);
  for (std::size_t k = 1; k <= reachable_count; ++k) {
    for (std::size_t e = 0; e < ids.size(); ++e) {
      const auto& edge = graph.edges()[ids[e]];
      const auto& from = best[k - 1][edge.source];
      if (!from) continue;
      Integer candidate = *from + w[e];
      auto& to = best[k][edge.target];
      if (!to || candidate > *to) to = std::move(candidate);
    }
  }

  std::optional<Rational> lambda;
  const std::size_t len = reachable_count;
  for (std::size_t v = 0; v < n; ++v) {
    if (!best[len][v]) continue;
    std::optional<Rational> worst;
    for (std::size_t k = 0; k < len; ++k) {
      if (!best[k][v]) continue;
      Rational ratio(*best[len][v] - *best[k][v], Integer(len - k));
      if (!worst || ratio < *worst) worst = ratio;
    }
    if (worst && (!lambda || *worst > *lambda)) lambda = worst;
  }
  if (!lambda) return std::nullopt;

  // With weights shifted by -lambda no cycle is positive; longest-path
  // potentials make every edge of an optimal cycle tight, and every cycle of
  // tight edges is optimal.
  const Integer p = boost::multiprecision::numerator(*lambda);
  const Integer q = boost::multiprecision::denominator(*lambda);
  std::vector<Integer> shifted(ids.size());
  for (std::size_t k = 0; k < ids.size(); ++k) shifted[k] = w[k] * q - p;

  std::vector<std::optional<Integer>> pot(n);
  pot[graph.initial()] = Integer(0);
  for (std::size_t round = 0; round < reachable_count; ++round) {
    bool changed = false;
    for (std::size_t k = 0; k < ids.size(); ++k) {
      const auto& e = graph.edges()[ids[k]];
      if (!pot[e.source]) continue;
      Integer candidate = *pot[e.source] + shifted[k];
      if (!pot[e.target] || candidate > *pot[e.target]) {
        pot[e.target] = std::move(candidate);
        changed = true;
      }
    }
    if (!changed) break;
  }

  std::vector<std::vector<std::size_t>> tight(n);  // positions into ids
  for (std::size_t k = 0; k < ids.size(); ++k) {
    const auto& e = graph.edges()[ids[k]];
    if (*pot[e.source] + shifted[k] == *pot[e.target]) tight[e.source].push_back(k);
  }

  // Iterative DFS for any cycle of tight edges.
  enum class Mark { kWhite, kGrey, kBlack };
  std::vector<Mark> mark(n, Mark::kWhite);
  std::vector<std::size_t> via(n, SIZE_MAX);
  for (std::size_t root = 0; root < n; ++root) {
    if (!reach[root] || mark[root] != Mark::kWhite) continue;
    std::vector<std::pair<std::size_t, std::size_t>> stack{{root, 0}};
    mark[root] = Mark::kGrey;
    while (!stack.empty()) {
      auto& [node, next] = stack.back();
      if (next == tight[node].size()) {
        mark[node] = Mark::kBlack;
        stack.pop_back();
        continue;
      }
      std::size_t k = tight[node][next++];
      std::size_t target = graph.edges()[ids[k]].target;
      if (mark[target] == Mark::kWhite) {
        mark[target] = Mark::kGrey;
        via[target] = k;
        stack.push_back({target, 0});
      } else if (mark[target] == Mark::kGrey) {
        CycleMean result{*lambda / Rational(scale), {}};
        result.cycle.edges.push_back(ids[k]);
        for (std::size_t u = node; u != target; u = graph.edges()[ids[via[u]]].source) {
          result.cycle.edges.push_back(ids[via[u]]);
        }
        std::reverse(result.cycle.edges.begin(), result.cycle.edges.end());
        return result;
      }
    }
  }
  throw InvariantError("no tight cycle found for the maximum cycle mean");
}

std::optional<CycleMean> max_cycle_mean(const WeightedGraph& graph, EdgeWeight weight) {
  if (weight == EdgeWeight::kRho) {
    return max_cycle_mean(graph, [](const WeightedEdge& e) { return e.rho; });
  }
  return max_cycle_mean(graph, [](const WeightedEdge& e) { return e.mu; });
}

std::optional<CycleMean> max_cycle_mean(const WeightedGraph& graph,
                                        std::span<const Rational> node_weights) {
  if (node_weights.size() != graph.node_count()) {
    throw MalformedError("node weight count does not match node count");
  }
  return max_cycle_mean(graph, [&](const WeightedEdge& e) { return node_weights[e.source]; });
}

ComposedValuations small_gain_compose(const PairValuation& rho_s, const PairValuation& mu_s,
                                      const Valuation& rho_delta, const Valuation& mu_delta,
                                      const Rational& gamma_delta, const Rational& tau) {
  if (tau <= 0) throw ParameterError("tau must be positive");
  const auto& ws = rho_s.second_alphabet();
  const auto& zs = mu_s.second_alphabet();
  if (ws.empty() || zs.empty()) throw AlphabetError("degenerate (empty) W or Z alphabet");
  for (const auto& w : ws) {
    if (!mu_delta.contains(w)) throw AlphabetError("mu_delta is not defined on w = " + w);
  }
  for (const auto& z : zs) {
    if (!rho_delta.contains(z)) throw AlphabetError("rho_delta is not defined on z = " + z);
  }

  std::map<Symbol, Rational> rho, mu;
  for (const auto& r : rho_s.first_alphabet()) {
    std::optional<Rational> best;
    for (const auto& w : ws) {
      Rational value = rho_s(r, w) - tau * mu_delta(w);
      if (!best || value > *best) best = value;
    }
    rho.emplace(r, *best);
  }
  for (const auto& v : mu_s.first_alphabet()) {
    std::optional<Rational> best;
    for (const auto& z : zs) {
      Rational value = mu_s(v, z) - tau * gamma_delta * rho_delta(z);
      if (!best || value < *best) best = value;
    }
    mu.emplace(v, *best);
  }
  return {Valuation(std::move(rho)), Valuation(std::move(mu))};
}

}  // namespace dfmsynth
