#ifndef DFMSYNTH_GAIN_H_
#define DFMSYNTH_GAIN_H_

// Valuations, rho/mu gain stability and exact gain computation over finite
// weighted graphs, and small-gain composition of valuations.

#include <cstddef>
#include <functional>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "dfmsynth/rational.h"

namespace dfmsynth {

using Symbol = std::string;

// A total weight table over a finite alphabet.
class Valuation {
 public:
  Valuation() = default;
  explicit Valuation(std::map<Symbol, Rational> weights);

  static Valuation constant(std::span<const Symbol> alphabet, const Rational& value);

  // Throws AlphabetError for symbols outside the alphabet.
  const Rational& operator()(const Symbol& symbol) const;

  bool contains(const Symbol& symbol) const { return weights_.count(symbol) != 0; }
  std::vector<Symbol> alphabet() const;
  const std::map<Symbol, Rational>& weights() const { return weights_; }
  Rational min() const;
  Rational max() const;
  bool is_constant() const;

  bool operator==(const Valuation&) const = default;

 private:
  std::map<Symbol, Rational> weights_;
};

// A total weight table over a product of two finite alphabets.
class PairValuation {
 public:
  PairValuation(std::vector<Symbol> first, std::vector<Symbol> second,
                std::function<Rational(const Symbol&, const Symbol&)> weight);

  const Rational& operator()(const Symbol& a, const Symbol& b) const;
  const std::vector<Symbol>& first_alphabet() const { return first_; }
  const std::vector<Symbol>& second_alphabet() const { return second_; }

 private:
  std::vector<Symbol> first_;
  std::vector<Symbol> second_;
  std::map<std::pair<Symbol, Symbol>, Rational> weights_;
};

// A rational extended with +infinity. Gains of finite systems live here.
struct ExtendedRational {
  std::optional<Rational> finite;

  static ExtendedRational infinity() { return {}; }
  static ExtendedRational of(Rational value) { return {std::move(value)}; }
  bool is_infinite() const { return !finite.has_value(); }
  bool operator==(const ExtendedRational&) const = default;
};

std::string to_string(const ExtendedRational& value);

struct GainSpec {
  Valuation rho;
  Valuation mu;
  ExtendedRational gamma;
};

struct WeightedEdge {
  std::size_t source = 0;
  std::size_t target = 0;
  Rational rho;
  Rational mu;
  std::string label;
};

// Directed multigraph with a declared initial node. Cycles that cannot be
// reached from the initial node are ignored by every analysis below.
class WeightedGraph {
 public:
  WeightedGraph() = default;
  explicit WeightedGraph(std::size_t node_count, std::size_t initial = 0);

  std::size_t add_node(std::string label = {});
  std::size_t add_edge(std::size_t source, std::size_t target, Rational rho, Rational mu,
                       std::string label = {});
  void set_initial(std::size_t node);

  std::size_t node_count() const { return labels_.size(); }
  std::size_t initial() const { return initial_; }
  const std::vector<WeightedEdge>& edges() const { return edges_; }
  const std::string& node_label(std::size_t node) const { return labels_.at(node); }

  std::vector<bool> reachable() const;
  // Throws MalformedError on dangling edge endpoints or a bad initial node.
  void validate() const;

 private:
  std::vector<std::string> labels_;
  std::vector<WeightedEdge> edges_;
  std::size_t initial_ = 0;
};

// Edge indices of a closed walk, in traversal order.
struct Cycle {
  std::vector<std::size_t> edges;
};

// Running sums sum_{t<=k} gamma*rho(u(t)) - mu(y(t)) for k = 0..horizon.
std::vector<Rational> partial_sums(std::span<const Symbol> inputs, std::span<const Symbol> outputs,
                                   const GainSpec& spec, std::size_t horizon);

struct StabilityVerdict {
  bool stable = true;
  std::optional<Cycle> witness;  // a reachable cycle with negative weight
};

// Stable iff no reachable cycle has sum(gamma*rho - mu) < 0.
StabilityVerdict verify_gain_stable(const WeightedGraph& graph, const Rational& gamma);

// Maximum over reachable cycles of sum(mu)/sum(rho); +inf when some reachable
// cycle has sum(rho) = 0 < sum(mu). Requires nonnegative weights.
ExtendedRational compute_gain(const WeightedGraph& graph);

// A reachable cycle with sum(gamma*rho - mu) = 0 and sum(mu) > 0, i.e. one
// whose ratio equals gamma. Requires that no reachable cycle is negative at
// gamma; returns nullopt when no such cycle exists.
std::optional<Cycle> critical_cycle(const WeightedGraph& graph, const Rational& gamma);

struct CycleMean {
  Rational mean;
  Cycle cycle;
};

enum class EdgeWeight { kRho, kMu };

// Karp's maximum cycle mean restricted to cycles reachable from the initial
// node. Returns nullopt when no cycle is reachable.
std::optional<CycleMean> max_cycle_mean(const WeightedGraph& graph,
                                        const std::function<Rational(const WeightedEdge&)>& weight);
std::optional<CycleMean> max_cycle_mean(const WeightedGraph& graph, EdgeWeight weight);
// Node-weighted variant: each edge carries the weight of its source node.
std::optional<CycleMean> max_cycle_mean(const WeightedGraph& graph,
                                        std::span<const Rational> node_weights);

struct ComposedValuations {
  Valuation rho;  // over the first alphabet of rho_s
  Valuation mu;   // over the first alphabet of mu_s
};

// rho(r)  = max_w { rho_s(r,w) - tau*mu_delta(w) }
// mu(v)   = min_z { mu_s(v,z) - tau*gamma_delta*rho_delta(z) }
ComposedValuations small_gain_compose(const PairValuation& rho_s, const PairValuation& mu_s,
                                      const Valuation& rho_delta, const Valuation& mu_delta,
                                      const Rational& gamma_delta, const Rational& tau);

}  // namespace dfmsynth

#endif  // DFMSYNTH_GAIN_H_
