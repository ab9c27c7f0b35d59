#ifndef DFMSYNTH_MACHINE_H_
#define DFMSYNTH_MACHINE_H_

#include <cstddef>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "dfmsynth/gain.h"

namespace dfmsynth {

using StateId = std::size_t;

// Deterministic finite state machine: q(t+1) = f(q,u), y(t) = g(q,u).
// Both tables are indexed [state][input index] and must be total.
struct Dfm {
  std::vector<std::string> state_labels;
  std::vector<Symbol> inputs;
  std::vector<Symbol> outputs;
  StateId initial = 0;
  std::vector<std::vector<StateId>> next;
  std::vector<std::vector<std::size_t>> out;

  std::size_t state_count() const { return state_labels.size(); }
  std::size_t input_index(const Symbol& u) const;    // AlphabetError if absent
  std::size_t output_index(const Symbol& y) const;   // AlphabetError if absent
  std::size_t state_index(const std::string& label) const;

  // Throws MalformedError unless both tables are total and q0 is a state.
  void validate() const;
};

std::vector<Symbol> dfm_run(const Dfm& machine, std::span<const Symbol> inputs);
std::vector<bool> reachable_states(const Dfm& machine);

// Channel pairs such as (u, w) are carried as single composite symbols.
Symbol pair_symbol(const Symbol& first, const Symbol& second);
std::pair<Symbol, Symbol> split_pair_symbol(const Symbol& symbol);

struct NfsmEdge {
  StateId target = 0;
  std::size_t output = 0;
  std::string label;  // the internal channel values along this edge
};

// Finite state machine whose (state, input) pairs have one or more
// successors, each carrying its own output.
struct Nfsm {
  std::vector<std::string> state_labels;
  std::vector<Symbol> inputs;
  std::vector<Symbol> outputs;
  StateId initial = 0;
  std::vector<std::vector<std::vector<NfsmEdge>>> edges;  // [state][input]

  std::size_t state_count() const { return state_labels.size(); }
  void validate() const;
};

// Closes the loop y -> controller -> u around `plant`, whose inputs are the
// composite symbols (u, w) and outputs (y, z). The controller reads y and
// emits u. The result keeps the residual channels: w in, z out. States are
// the reachable pairs (plant state, controller state).
//
// At every reachable state pair one side must not need the other's current
// output: either the plant's y does not depend on the current u, or the
// controller's u does not depend on the current y. Otherwise IllPosedError.
Nfsm feedback_interconnect(const Dfm& plant, const Dfm& controller);

// Text table, one transition per line after a short header:
//   dfm
//   inputs <u...>
//   outputs <y...>
//   initial <state>
//   <state> <input> <next-state> <output>
// Labels and symbols must not contain whitespace.
std::string write_dfm_table(const Dfm& machine);
Dfm read_dfm_table(const std::string& text);

}  // namespace dfmsynth

#endif  // DFMSYNTH_MACHINE_H_
