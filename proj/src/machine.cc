#include "dfmsynth/machine.h"

#include <algorithm>
#include <cctype>
#include <deque>
#include <map>
#include <sstream>

#include "dfmsynth/errors.h"

namespace dfmsynth {
namespace {

std::size_t index_of(const std::vector<Symbol>& alphabet, const Symbol& s, const char* what) {
  auto it = std::find(alphabet.begin(), alphabet.end(), s);
  if (it == alphabet.end()) throw AlphabetError(std::string(what) + " symbol '" + s + "' not in alphabet");
  return static_cast<std::size_t>(it - alphabet.begin());
}

bool has_whitespace(const std::string& s) {
  return s.empty() || std::any_of(s.begin(), s.end(), [](unsigned char c) { return std::isspace(c); });
}

}  // namespace

std::size_t Dfm::input_index(const Symbol& u) const { return index_of(inputs, u, "input"); }
std::size_t Dfm::output_index(const Symbol& y) const { return index_of(outputs, y, "output"); }
std::size_t Dfm::state_index(const std::string& label) const {
  return index_of(state_labels, label, "state");
}

void Dfm::validate() const {
  const std::size_t n = state_labels.size();
  if (n == 0) throw MalformedError("machine has no states");
  if (initial >= n) throw MalformedError("initial state out of range");
  if (next.size() != n || out.size() != n) throw MalformedError("transition table is not total");
  for (std::size_t q = 0; q < n; ++q) {
    if (next[q].size() != inputs.size() || out[q].size() != inputs.size()) {
      throw MalformedError("transition table is not total at state " + state_labels[q]);
    }
    for (std::size_t u = 0; u < inputs.size(); ++u) {
      if (next[q][u] >= n) throw MalformedError("successor out of range");
      if (out[q][u] >= outputs.size()) throw MalformedError("output out of range");
    }
  }
}

std::vector<Symbol> dfm_run(const Dfm& machine, std::span<const Symbol> inputs) {
  machine.validate();
  std::vector<Symbol> outputs;
  outputs.reserve(inputs.size());
  StateId q = machine.initial;
  for (const auto& u : inputs) {
    const std::size_t k = machine.input_index(u);
    outputs.push_back(machine.outputs[machine.out[q][k]]);
    q = machine.next[q][k];
  }
  return outputs;
}

std::vector<bool> reachable_states(const Dfm& machine) {
  machine.validate();
  std::vector<bool> seen(machine.state_count(), false);
  std::deque<StateId> queue{machine.initial};
  seen[machine.initial] = true;
  while (!queue.empty()) {
    StateId q = queue.front();
    queue.pop_front();
    for (StateId r : machine.next[q]) {
      if (!seen[r]) {
        seen[r] = true;
        queue.push_back(r);
      }
    }
  }
  return seen;
}

Symbol pair_symbol(const Symbol& first, const Symbol& second) { return first + "/" + second; }

std::pair<Symbol, Symbol> split_pair_symbol(const Symbol& symbol) {
  auto slash = symbol.find('/');
  if (slash == Symbol::npos || symbol.find('/', slash + 1) != Symbol::npos) {
    throw AlphabetError("'" + symbol + "' is not a pair symbol");
  }
  return {symbol.substr(0, slash), symbol.substr(slash + 1)};
}

void Nfsm::validate() const {
  const std::size_t n = state_labels.size();
  if (n == 0 || initial >= n) throw MalformedError("bad initial state");
  if (edges.size() != n) throw MalformedError("edge table is not total");
  for (const auto& row : edges) {
    if (row.size() != inputs.size()) throw MalformedError("edge table is not total");
    for (const auto& succ : row) {
      if (succ.empty()) throw MalformedError("(state, input) pair without successor");
      for (const auto& e : succ) {
        if (e.target >= n || e.output >= outputs.size()) throw MalformedError("edge out of range");
      }
    }
  }
}

Nfsm feedback_interconnect(const Dfm& plant, const Dfm& controller) {
  plant.validate();
  controller.validate();

  // Split the plant's composite alphabets into channel alphabets.
  std::vector<Symbol> us, ws, ys, zs;
  auto add_unique = [](std::vector<Symbol>& v, const Symbol& s) {
    if (std::find(v.begin(), v.end(), s) == v.end()) v.push_back(s);
  };
  std::map<std::pair<Symbol, Symbol>, std::size_t> plant_input;
  for (std::size_t k = 0; k < plant.inputs.size(); ++k) {
    auto [u, w] = split_pair_symbol(plant.inputs[k]);
    add_unique(us, u);
    add_unique(ws, w);
    plant_input[{u, w}] = k;
  }
  std::vector<std::pair<Symbol, Symbol>> plant_output;
  for (const auto& s : plant.outputs) {
    plant_output.push_back(split_pair_symbol(s));
    add_unique(ys, plant_output.back().first);
    add_unique(zs, plant_output.back().second);
  }
  if (plant_input.size() != us.size() * ws.size()) {
    throw AlphabetError("plant input alphabet is not a full product U x W");
  }
  for (const auto& u : controller.outputs) {
    if (std::find(us.begin(), us.end(), u) == us.end()) {
      throw AlphabetError("controller output '" + u + "' is not a plant control input");
    }
  }
  for (const auto& y : ys) controller.input_index(y);

  auto plant_y = [&](StateId q, const Symbol& u, const Symbol& w) {
    return plant_output[plant.out[q][plant_input.at({u, w})]].first;
  };
  auto y_depends_on_u = [&](StateId q) {
    for (const auto& w : ws) {
      for (const auto& u : us) {
        if (plant_y(q, u, w) != plant_y(q, us.front(), w)) return true;
      }
    }
    return false;
  };
  auto u_depends_on_y = [&](StateId k) {
    for (std::size_t y = 1; y < controller.inputs.size(); ++y) {
      if (controller.out[k][y] != controller.out[k][0]) return true;
    }
    return false;
  };

  Nfsm closed;
  closed.inputs = ws;
  closed.outputs = zs;
  std::map<std::pair<StateId, StateId>, StateId> ids;
  std::deque<std::pair<StateId, StateId>> queue;
  auto intern = [&](StateId q, StateId k) {
    auto [it, inserted] = ids.emplace(std::make_pair(q, k), closed.state_labels.size());
    if (inserted) {
      closed.state_labels.push_back("(" + plant.state_labels[q] + "," + controller.state_labels[k] + ")");
      closed.edges.emplace_back(ws.size());
      queue.emplace_back(q, k);
    }
    return it->second;
  };
  closed.initial = intern(plant.initial, controller.initial);

  while (!queue.empty()) {
    auto [q, k] = queue.front();
    queue.pop_front();
    const StateId from = ids.at({q, k});
    const bool plant_first = !y_depends_on_u(q);
    if (!plant_first && u_depends_on_y(k)) {
      throw IllPosedError("algebraic loop at state (" + plant.state_labels[q] + "," +
                          controller.state_labels[k] + ")");
    }
    for (std::size_t wi = 0; wi < ws.size(); ++wi) {
      const Symbol& w = ws[wi];
      Symbol y, u;
      if (plant_first) {
        y = plant_y(q, us.front(), w);
        u = controller.outputs[controller.out[k][controller.input_index(y)]];
      } else {
        u = controller.outputs[controller.out[k][0]];
      }
      const std::size_t pin = plant_input.at({u, w});
      const auto& [y_out, z_out] = plant_output[plant.out[q][pin]];
      if (!plant_first) y = y_out;
      const std::size_t cin = controller.input_index(y);
      NfsmEdge edge;
      edge.target = intern(plant.next[q][pin], controller.next[k][cin]);
      edge.output = static_cast<std::size_t>(std::find(zs.begin(), zs.end(), z_out) - zs.begin());
      edge.label = "y=" + y + ",u=" + u;
      closed.edges[from][wi].push_back(std::move(edge));
    }
  }
  return closed;
}

std::string write_dfm_table(const Dfm& machine) {
  machine.validate();
  auto check = [](const std::string& s) {
    if (has_whitespace(s)) throw ConfigError("label '" + s + "' is empty or contains whitespace");
  };
  std::ostringstream os;
  os << "dfm\ninputs";
  for (const auto& u : machine.inputs) {
    check(u);
    os << ' ' << u;
  }
  os << "\noutputs";
  for (const auto& y : machine.outputs) {
    check(y);
    os << ' ' << y;
  }
  os << "\ninitial " << machine.state_labels[machine.initial] << '\n';
  for (StateId q = 0; q < machine.state_count(); ++q) {
    check(machine.state_labels[q]);
    for (std::size_t u = 0; u < machine.inputs.size(); ++u) {
      os << machine.state_labels[q] << ' ' << machine.inputs[u] << ' '
         << machine.state_labels[machine.next[q][u]] << ' ' << machine.outputs[machine.out[q][u]]
         << '\n';
    }
  }
  return os.str();
}

Dfm read_dfm_table(const std::string& text) {
  std::istringstream is(text);
  std::string line;
  auto next_line = [&]() -> std::istringstream {
    while (std::getline(is, line)) {
      if (!line.empty() && line.find_first_not_of(" \t\r") != std::string::npos && line[0] != '#') {
        return std::istringstream(line);
      }
    }
    throw ConfigError("unexpected end of machine table");
  };
  auto expect = [](std::istringstream& ls, const std::string& keyword) {
    std::string word;
    ls >> word;
    if (word != keyword) throw ConfigError("expected '" + keyword + "' in machine table, got '" + word + "'");
  };

  Dfm m;
  {
    auto ls = next_line();
    expect(ls, "dfm");
  }
  {
    auto ls = next_line();
    expect(ls, "inputs");
    for (std::string s; ls >> s;) m.inputs.push_back(s);
  }
  {
    auto ls = next_line();
    expect(ls, "outputs");
    for (std::string s; ls >> s;) m.outputs.push_back(s);
  }
  std::string initial;
  {
    auto ls = next_line();
    expect(ls, "initial");
    ls >> initial;
  }

  struct Row {
    std::string state, input, next, output;
  };
  std::vector<Row> rows;
  std::map<std::string, StateId> ids;
  auto intern = [&](const std::string& label) {
    auto [it, inserted] = ids.emplace(label, m.state_labels.size());
    if (inserted) m.state_labels.push_back(label);
    return it->second;
  };
  while (std::getline(is, line)) {
    if (line.empty() || line[0] == '#' || line.find_first_not_of(" \t\r") == std::string::npos) continue;
    std::istringstream ls(line);
    Row r;
    std::string extra;
    if (!(ls >> r.state >> r.input >> r.next >> r.output) || (ls >> extra)) {
      throw ConfigError("malformed machine table row: " + line);
    }
    rows.push_back(std::move(r));
  }
  // States keep the order in which the table lists them.
  for (const auto& r : rows) intern(r.state);
  for (const auto& r : rows) intern(r.next);
  intern(initial);

  const std::size_t n = m.state_labels.size();
  m.initial = ids.at(initial);
  m.next.assign(n, std::vector<StateId>(m.inputs.size(), SIZE_MAX));
  m.out.assign(n, std::vector<std::size_t>(m.inputs.size(), SIZE_MAX));
  for (const auto& r : rows) {
    const StateId q = ids.at(r.state);
    const std::size_t u = m.input_index(r.input);
    if (m.next[q][u] != SIZE_MAX) throw ConfigError("duplicate transition for " + r.state + " " + r.input);
    m.next[q][u] = ids.at(r.next);
    m.out[q][u] = m.output_index(r.output);
  }
  for (StateId q = 0; q < n; ++q) {
    for (std::size_t u = 0; u < m.inputs.size(); ++u) {
      if (m.next[q][u] == SIZE_MAX) {
        throw ConfigError("missing transition for " + m.state_labels[q] + " " + m.inputs[u]);
      }
    }
  }
  return m;
}

}  // namespace dfmsynth
