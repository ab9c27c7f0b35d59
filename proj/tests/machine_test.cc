#include "dfmsynth/machine.h"

#include <deque>
#include <random>

#include <gtest/gtest.h>

#include "dfmsynth/errors.h"

namespace dfmsynth {
namespace {

Dfm echo_machine() {
  Dfm m;
  m.state_labels = {"q"};
  m.inputs = {"a", "b"};
  m.outputs = {"a", "b"};
  m.next = {{0, 0}};
  m.out = {{0, 1}};
  return m;
}

Dfm toggle_machine() {
  Dfm m;
  m.state_labels = {"s0", "s1"};
  m.inputs = {"a"};
  m.outputs = {"s0", "s1"};
  m.next = {{1}, {0}};
  m.out = {{0}, {1}};
  return m;
}

Dfm random_machine(std::mt19937_64& rng, std::size_t states, std::size_t inputs, std::size_t outputs) {
  std::uniform_int_distribution<std::size_t> q(0, states - 1), y(0, outputs - 1);
  Dfm m;
  for (std::size_t s = 0; s < states; ++s) m.state_labels.push_back("s" + std::to_string(s));
  for (std::size_t u = 0; u < inputs; ++u) m.inputs.push_back("u" + std::to_string(u));
  for (std::size_t k = 0; k < outputs; ++k) m.outputs.push_back("y" + std::to_string(k));
  m.next.assign(states, std::vector<StateId>(inputs));
  m.out.assign(states, std::vector<std::size_t>(inputs));
  for (std::size_t s = 0; s < states; ++s) {
    for (std::size_t u = 0; u < inputs; ++u) {
      m.next[s][u] = q(rng);
      m.out[s][u] = y(rng);
    }
  }
  m.initial = q(rng);
  return m;
}

GTEST_TEST(DfmTest, EchoAndToggle) {
  const std::vector<Symbol> aba{"a", "b", "a"};
  EXPECT_EQ(dfm_run(echo_machine(), aba), aba);
  const std::vector<Symbol> aaa{"a", "a", "a"};
  EXPECT_EQ(dfm_run(toggle_machine(), aaa), (std::vector<Symbol>{"s0", "s1", "s0"}));
}

GTEST_TEST(DfmTest, RejectsForeignSymbol) {
  const std::vector<Symbol> bad{"a", "c"};
  EXPECT_THROW(dfm_run(echo_machine(), bad), AlphabetError);
}

GTEST_TEST(DfmTest, ValidateRejectsPartialTables) {
  Dfm m = toggle_machine();
  m.next[1].clear();
  EXPECT_THROW(m.validate(), MalformedError);
  m = toggle_machine();
  m.initial = 5;
  EXPECT_THROW(m.validate(), MalformedError);
}

GTEST_TEST(DfmTest, DeterministicAndPrefixConsistent) {
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 100; ++trial) {
    const Dfm m = random_machine(rng, 5, 3, 3);
    std::uniform_int_distribution<std::size_t> u(0, 2);
    std::vector<Symbol> word;
    for (int i = 0; i < 20; ++i) word.push_back(m.inputs[u(rng)]);
    const auto full = dfm_run(m, word);
    EXPECT_EQ(full, dfm_run(m, word));
    ASSERT_EQ(full.size(), word.size());
    for (std::size_t k = 0; k <= word.size(); ++k) {
      const auto prefix = dfm_run(m, std::span<const Symbol>(word).first(k));
      EXPECT_TRUE(std::equal(prefix.begin(), prefix.end(), full.begin()));
    }
  }
}

GTEST_TEST(ReachableTest, Examples) {
  Dfm m = toggle_machine();
  m.state_labels.push_back("s_dead");
  m.next.push_back({2});
  m.out.push_back({0});
  EXPECT_EQ(reachable_states(m), (std::vector<bool>{true, true, false}));
  EXPECT_EQ(reachable_states(echo_machine()), std::vector<bool>{true});
}

GTEST_TEST(ReachableTest, MatchesWordEnumeration) {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 100; ++trial) {
    const Dfm m = random_machine(rng, 6, 2, 2);
    // Every reachable state is reached by some word of length < |Q|.
    std::vector<bool> seen(m.state_count(), false);
    for (std::size_t len = 0; len < m.state_count(); ++len) {
      for (std::size_t code = 0; code < (std::size_t{1} << len); ++code) {
        StateId q = m.initial;
        for (std::size_t i = 0; i < len; ++i) q = m.next[q][(code >> i) & 1];
        seen[q] = true;
      }
    }
    EXPECT_EQ(reachable_states(m), seen);
  }
}

GTEST_TEST(PairSymbolTest, RoundTrip) {
  EXPECT_EQ(pair_symbol("Pump", "1"), "Pump/1");
  EXPECT_EQ(split_pair_symbol("Full/Drain"), std::make_pair(Symbol("Full"), Symbol("Drain")));
  EXPECT_THROW(split_pair_symbol("Full"), AlphabetError);
}

// Plant over (u,w) -> (y,z) with y = state bit, z = u, state toggles on w=1.
Dfm two_state_plant(bool feedthrough) {
  Dfm m;
  m.state_labels = {"p0", "p1"};
  for (const char* u : {"a", "b"}) {
    for (const char* w : {"0", "1"}) m.inputs.push_back(pair_symbol(u, w));
  }
  for (const char* y : {"y0", "y1"}) {
    for (const char* z : {"a", "b"}) m.outputs.push_back(pair_symbol(y, z));
  }
  m.next.assign(2, std::vector<StateId>(4));
  m.out.assign(2, std::vector<std::size_t>(4));
  for (StateId q = 0; q < 2; ++q) {
    for (std::size_t in = 0; in < 4; ++in) {
      const std::size_t u = in / 2, w = in % 2;
      m.next[q][in] = w ? 1 - q : q;
      const std::size_t y = feedthrough ? u : q;
      m.out[q][in] = y * 2 + u;
    }
  }
  return m;
}

Dfm echo_controller() {
  Dfm k;
  k.state_labels = {"k"};
  k.inputs = {"y0", "y1"};
  k.outputs = {"a", "b"};
  k.next = {{0, 0}};
  k.out = {{0, 1}};
  return k;
}

GTEST_TEST(FeedbackTest, EchoControllerOnTwoStatePlant) {
  const Nfsm closed = feedback_interconnect(two_state_plant(false), echo_controller());
  closed.validate();
  EXPECT_EQ(closed.state_count(), 2u);
  EXPECT_EQ(closed.inputs, (std::vector<Symbol>{"0", "1"}));
  EXPECT_EQ(closed.outputs, (std::vector<Symbol>{"a", "b"}));
  // From p0: y = y0, echo gives u = a, z = a.
  const auto& e = closed.edges[closed.initial][0].front();
  EXPECT_EQ(closed.outputs[e.output], "a");
  EXPECT_EQ(e.label, "y=y0,u=a");
}

GTEST_TEST(FeedbackTest, AlgebraicLoopIsIllPosed) {
  EXPECT_THROW(feedback_interconnect(two_state_plant(true), echo_controller()), IllPosedError);
}

GTEST_TEST(FeedbackTest, ConstantControllerResolvesFeedthrough) {
  Dfm k = echo_controller();
  k.out = {{1, 1}};
  const Nfsm closed = feedback_interconnect(two_state_plant(true), k);
  const auto& e = closed.edges[closed.initial][0].front();
  EXPECT_EQ(e.label, "y=y1,u=b");
}

GTEST_TEST(FeedbackTest, ReachableProductStatesProjectToReachableComponents) {
  std::mt19937_64 rng(9);
  for (int trial = 0; trial < 50; ++trial) {
    Dfm plant = two_state_plant(false);
    Dfm k = random_machine(rng, 3, 2, 2);
    k.inputs = {"y0", "y1"};
    k.outputs = {"a", "b"};
    const Nfsm closed = feedback_interconnect(plant, k);
    const auto rp = reachable_states(plant);
    const auto rk = reachable_states(k);
    for (const auto& label : closed.state_labels) {
      const auto comma = label.find(',');
      const std::string p = label.substr(1, comma - 1);
      const std::string c = label.substr(comma + 1, label.size() - comma - 2);
      EXPECT_TRUE(rp[plant.state_index(p)]);
      EXPECT_TRUE(rk[k.state_index(c)]);
    }
  }
}

GTEST_TEST(TableTest, RoundTrip) {
  std::mt19937_64 rng(13);
  for (int trial = 0; trial < 30; ++trial) {
    const Dfm m = random_machine(rng, 7, 3, 2);
    const std::string text = write_dfm_table(m);
    const Dfm back = read_dfm_table(text);
    EXPECT_EQ(write_dfm_table(back), text);
    EXPECT_EQ(back.state_labels, m.state_labels);
    EXPECT_EQ(back.next, m.next);
    EXPECT_EQ(back.out, m.out);
    EXPECT_EQ(back.initial, m.initial);
  }
}

GTEST_TEST(TableTest, RejectsBrokenTables) {
  EXPECT_THROW(read_dfm_table("dfm\ninputs a\noutputs b\ninitial q\n"), ConfigError);
  EXPECT_THROW(read_dfm_table("dfm\ninputs a\noutputs b\ninitial q\nq a q b\nq a q b\n"), ConfigError);
  EXPECT_THROW(read_dfm_table("dfm\ninputs a\noutputs b\ninitial q\nq a q c\n"), AlphabetError);
  EXPECT_THROW(read_dfm_table("machine\n"), ConfigError);
  const Dfm ok = read_dfm_table("# comment\ndfm\ninputs a\noutputs b\ninitial q\nq a q b\n");
  EXPECT_EQ(ok.state_count(), 1u);
}

}  // namespace
}  // namespace dfmsynth
