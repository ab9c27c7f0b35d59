#include "dfmsynth/abstraction.h"

#include <random>
#include <sstream>

#include <gtest/gtest.h>

#include "dfmsynth/errors.h"

namespace dfmsynth {
namespace {

constexpr std::size_t kPump = 0;
constexpr std::size_t kDrain = 1;

const Plant1D& tank() {
  static const Plant1D p = make_tank(reference_tank_params());
  return p;
}

ObserverMachine observer(int level) { return build_observer(tank(), build_partition(tank(), 6, level)); }

Rational r(const char* text) { return parse_rational(text); }

GTEST_TEST(PartitionTest, Levels) {
  const Partition p1 = build_partition(tank(), 6, 1);
  EXPECT_EQ(p1.cells, 6u);
  EXPECT_EQ(p1.width, 5);
  const Partition p3 = build_partition(tank(), 6, 3);
  EXPECT_EQ(p3.cells, 24u);
  EXPECT_EQ(p3.width, r("5/4"));
  EXPECT_THROW(build_partition(tank(), 6, 0), ParameterError);
  EXPECT_THROW(build_partition(tank(), 0, 1), ParameterError);
}

GTEST_TEST(PartitionTest, CellsTileTheRange) {
  const Partition p = build_partition(tank(), 6, 2);
  EXPECT_EQ(p.cell(0), Interval::half_open(0, r("5/2")));
  EXPECT_EQ(p.cell(11), Interval::half_open(r("55/2"), 30));
  EXPECT_EQ(p.cell(12), Interval::closed(30, 30));
  EXPECT_EQ(p.cell_count(), 13u);
  EXPECT_THROW(p.cell(13), DomainError);
}

GTEST_TEST(SnapTest, Examples) {
  const Partition p1 = build_partition(tank(), 6, 1);
  EXPECT_EQ(snap(Interval::half_open(r("3.1"), r("7.2")), p1), (CellRange{0, 1}));
  EXPECT_EQ(snap(Interval::half_open(5, 10), p1), (CellRange{1, 1}));
  EXPECT_EQ(snap(Interval::closed(r("13.75"), r("18.75")), p1), (CellRange{2, 3}));
  EXPECT_THROW(snap(Interval::half_open(4, 4), p1), DomainError);
  const Partition p3 = build_partition(tank(), 6, 3);
  EXPECT_EQ(snap(Interval::closed(30, 30), p3), (CellRange{24, 24}));
  EXPECT_EQ(snap(Interval::half_open(r("28.75"), 30), p3), (CellRange{23, 23}));
  EXPECT_EQ(snap(Interval::closed(r("27.5"), r("28.75")), p3), (CellRange{22, 23}));
}

GTEST_TEST(SnapTest, SmallestCoveringRange) {
  const Partition p = build_partition(tank(), 6, 2);
  std::mt19937_64 rng(41);
  std::uniform_int_distribution<int> grid(0, 120);
  std::uniform_int_distribution<int> coin(0, 1);
  for (int trial = 0; trial < 2000; ++trial) {
    Rational a(grid(rng), 4), b(grid(rng), 4);
    if (b < a) std::swap(a, b);
    const Interval i{a, b, coin(rng) == 1 || a == b};
    const CellRange c = snap(i, p);
    const Interval u = range_interval(c, p);
    EXPECT_TRUE(u.contains(i.lo));
    if (i.hi_closed) EXPECT_TRUE(u.contains(i.hi));
    else EXPECT_TRUE(u.hi >= i.hi);
    // Dropping either end cell loses part of the interval.
    EXPECT_FALSE(p.cell(c.lo).intersect(i).empty());
    EXPECT_FALSE(p.cell(c.hi).intersect(i).empty());
  }
}

GTEST_TEST(ObserverTest, InitialStateIsFullRange) {
  for (int level = 1; level <= 4; ++level) {
    const ObserverMachine obs = observer(level);
    const ObserverState& s = obs.states[obs.initial];
    EXPECT_EQ(s.range, (CellRange{0, obs.partition.cells}));
    EXPECT_TRUE(s.ambiguous);
    EXPECT_EQ(s.vhat, 1);
  }
}

GTEST_TEST(ObserverTest, LevelThreeExactShift) {
  const ObserverMachine obs = observer(3);
  const auto s = obs.find({18, 19});
  ASSERT_TRUE(s.has_value());
  EXPECT_EQ(obs.states[*s].vhat, 0);
  const auto next = obs.successor(*s, Sensor::kFull, kDrain);
  ASSERT_TRUE(next.has_value());
  EXPECT_EQ(obs.states[*next].range, (CellRange{17, 18}));
}

GTEST_TEST(ObserverTest, LevelOneDrainFromUpperHalf) {
  const Partition p = build_partition(tank(), 6, 1);
  const Interval image = interval_image(tank(), kDrain, p.cell(3));
  EXPECT_EQ(image, Interval::half_open(r("13.75"), r("18.75")));
  EXPECT_EQ(snap(image, p), (CellRange{2, 3}));
}

GTEST_TEST(ObserverTest, InfeasibleReadingsHaveNoTransition) {
  const ObserverMachine obs = observer(3);
  const auto s = obs.find({18, 19});
  ASSERT_TRUE(s.has_value());
  EXPECT_FALSE(obs.states[*s].feasible(Sensor::kEmpty));
  EXPECT_TRUE(obs.states[*s].feasible(Sensor::kFull));
}

GTEST_TEST(ObserverTest, SingleCellsStaySingleAtLevelThree) {
  const ObserverMachine obs = observer(3);
  for (std::size_t s = 0; s < obs.states.size(); ++s) {
    if (obs.states[s].range.lo != obs.states[s].range.hi) continue;
    for (Sensor y : kSensorValues) {
      for (std::size_t u = 0; u < 2; ++u) {
        if (auto next = obs.successor(s, y, u)) {
          EXPECT_EQ(obs.states[*next].range.lo, obs.states[*next].range.hi) << obs.label(s);
        }
      }
    }
  }
}

GTEST_TEST(ObserverTest, VhatOverApproximatesV) {
  for (int level = 1; level <= 3; ++level) {
    const ObserverMachine obs = observer(level);
    for (const auto& s : obs.states) {
      if (s.vhat != 0) continue;
      const Interval u = range_interval(s.range, obs.partition);
      for (int k = 0; k <= 100; ++k) {
        const Rational x = u.lo + (u.hi - u.lo) * Rational(k, 100);
        if (u.contains(x)) EXPECT_EQ(tank().performance(x), 0);
      }
    }
  }
}

GTEST_TEST(DeltaBoundTest, TankLevels) {
  const std::vector<Rational> expected{1, 1, 0};
  for (int level = 1; level <= 3; ++level) {
    const DeltaBound b = delta_gain_bound(observer(level));
    EXPECT_EQ(b.gamma_bound, expected[level - 1]) << "level " << level;
    EXPECT_EQ(b.witness.empty(), b.gamma_bound == 0);
  }
}

GTEST_TEST(DeltaBoundTest, WitnessIsAnAmbiguousCycle) {
  const ObserverMachine obs = observer(1);
  const DeltaBound b = delta_gain_bound(obs);
  ASSERT_FALSE(b.witness.empty());
  for (std::size_t i = 0; i < b.witness.size(); ++i) {
    const auto& e = b.witness[i];
    EXPECT_EQ(obs.successor(e.state, e.y, e.control), e.target);
    EXPECT_EQ(e.target, b.witness[(i + 1) % b.witness.size()].state);
    EXPECT_TRUE(obs.states[e.state].ambiguous);
  }
}

GTEST_TEST(DeltaBoundTest, NonincreasingInLevel) {
  Rational prev = 2;
  for (int level = 1; level <= 4; ++level) {
    const Rational b = delta_gain_bound(observer(level)).gamma_bound;
    EXPECT_LE(b, prev);
    EXPECT_GE(b, 0);
    EXPECT_LE(b, 1);
    prev = b;
  }
}

GTEST_TEST(DeltaBoundTest, NonConstantRhoUsesGeneralGain) {
  const ObserverMachine obs = observer(1);
  ErrorModel model{Valuation({{"Pump", Rational(1)}, {"Drain", Rational(2)}}),
                   Valuation({{"0", Rational(0)}, {"1", Rational(1)}})};
  const DeltaBound b = delta_gain_bound(obs, model);
  const ObserverGraph og = observer_graph(obs, model);
  EXPECT_EQ(ExtendedRational::of(b.gamma_bound), compute_gain(og.graph));
  EXPECT_GT(b.gamma_bound, 0);
  EXPECT_LE(b.gamma_bound, 1);
}

GTEST_TEST(LiftTest, LevelThreeDrainFromTwentyThree) {
  const std::vector<std::size_t> u(4, kDrain);
  const auto steps = lift_trace(observer(3), tank(), 23, u);
  ASSERT_EQ(steps.size(), 5u);
  for (std::size_t t = 1; t < steps.size(); ++t) EXPECT_EQ(steps[t].w, 0) << "t=" << t;
}

GTEST_TEST(LiftTest, EmptyInputGivesInitialState) {
  const ObserverMachine obs = observer(2);
  const auto steps = lift_trace(obs, tank(), 7, {});
  ASSERT_EQ(steps.size(), 1u);
  EXPECT_EQ(steps[0].state, obs.initial);
}

GTEST_TEST(LiftTest, LevelOneMismatchOnStraddlingLoop) {
  const ObserverMachine obs = observer(1);
  const std::vector<std::size_t> u(3, kDrain);
  const auto steps = lift_trace(obs, tank(), r("16.25"), u);
  EXPECT_EQ(steps[2].w, 1);
  EXPECT_TRUE(obs.states[steps[2].state].ambiguous);
  EXPECT_EQ(obs.states[steps[2].state].range, (CellRange{2, 5}));
}

GTEST_TEST(LiftTest, UnambiguousStatesNeverMismatch) {
  for (int level = 1; level <= 3; ++level) {
    const ObserverMachine obs = observer(level);
    for (const auto& sample : random_traces(tank(), 200, 60, 100 + level)) {
      for (const auto& step : lift_trace(obs, tank(), sample.x0, sample.controls)) {
        if (!obs.states[step.state].ambiguous) EXPECT_EQ(step.w, 0);
      }
    }
  }
}

GTEST_TEST(InclusionTest, RandomTracesAllLevels) {
  const auto samples = random_traces(tank(), 1000, 200, 2024);
  for (int level = 1; level <= 3; ++level) {
    const CheckReport report = check_behavioral_inclusion(observer(level), tank(), samples);
    EXPECT_TRUE(report.passed) << report.message;
    EXPECT_EQ(report.traces, 1000u);
    EXPECT_EQ(report.steps, 1000u * 201u);
  }
}

GTEST_TEST(InclusionTest, ZeroLengthTraces) {
  const auto samples = random_traces(tank(), 20, 0, 1);
  EXPECT_TRUE(check_behavioral_inclusion(observer(1), tank(), samples).passed);
}

GTEST_TEST(InclusionTest, MisWiredObserverIsCaught) {
  ObserverMachine obs = observer(2);
  for (auto& s : obs.states) std::swap(s.next[0], s.next[1]);
  const auto samples = random_traces(tank(), 50, 40, 5);
  const CheckReport report = check_behavioral_inclusion(obs, tank(), samples);
  EXPECT_FALSE(report.passed);
  EXPECT_TRUE(report.failed_trace.has_value());
  EXPECT_FALSE(report.message.empty());
}

GTEST_TEST(ConditionBTest, NestedLevels) {
  const auto samples = grid_traces(tank(), 61, 100, 77);
  const Objective objective = reach_and_hold_objective();
  for (int level = 1; level <= 2; ++level) {
    const CheckReport report = check_condition_b(observer(level), observer(level + 1), tank(), objective, samples);
    EXPECT_TRUE(report.passed) << report.message;
    EXPECT_EQ(report.traces, 61u);
  }
}

GTEST_TEST(ConditionBTest, IdenticalLevels) {
  const auto samples = grid_traces(tank(), 13, 30, 1);
  const ObserverMachine obs = observer(2);
  EXPECT_TRUE(check_condition_b(obs, obs, tank(), reach_and_hold_objective(), samples).passed);
}

GTEST_TEST(ConditionBTest, ForcedVhatOnStraddlingStateFails) {
  ObserverMachine fine = observer(2);
  fine.states[fine.initial].vhat = 0;
  const auto samples = grid_traces(tank(), 5, 10, 3);
  const CheckReport report = check_condition_b(observer(1), fine, tank(), reach_and_hold_objective(), samples);
  EXPECT_FALSE(report.passed);
  EXPECT_EQ(report.failed_trace, 0u);
  EXPECT_EQ(report.failed_step, 0u);
}

GTEST_TEST(ConditionBTest, NonNestedPartitionsRejected) {
  const ObserverMachine a = build_observer(tank(), build_partition(tank(), 4, 1));
  const auto samples = grid_traces(tank(), 3, 3, 1);
  EXPECT_THROW(check_condition_b(observer(1), a, tank(), reach_and_hold_objective(), samples), ConfigError);
}

GTEST_TEST(ExactnessTest, LevelOneHasNone) {
  EXPECT_FALSE(check_eventual_exactness(observer(1), tank()).has_value());
  EXPECT_FALSE(check_eventual_exactness(observer(2), tank()).has_value());
}

// At level 3 a plant held in the band by alternating Pump/Drain reads Full
// forever, so no sound observer can learn that it is in band: v = 0 while
// vhat = 1 on a reachable cycle, and the open-loop condition must fail.
GTEST_TEST(ExactnessTest, LevelThreeOpenLoopHasUndecidedCycle) {
  const ObserverMachine obs = observer(3);
  EXPECT_FALSE(check_eventual_exactness(obs, tank()).has_value());
  std::vector<std::size_t> u;
  for (int i = 0; i < 100; ++i) u.push_back(i % 2 == 0 ? kPump : kDrain);
  const auto steps = lift_trace(obs, tank(), r("22.5"), u);
  for (std::size_t t = 50; t < steps.size(); ++t) {
    EXPECT_EQ(steps[t].v, 0);
    EXPECT_EQ(steps[t].vhat, 1);
  }
}

GTEST_TEST(ExactnessTest, AllDecidedObserverHasZeroTStar) {
  ObserverMachine obs;
  obs.partition = build_partition(tank(), 6, 1);
  obs.controls = tank().control_names();
  ObserverState s;
  s.range = {0, 0};
  s.predicted = Sensor::kEmpty;
  s.vhat = 1;
  s.next[0] = {0, 0};
  s.next[1] = {std::nullopt, std::nullopt};
  obs.states.push_back(s);
  const auto cert = check_eventual_exactness(obs, tank());
  ASSERT_TRUE(cert.has_value());
  EXPECT_EQ(cert->t_star, 0u);
}

GTEST_TEST(ExactnessTest, FilterRestrictsTransitions) {
  const ObserverMachine obs = observer(3);
  // Only Drain: every run ends at the bottom cell, which is decided.
  const auto cert = check_eventual_exactness(obs, tank(), [](const ObserverEdge& e) { return e.control == kDrain; });
  ASSERT_TRUE(cert.has_value());
  EXPECT_GT(cert->t_star, 0u);
}

GTEST_TEST(ChannelTest, OutputsPredictionCorrectedByW) {
  const ObserverMachine obs = observer(1);
  const Dfm m = observer_channel_dfm(obs);
  m.validate();
  EXPECT_EQ(m.state_count(), obs.states.size() + 1);
  EXPECT_EQ(m.inputs, (std::vector<Symbol>{"Pump/0", "Pump/1", "Drain/0", "Drain/1"}));
  const std::size_t s = obs.initial;
  const std::string predicted(sensor_name(obs.states[s].predicted));
  const auto [y0, z0] = split_pair_symbol(m.outputs[m.out[s][m.input_index("Drain/0")]]);
  EXPECT_EQ(y0, predicted);
  EXPECT_EQ(z0, "Drain");
  const auto [y1, z1] = split_pair_symbol(m.outputs[m.out[s][m.input_index("Drain/1")]]);
  EXPECT_NE(y1, predicted);
}

GTEST_TEST(EdgeListTest, OneLinePerTransition) {
  const ObserverMachine obs = observer(1);
  const std::string text = write_observer_edges(obs);
  std::size_t transitions = 0;
  for (std::size_t s = 0; s < obs.states.size(); ++s) {
    for (Sensor y : kSensorValues) {
      for (std::size_t u = 0; u < 2; ++u) transitions += obs.successor(s, y, u).has_value();
    }
  }
  std::size_t lines = 0, comments = 0;
  std::istringstream is(text);
  for (std::string line; std::getline(is, line);) (line[0] == '#' ? comments : lines)++;
  EXPECT_EQ(lines, transitions);
  EXPECT_EQ(comments, 3u);
}

}  // namespace
}  // namespace dfmsynth
