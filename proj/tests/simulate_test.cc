#include "dfmsynth/simulate.h"

#include <gtest/gtest.h>

#include "dfmsynth/errors.h"

namespace dfmsynth {
namespace {

const Plant1D& tank() {
  static const Plant1D p = make_tank(reference_tank_params());
  return p;
}

ErrorModel tank_model() { return mismatch_error_model(tank().control_names()); }

const SynthesisResult& level_three() {
  static const SynthesisResult result = [] {
    PipelineOptions options;
    options.tie_order = {"Pump", "Drain"};
    auto r = synthesize_level(tank(), reach_and_hold_objective(), tank_model(), 3, options);
    if (!r.success) throw std::runtime_error("level 3 synthesis failed");
    return std::move(*r.success);
  }();
  return result;
}

ClosedLoopRun run(const Rational& x0, std::size_t steps) {
  const SynthesisResult& r = level_three();
  return closed_loop_sim(tank(), r.controller, x0, steps, reach_and_hold_objective(), &r.observer);
}

GTEST_TEST(ClosedLoopTest, ZeroStepsGivesOneRow) {
  const ClosedLoopRun rows = run(5, 0);
  ASSERT_EQ(rows.size(), 1u);
  EXPECT_EQ(rows[0].t, 0u);
  EXPECT_EQ(rows[0].x, 5);
  EXPECT_EQ(rows[0].v, 1);
  EXPECT_EQ(rows[0].partial_sum, -1);
}

GTEST_TEST(ClosedLoopTest, FromEmptyTankEntersBand) {
  const ClosedLoopRun rows = run(0, 60);
  const ObjectiveReport report = empirical_objective_check(rows, reach_and_hold_objective());
  ASSERT_TRUE(report.last_nonzero_v.has_value());
  EXPECT_LT(*report.last_nonzero_v, 60u);
  EXPECT_EQ(rows.back().v, 0);
  EXPECT_GE(report.min_partial_sum, -60);
}

GTEST_TEST(ClosedLoopTest, FromAboveBandDrainsIntoBand) {
  const ClosedLoopRun rows = run(parse_rational("23.75"), 40);
  // The controller does not yet know where the level is, so it overshoots
  // before draining back.
  EXPECT_EQ(rows[2].v, 1);
  for (std::size_t t = 16; t < rows.size(); ++t) EXPECT_EQ(rows[t].v, 0) << "t=" << t;
}

GTEST_TEST(ClosedLoopTest, RejectsStateOutsideRange) {
  EXPECT_THROW(run(-1, 3), DomainError);
  EXPECT_THROW(run(31, 3), DomainError);
}

GTEST_TEST(ClosedLoopTest, WithoutObserverRowsCarryNoW) {
  const SynthesisResult& r = level_three();
  const ClosedLoopRun rows = closed_loop_sim(tank(), r.controller, 10, 20, reach_and_hold_objective());
  for (const auto& row : rows) EXPECT_FALSE(row.w.has_value());
  EXPECT_THROW(certificate_violation(rows, r.certificate, reach_and_hold_objective(), tank_model(),
                                     tank().control_names()),
               InvariantError);
}

// Every x0 on a 0.25 cm grid: the certified inequality holds for T <= 1000
// and the plant is absorbed by the band.
GTEST_TEST(ClosedLoopTest, CertifiedInequalityOnGrid) {
  const SynthesisResult& r = level_three();
  for (int i = 0; i <= 120; ++i) {
    const Rational x0(i, 4);
    const ClosedLoopRun rows = run(x0, 1000);
    EXPECT_FALSE(certificate_violation(rows, r.certificate, reach_and_hold_objective(), tank_model(),
                                       tank().control_names())
                     .has_value())
        << "x0=" << to_decimal_string(x0);
    const ObjectiveReport report = empirical_objective_check(rows, reach_and_hold_objective());
    EXPECT_TRUE(!report.last_nonzero_v || *report.last_nonzero_v < 60u) << "x0=" << to_decimal_string(x0);
    EXPECT_GE(report.min_partial_sum, -r.certificate.value_bound) << "x0=" << to_decimal_string(x0);
  }
}

GTEST_TEST(ClosedLoopTest, ViolationDetectedWithTightenedBound) {
  const SynthesisResult& r = level_three();
  Certificate tight = r.certificate;
  tight.value_bound = 0;
  const ClosedLoopRun rows = run(0, 100);
  const auto t = certificate_violation(rows, tight, reach_and_hold_objective(), tank_model(), tank().control_names());
  ASSERT_TRUE(t.has_value());
  EXPECT_EQ(*t, 0u);
}

GTEST_TEST(ObjectiveCheckTest, Examples) {
  ClosedLoopRun rows(4);
  const int v[] = {1, 1, 0, 0};
  for (std::size_t t = 0; t < 4; ++t) {
    rows[t].t = t;
    rows[t].v = v[t];
  }
  const ObjectiveReport report = empirical_objective_check(rows, reach_and_hold_objective());
  EXPECT_EQ(report.min_partial_sum, -2);
  EXPECT_EQ(report.last_nonzero_v, 1u);
  rows[3].v = 1;
  EXPECT_EQ(empirical_objective_check(rows, reach_and_hold_objective()).last_nonzero_v, 3u);
}

GTEST_TEST(SweepTest, ThirteenPoints) {
  const auto xs = initial_condition_sweep(tank());
  ASSERT_EQ(xs.size(), 13u);
  EXPECT_EQ(xs.front(), 0);
  EXPECT_EQ(xs[1], parse_rational("2.5"));
  EXPECT_EQ(xs.back(), 30);
  EXPECT_THROW(initial_condition_sweep(tank(), 1), ParameterError);
}

GTEST_TEST(CsvTest, HeaderAndRows) {
  const ClosedLoopRun rows = run(parse_rational("2.5"), 2);
  const std::string csv = write_trajectory_csv(rows, tank().control_names());
  EXPECT_EQ(csv.substr(0, csv.find('\n')), "t,x_cm,y,u,v,partial_sum");
  EXPECT_NE(csv.find("\n0,2.5,Empty,Pump,1,-1\n"), std::string::npos) << csv;
  EXPECT_NE(csv.find("\n1,3.75,Empty,Pump,1,-2\n"), std::string::npos) << csv;
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 4);
}

}  // namespace
}  // namespace dfmsynth
