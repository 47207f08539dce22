#include "dronesched/schedule.hpp"

#include <gtest/gtest.h>

#include <json.hpp>

#include "dronesched/greedy.hpp"
#include "test_util.hpp"

namespace dronesched {
namespace {

TEST(ValidateSchedule, Tiny1RoundTripReport) {
  const Instance inst = testutil::tiny1();
  const CoverageReport report =
      validate_schedule(inst, testutil::tiny1_round_trip());
  EXPECT_EQ(report.covered, 1);
  EXPECT_EQ(report.total, 1);
  EXPECT_EQ(report.trips, 2);
  EXPECT_EQ(report.covered_flags.at(1, 2), 1);
  EXPECT_EQ(report.covered_flags.at(0, 0), 1);
  EXPECT_EQ(report.covered_flags.at(0, 2), 0);
}

TEST(ValidateSchedule, AllHoverCoversNothing) {
  const Instance inst = testutil::tiny1();
  const CoverageReport report = validate_schedule(inst, testutil::all_hover(inst));
  EXPECT_EQ(report.covered, 0);
  EXPECT_EQ(report.total, 1);
  EXPECT_EQ(report.trips, 0);
}

TEST(ValidateSchedule, BoundaryViolationAtStart) {
  const Instance inst = testutil::tiny1();
  Schedule sched = testutil::all_hover(inst);
  sched.trajectories[0][0] = AgentState::hover(1);
  // also fix t=1..: keep all-hover(0); transition hover(1)->hover(0) would
  // trip first at t=1, but the boundary check at t=0 runs before it.
  try {
    validate_schedule(inst, sched);
    FAIL() << "expected ValidationError";
  } catch (const ValidationError& e) {
    EXPECT_EQ(e.agent, 0);
    EXPECT_EQ(e.time, 0);
    EXPECT_NE(std::string(e.what()).find("boundary"), std::string::npos);
  }
}

TEST(ValidateSchedule, FinalBoundaryViolation) {
  TravelTimeMatrix travel{{{0, 1}, {1, 0}}};
  const Instance inst =
      build_instance(5, travel, {AgentSpec{0, 0, 0}}, DemandMatrix(2, 5));
  Schedule sched;
  sched.trajectories = {{AgentState::hover(0), AgentState::transit(0, 1, 1),
                         AgentState::hover(1), AgentState::hover(1),
                         AgentState::hover(1)}};
  try {
    validate_schedule(inst, sched);
    FAIL() << "expected ValidationError";
  } catch (const ValidationError& e) {
    EXPECT_EQ(e.agent, 0);
    EXPECT_EQ(e.time, 4);
  }
}

TEST(ValidateSchedule, IllegalHoverJump) {
  const Instance inst = testutil::tiny1();
  Schedule sched = testutil::all_hover(inst);
  sched.trajectories[0][2] = AgentState::hover(1);
  try {
    validate_schedule(inst, sched);
    FAIL() << "expected ValidationError";
  } catch (const ValidationError& e) {
    EXPECT_EQ(e.agent, 0);
    EXPECT_EQ(e.time, 2);
    EXPECT_NE(std::string(e.what()).find("illegal transition"), std::string::npos);
    EXPECT_NE(std::string(e.what()).find("hover(0)"), std::string::npos);
    EXPECT_NE(std::string(e.what()).find("hover(1)"), std::string::npos);
  }
}

TEST(ValidateSchedule, TransitStepMustAdvance) {
  TravelTimeMatrix travel{{{0, 2}, {2, 0}}};
  const Instance inst =
      build_instance(6, travel, {AgentSpec{0, 0, 0}}, DemandMatrix(2, 6));
  Schedule sched;
  sched.trajectories = {{AgentState::hover(0), AgentState::transit(0, 1, 1),
                         AgentState::transit(0, 1, 1), AgentState::hover(1),
                         AgentState::transit(1, 0, 1), AgentState::hover(0)}};
  try {
    validate_schedule(inst, sched);
    FAIL() << "expected ValidationError";
  } catch (const ValidationError& e) {
    EXPECT_EQ(e.time, 2);
  }
}

TEST(ValidateSchedule, TransitStepOutOfRange) {
  const Instance inst = testutil::tiny1();
  Schedule sched = testutil::tiny1_round_trip();
  sched.trajectories[0][1] = AgentState::transit(0, 1, 2);  // cost(0,1)=1
  try {
    validate_schedule(inst, sched);
    FAIL() << "expected ValidationError";
  } catch (const ValidationError& e) {
    EXPECT_EQ(e.time, 1);
    EXPECT_NE(std::string(e.what()).find("step"), std::string::npos);
  }
}

TEST(ValidateSchedule, ArrivalMustLandAtDestination) {
  const Instance inst = testutil::tiny1();
  Schedule sched = testutil::tiny1_round_trip();
  sched.trajectories[0][2] = AgentState::hover(0);  // should be hover(1)
  EXPECT_THROW(validate_schedule(inst, sched), ValidationError);
}

TEST(ValidateSchedule, ShapeMismatches) {
  const Instance inst = testutil::tiny1();
  Schedule sched;
  EXPECT_THROW(validate_schedule(inst, sched), ValidationError);
  sched.trajectories = {{AgentState::hover(0)}};
  EXPECT_THROW(validate_schedule(inst, sched), ValidationError);
}

TEST(CoverageScore, RoundTripCoversTheCell) {
  const Instance inst = testutil::tiny1();
  EXPECT_EQ(coverage_score(inst, testutil::tiny1_round_trip()),
            (std::pair<int, int>{1, 1}));
}

TEST(CoverageScore, MultipleAgentsCountOnce) {
  TravelTimeMatrix travel{{{0}}};
  DemandMatrix demand(1, 4);
  demand.at(0, 1) = 1;
  const Instance inst = build_instance(
      4, travel, {AgentSpec{0, 0, 0}, AgentSpec{1, 0, 0}}, demand);
  EXPECT_EQ(coverage_score(inst, testutil::all_hover(inst)),
            (std::pair<int, int>{1, 1}));
}

TEST(CoverageScore, ZeroDemand) {
  TravelTimeMatrix travel{{{0, 1}, {1, 0}}};
  const Instance inst =
      build_instance(5, travel, {AgentSpec{0, 0, 0}}, DemandMatrix(2, 5));
  EXPECT_EQ(coverage_score(inst, testutil::all_hover(inst)),
            (std::pair<int, int>{0, 0}));
}

TEST(TripCount, CountsDepartures) {
  EXPECT_EQ(trip_count(testutil::tiny1_round_trip()), 2);
  EXPECT_EQ(trip_count(testutil::all_hover(testutil::tiny1())), 0);
  // One-way relocation: a single departure.
  Schedule one_way;
  one_way.trajectories = {{AgentState::hover(0), AgentState::hover(0),
                           AgentState::hover(0), AgentState::transit(0, 1, 1),
                           AgentState::hover(1)}};
  EXPECT_EQ(trip_count(one_way), 1);
}

TEST(ScheduleJson, SerializationContent) {
  const Instance inst = testutil::tiny1();
  const std::string text = serialize_schedule(inst, testutil::tiny1_round_trip());
  const auto j = nlohmann::json::parse(text);
  EXPECT_EQ(j["version"], 1);
  EXPECT_EQ(j["agents"].size(), 1u);
  EXPECT_EQ(j["agents"][0][0], nlohmann::json::parse(R"({"s":"h","n":0})"));
  EXPECT_EQ(j["agents"][0][1],
            nlohmann::json::parse(R"({"s":"t","from":0,"to":1,"k":1})"));
  EXPECT_EQ(j["summary"],
            nlohmann::json::parse(R"({"covered":1,"total":1,"trips":2})"));
}

TEST(ScheduleJson, RoundTrip) {
  const Instance inst = testutil::tiny1();
  const Schedule sched = testutil::tiny1_round_trip();
  EXPECT_EQ(parse_schedule(inst, serialize_schedule(inst, sched)), sched);
}

TEST(ScheduleJson, RejectsSummaryMismatch) {
  const Instance inst = testutil::tiny1();
  std::string text = serialize_schedule(inst, testutil::tiny1_round_trip());
  const auto pos = text.find("\"covered\":1");
  ASSERT_NE(pos, std::string::npos);
  text.replace(pos, 11, "\"covered\":0");
  EXPECT_THROW(parse_schedule(inst, text), ParseError);
}

TEST(ScheduleJson, RejectsTransitStepBeyondCost) {
  const Instance inst = testutil::tiny1();
  const std::string text =
      R"({"version":1,"agents":[[{"s":"h","n":0},{"s":"t","from":0,"to":1,"k":2},)"
      R"({"s":"h","n":1},{"s":"t","from":1,"to":0,"k":1},{"s":"h","n":0}]],)"
      R"("summary":{"covered":1,"total":1,"trips":2}})";
  EXPECT_THROW(parse_schedule(inst, text), ValidationError);
}

TEST(ScheduleProperties, AgentPermutationInvariance) {
  for (std::uint64_t seed = 1; seed <= 8; ++seed) {
    const Instance inst = generate_instance(4, 8, 3, 0.25, 1, 2, seed);
    auto [sched, covered] = rollout(inst, {0, 1, 2});
    const auto [score, total] = coverage_score(inst, sched);
    ASSERT_EQ(score, covered);
    // Permuting trajectories needs matching agents; swapping two agents with
    // identical specs keeps the schedule valid.
    for (int i = 0; i < 3; ++i) {
      for (int j = i + 1; j < 3; ++j) {
        if (inst.agents[i].init_node == inst.agents[j].init_node &&
            inst.agents[i].fin_node == inst.agents[j].fin_node) {
          Schedule swapped = sched;
          std::swap(swapped.trajectories[i], swapped.trajectories[j]);
          EXPECT_EQ(coverage_score(inst, swapped).first, score);
          EXPECT_EQ(trip_count(swapped), trip_count(sched));
        }
      }
    }
    (void)total;
  }
}

TEST(ScheduleProperties, RemovingAnAgentNeverIncreasesCoverage) {
  for (std::uint64_t seed = 1; seed <= 8; ++seed) {
    const Instance inst = generate_instance(4, 8, 3, 0.25, 1, 2, seed);
    auto [sched, covered] = rollout(inst, {0, 1, 2});
    (void)covered;
    const int full = coverage_score(inst, sched).first;
    for (int drop = 0; drop < 3; ++drop) {
      std::vector<AgentSpec> agents;
      Schedule sub;
      for (int a = 0; a < 3; ++a) {
        if (a == drop) continue;
        agents.push_back(inst.agents[a]);
        sub.trajectories.push_back(sched.trajectories[a]);
      }
      const Instance sub_inst =
          build_instance(inst.horizon, inst.travel, agents, inst.demand);
      EXPECT_LE(coverage_score(sub_inst, sub).first, full);
    }
  }
}

}  // namespace
}  // namespace dronesched
