#include "dronesched/instance.hpp"

#include <gtest/gtest.h>

#include <json.hpp>

#include "test_util.hpp"

namespace dronesched {
namespace {

TEST(BuildInstance, Tiny1IsValid) {
  const Instance inst = testutil::tiny1();
  EXPECT_EQ(inst.num_nodes(), 2);
  EXPECT_EQ(inst.horizon, 5);
  EXPECT_EQ(inst.num_agents(), 1);
  EXPECT_EQ(inst.agents[0].id, 0);
  EXPECT_EQ(inst.travel(0, 1), 1);
  EXPECT_EQ(inst.demand.total(), 1);
  EXPECT_EQ(inst.demand.at(1, 2), 1);
}

TEST(BuildInstance, RejectsAsymmetricTravel) {
  TravelTimeMatrix travel{{{0, 1}, {2, 0}}};
  try {
    build_instance(5, travel, {AgentSpec{0, 0, 0}}, DemandMatrix(2, 5));
    FAIL() << "expected InstanceError";
  } catch (const InstanceError& e) {
    EXPECT_NE(std::string(e.what()).find("asymmetric"), std::string::npos);
  }
}

TEST(BuildInstance, RejectsUnreachableFinalNode) {
  TravelTimeMatrix travel{{{0, 3}, {3, 0}}};
  try {
    build_instance(3, travel, {AgentSpec{0, 0, 1}}, DemandMatrix(2, 3));
    FAIL() << "expected InstanceError";
  } catch (const InstanceError& e) {
    EXPECT_NE(std::string(e.what()).find("agent 0"), std::string::npos);
  }
}

TEST(BuildInstance, RejectsBadShapes) {
  EXPECT_THROW(build_instance(1, TravelTimeMatrix{{{0}}}, {}, DemandMatrix(1, 1)),
               InstanceError);  // horizon too small
  EXPECT_THROW(build_instance(5, TravelTimeMatrix{{{0, 1}}}, {}, DemandMatrix(2, 5)),
               InstanceError);  // non-square travel
  EXPECT_THROW(build_instance(5, TravelTimeMatrix{{{1, 1}, {1, 0}}}, {},
                              DemandMatrix(2, 5)),
               InstanceError);  // nonzero diagonal
  EXPECT_THROW(build_instance(5, TravelTimeMatrix{{{0, 0}, {0, 0}}}, {},
                              DemandMatrix(2, 5)),
               InstanceError);  // zero off-diagonal
  EXPECT_THROW(build_instance(5, TravelTimeMatrix{{{0, 1}, {1, 0}}}, {},
                              DemandMatrix(2, 4)),
               InstanceError);  // demand shape mismatch
  EXPECT_THROW(build_instance(5, TravelTimeMatrix{{{0, 1}, {1, 0}}},
                              {AgentSpec{0, 0, 2}}, DemandMatrix(2, 5)),
               InstanceError);  // node index out of range
  DemandMatrix bad(2, 5);
  bad.at(0, 1) = 2;
  EXPECT_THROW(build_instance(5, TravelTimeMatrix{{{0, 1}, {1, 0}}}, {}, bad),
               InstanceError);  // non-binary demand
}

TEST(GenerateInstance, SmallSettingShape) {
  const Instance inst = generate_instance(7, 12, 5, 0.15, 1, 3, 1);
  EXPECT_EQ(inst.num_nodes(), 7);
  EXPECT_EQ(inst.horizon, 12);
  EXPECT_EQ(inst.num_agents(), 5);
  // round(0.15 * 12) = 2 demand times per node
  for (int n = 0; n < 7; ++n) {
    int count = 0;
    for (int t = 0; t < 12; ++t) count += inst.demand.at(n, t);
    EXPECT_EQ(count, 2) << "node " << n;
    EXPECT_EQ(inst.demand.at(n, 0), 0);
    EXPECT_EQ(inst.demand.at(n, 11), 0);
  }
  for (int i = 0; i < 7; ++i) {
    for (int j = 0; j < 7; ++j) {
      if (i == j) continue;
      EXPECT_GE(inst.travel(i, j), 1);
      EXPECT_LE(inst.travel(i, j), 3);
    }
  }
  for (const AgentSpec& a : inst.agents) EXPECT_EQ(a.init_node, a.fin_node);
}

TEST(GenerateInstance, LargeSettingShape) {
  const Instance inst = generate_instance(20, 100, 15, 0.15, 1, 3, 1);
  EXPECT_EQ(inst.num_nodes(), 20);
  EXPECT_EQ(inst.num_agents(), 15);
  for (int n = 0; n < 20; ++n) {
    int count = 0;
    for (int t = 0; t < 100; ++t) count += inst.demand.at(n, t);
    EXPECT_EQ(count, 15) << "node " << n;
  }
}

TEST(GenerateInstance, ZeroFractionMeansNoDemand) {
  const Instance inst = generate_instance(4, 8, 2, 0.0, 1, 3, 7);
  EXPECT_EQ(inst.demand.total(), 0);
}

TEST(GenerateInstance, RejectsFractionBeyondInteriorSlots) {
  // round(0.9 * 4) = 4 demand times, but only horizon-2 = 2 interior steps.
  EXPECT_THROW(generate_instance(3, 4, 1, 0.9, 1, 2, 1), InstanceError);
}

TEST(GenerateInstance, DeterministicAndSeedSensitive) {
  const std::string a = serialize_instance(generate_instance(6, 10, 3, 0.2, 1, 3, 42));
  const std::string b = serialize_instance(generate_instance(6, 10, 3, 0.2, 1, 3, 42));
  const std::string c = serialize_instance(generate_instance(6, 10, 3, 0.2, 1, 3, 43));
  EXPECT_EQ(a, b);
  EXPECT_NE(a, c);
}

TEST(GenerateInstance, SharesStructureAcrossAgentCounts) {
  // Same seed, more agents: travel and demand stay identical, agents extend.
  const Instance small = generate_instance(7, 12, 2, 0.15, 1, 3, 9);
  const Instance big = generate_instance(7, 12, 5, 0.15, 1, 3, 9);
  EXPECT_EQ(small.travel, big.travel);
  EXPECT_EQ(small.demand, big.demand);
  for (int a = 0; a < 2; ++a) EXPECT_EQ(small.agents[a], big.agents[a]);
}

TEST(GenerateInstance, IndependentFinStaysFeasible) {
  bool saw_relocation = false;
  for (std::uint64_t seed = 0; seed < 6; ++seed) {
    const Instance inst = generate_instance(7, 12, 5, 0.15, 1, 3, seed, true);
    for (const AgentSpec& a : inst.agents) {
      if (a.init_node != a.fin_node) {
        saw_relocation = true;
        EXPECT_LE(inst.travel(a.init_node, a.fin_node) + 1, inst.horizon - 1);
      }
    }
  }
  EXPECT_TRUE(saw_relocation);
}

TEST(GenerateInstance, GeneratedInstancesRoundTrip) {
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    const Instance inst = generate_instance(
        2 + static_cast<int>(seed % 5), 5 + static_cast<int>(seed % 7),
        1 + static_cast<int>(seed % 4), 0.25, 1, 3, seed, seed % 2 == 0);
    EXPECT_EQ(parse_instance(serialize_instance(inst)), inst) << "seed " << seed;
  }
}

TEST(InstanceJson, SerializationContent) {
  const std::string text = serialize_instance(testutil::tiny1());
  const auto j = nlohmann::json::parse(text);
  EXPECT_EQ(j["version"], 1);
  EXPECT_EQ(j["num_nodes"], 2);
  EXPECT_EQ(j["horizon"], 5);
  EXPECT_EQ(j["travel"], nlohmann::json::parse("[[0,1],[1,0]]"));
  EXPECT_EQ(j["agents"], nlohmann::json::parse(R"([{"init":0,"final":0}])"));
  EXPECT_EQ(j["demand"], nlohmann::json::parse("[[1,2]]"));
}

TEST(InstanceJson, DemandPairsSortedOnWrite) {
  TravelTimeMatrix travel{{{0, 1}, {1, 0}}};
  DemandMatrix demand(2, 6);
  demand.at(1, 3) = 1;
  demand.at(0, 2) = 1;
  demand.at(1, 1) = 1;
  const Instance inst = build_instance(6, travel, {AgentSpec{0, 0, 0}}, demand);
  const auto j = nlohmann::json::parse(serialize_instance(inst));
  EXPECT_EQ(j["demand"], nlohmann::json::parse("[[0,2],[1,1],[1,3]]"));
}

TEST(InstanceJson, ParseAcceptsAnyDemandOrder) {
  const std::string text =
      R"({"version":1,"num_nodes":2,"horizon":6,"travel":[[0,1],[1,0]],)"
      R"("agents":[{"init":0,"final":0}],"demand":[[1,3],[0,2],[1,1]]})";
  const Instance inst = parse_instance(text);
  EXPECT_EQ(inst.demand.at(0, 2), 1);
  EXPECT_EQ(inst.demand.at(1, 1), 1);
  EXPECT_EQ(inst.demand.at(1, 3), 1);
}

TEST(InstanceJson, ParseErrors) {
  EXPECT_THROW(parse_instance("not json"), ParseError);
  EXPECT_THROW(parse_instance("[1,2,3]"), ParseError);
  const std::string base =
      R"({"version":1,"num_nodes":2,"horizon":5,"travel":[[0,1],[1,0]],)"
      R"("agents":[{"init":0,"final":0}],"demand":[[1,2]]})";
  // Sanity: the base text parses.
  EXPECT_NO_THROW(parse_instance(base));
  // Demand node out of range.
  try {
    parse_instance(
        R"({"version":1,"num_nodes":2,"horizon":5,"travel":[[0,1],[1,0]],)"
        R"("agents":[{"init":0,"final":0}],"demand":[[5,2]]})");
    FAIL() << "expected ParseError";
  } catch (const ParseError& e) {
    EXPECT_NE(std::string(e.what()).find("out of range"), std::string::npos);
  }
  // Duplicate demand pair.
  EXPECT_THROW(
      parse_instance(
          R"({"version":1,"num_nodes":2,"horizon":5,"travel":[[0,1],[1,0]],)"
          R"("agents":[{"init":0,"final":0}],"demand":[[1,2],[1,2]]})"),
      ParseError);
  // Wrong version, missing field, num_nodes mismatch.
  EXPECT_THROW(
      parse_instance(
          R"({"version":2,"num_nodes":2,"horizon":5,"travel":[[0,1],[1,0]],)"
          R"("agents":[],"demand":[]})"),
      ParseError);
  EXPECT_THROW(
      parse_instance(R"({"version":1,"num_nodes":2,"horizon":5,"agents":[],"demand":[]})"),
      ParseError);
  EXPECT_THROW(
      parse_instance(
          R"({"version":1,"num_nodes":3,"horizon":5,"travel":[[0,1],[1,0]],)"
          R"("agents":[],"demand":[]})"),
      ParseError);
  // Invariant violations surface as InstanceError.
  EXPECT_THROW(
      parse_instance(
          R"({"version":1,"num_nodes":2,"horizon":5,"travel":[[0,1],[2,0]],)"
          R"("agents":[],"demand":[]})"),
      InstanceError);
}

}  // namespace
}  // namespace dronesched
