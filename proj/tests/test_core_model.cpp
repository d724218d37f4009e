#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "support/oracles.hpp"
#include "swarm/core_model.hpp"
#include "swarm/errors.hpp"

using namespace swarm;

namespace {

WorldState world_of(std::vector<Vec2> positions) {
  WorldState w;
  for (std::size_t i = 0; i < positions.size(); ++i) {
    AgentState a;
    a.id = static_cast<AgentId>(i);
    a.pos = positions[i];
    w.agents.push_back(a);
  }
  return w;
}

}  // namespace

TEST(Direction, SingleKeys) {
  EXPECT_EQ(direction_from_intent({MoveKey::Up}), (Vec2{0, -1}));
  EXPECT_EQ(direction_from_intent({MoveKey::Down}), (Vec2{0, 1}));
  EXPECT_EQ(direction_from_intent({MoveKey::Left}), (Vec2{-1, 0}));
  EXPECT_EQ(direction_from_intent({MoveKey::Right}), (Vec2{1, 0}));
}

TEST(Direction, DiagonalIsUnitLength) {
  auto d = direction_from_intent({MoveKey::Up, MoveKey::Left});
  ASSERT_TRUE(d);
  EXPECT_NEAR(d->x, -std::sqrt(2.0) / 2, 1e-15);
  EXPECT_NEAR(d->y, -std::sqrt(2.0) / 2, 1e-15);
}

TEST(Direction, OpposingKeysCancel) {
  EXPECT_FALSE(direction_from_intent({MoveKey::Up, MoveKey::Down}));
  EXPECT_FALSE(direction_from_intent({}));
  EXPECT_FALSE(direction_from_intent({MoveKey::Up, MoveKey::Down, MoveKey::Left, MoveKey::Right}));
  EXPECT_EQ(direction_from_intent({MoveKey::Up, MoveKey::Down, MoveKey::Right}), (Vec2{1, 0}));
}

TEST(Direction, EverySubsetGivesUnitOrNothing) {
  for (int bits = 0; bits < 16; ++bits) {
    MotionIntent m;
    for (int k = 0; k < 4; ++k) {
      if (bits & (1 << k)) m.press(static_cast<MoveKey>(k));
    }
    if (auto d = direction_from_intent(m)) EXPECT_NEAR(norm(*d), 1.0, 1e-12);
  }
}

TEST(Integrate, EastStep) {
  PhysicsParams p;
  Vec2 q = integrate_agent({100, 100}, Vec2{1, 0}, p);
  EXPECT_DOUBLE_EQ(q.x, 101.8);
  EXPECT_DOUBLE_EQ(q.y, 100);
}

TEST(Integrate, NoDirection) {
  EXPECT_EQ(integrate_agent({100, 100}, std::nullopt, PhysicsParams{}), (Vec2{100, 100}));
}

TEST(Integrate, NorthEast) {
  auto ne = direction_from_intent({MoveKey::Up, MoveKey::Right});
  Vec2 q = integrate_agent({100, 100}, ne, PhysicsParams{});
  EXPECT_NEAR(q.x, 101.27279220613578, 1e-12);
  EXPECT_NEAR(q.y, 98.727207793864219, 1e-12);
}

TEST(Integrate, NonUnitDirectionRejected) {
  EXPECT_THROW(integrate_agent({0, 0}, Vec2{1, 1}, PhysicsParams{}), ContractViolation);
  EXPECT_THROW(integrate_agent({0, 0}, Vec2{0, 0}, PhysicsParams{}), ContractViolation);
}

TEST(PhysicsParams, Invariants) {
  EXPECT_TRUE(PhysicsParams{}.violations().empty());
  PhysicsParams tunnelling;
  tunnelling.speed = 200;  // 20 px per tick with r = 10
  EXPECT_FALSE(tunnelling.violations().empty());
  PhysicsParams bad;
  bad.agent_radius = 0;
  EXPECT_FALSE(bad.violations().empty());
}

TEST(Resolve, SeparatedAgentsUnchanged) {
  WorldState w = world_of({{100, 100}, {130, 100}});
  WorldState next = resolve_world(w, PhysicsParams{});
  EXPECT_EQ(next.agents[0].pos, (Vec2{100, 100}));
  EXPECT_EQ(next.agents[1].pos, (Vec2{130, 100}));
  EXPECT_EQ(next.tick, 1);
  EXPECT_EQ(next.t_ms, 100);
}

TEST(Resolve, SymmetricPush) {
  WorldState w = world_of({{100, 100}, {101, 100}});
  WorldState next = resolve_world(w, PhysicsParams{});
  EXPECT_DOUBLE_EQ(next.agents[0].pos.x, 90.5);
  EXPECT_DOUBLE_EQ(next.agents[1].pos.x, 110.5);
  EXPECT_DOUBLE_EQ(next.agents[0].pos.y, 100);
  EXPECT_DOUBLE_EQ(next.agents[1].pos.y, 100);
}

TEST(Resolve, CoincidentCentersSplitAlongX) {
  WorldState w = world_of({{300, 200}, {300, 200}});
  WorldState next = resolve_world(w, PhysicsParams{});
  EXPECT_DOUBLE_EQ(next.agents[0].pos.x, 290);
  EXPECT_DOUBLE_EQ(next.agents[1].pos.x, 310);
  EXPECT_DOUBLE_EQ(next.agents[0].pos.y, 200);
}

TEST(Resolve, WallClamp) {
  WorldState w = world_of({{10.5, 400}});
  w.agents[0].intent = {MoveKey::Left};
  WorldState next = resolve_world(w, PhysicsParams{});
  EXPECT_DOUBLE_EQ(next.agents[0].pos.x, 10);
}

TEST(Resolve, ChainMatchesProjectionOracle) {
  // Each push creates the next overlap.
  std::vector<Vec2> start{{100, 100}, {114, 102}, {127, 99}, {140, 104}};
  WorldState w = world_of(start);
  PhysicsParams p;
  std::vector<AgentState> agents = w.agents;
  const int iterations = resolve_contacts(agents, w.arena, p);
  EXPECT_GT(iterations, 2);
  auto expected = oracle::project_until_settled(start, w.arena, p.agent_radius, 1e-12);
  for (std::size_t i = 0; i < start.size(); ++i) {
    EXPECT_NEAR(agents[i].pos.x, expected[i].x, 1e-6);
    EXPECT_NEAR(agents[i].pos.y, expected[i].y, 1e-6);
  }
}

TEST(Resolve, ThreeAgentChainMatchesOracle) {
  std::vector<Vec2> start{{200, 300}, {212, 300}, {224, 300}};
  WorldState next = resolve_world(world_of(start), PhysicsParams{});
  auto expected = oracle::project_until_settled(start, Arena{}, 10, 1e-12);
  for (std::size_t i = 0; i < start.size(); ++i) {
    EXPECT_NEAR(next.agents[i].pos.x, expected[i].x, 1e-6);
    EXPECT_NEAR(next.agents[i].pos.y, expected[i].y, 1e-6);
  }
  EXPECT_TRUE(world_is_valid(next, PhysicsParams{}));
}

TEST(Resolve, Deterministic) {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> ux(10, 1190), uy(10, 790);
  WorldState w;
  for (int i = 0; i < 20; ++i) {
    AgentState a;
    a.id = i;
    a.pos = {ux(rng), uy(rng)};
    a.intent = MotionIntent{static_cast<MoveKey>(i % 4)};
    w.agents.push_back(a);
  }
  resolve_contacts(w.agents, w.arena, PhysicsParams{});
  WorldState a = w, b = w;
  for (int t = 0; t < 50; ++t) {
    a = resolve_world(a, PhysicsParams{});
    b = resolve_world(b, PhysicsParams{});
  }
  for (std::size_t i = 0; i < a.agents.size(); ++i) {
    EXPECT_EQ(a.agents[i].pos.x, b.agents[i].pos.x);
    EXPECT_EQ(a.agents[i].pos.y, b.agents[i].pos.y);
  }
}

TEST(Resolve, JammedClusterStaysValid) {
  // Everybody presses toward one corner; the crowd jams against the walls.
  std::vector<Vec2> start;
  for (int i = 0; i < 6; ++i) {
    for (int j = 0; j < 5; ++j) start.push_back({40.0 + 25 * i, 40.0 + 25 * j});
  }
  WorldState w = world_of(start);
  for (auto& a : w.agents) a.intent = {MoveKey::Up, MoveKey::Left};
  PhysicsParams p;
  for (int t = 0; t < 300; ++t) {
    w = resolve_world(w, p);
    ASSERT_TRUE(world_is_valid(w, p)) << "tick " << w.tick;
  }
}

TEST(Resolve, InvalidInputWorldFaults) {
  // Twenty agents stacked in a 30 px arena cannot be separated at all.
  WorldState w;
  w.arena = {30, 30};
  for (int i = 0; i < 20; ++i) {
    AgentState a;
    a.id = i;
    a.pos = {15, 15};
    w.agents.push_back(a);
  }
  EXPECT_THROW(resolve_world(w, PhysicsParams{}), PhysicsFault);
}

TEST(Resolve, IdleAgentsDoNotMove) {
  WorldState w = world_of({{50, 50}, {500, 300}, {900, 700}});
  WorldState next = resolve_world(w, PhysicsParams{});
  for (std::size_t i = 0; i < w.agents.size(); ++i) EXPECT_EQ(next.agents[i].pos, w.agents[i].pos);
}

TEST(Keys, NamesRoundTrip) {
  for (auto k : {MoveKey::Up, MoveKey::Down, MoveKey::Left, MoveKey::Right}) {
    EXPECT_EQ(key_from_name(key_name(k)), k);
  }
  EXPECT_FALSE(key_from_name("Jump"));
  EXPECT_EQ(color_from_key("A"), AgentColor::C1);
  EXPECT_EQ(color_from_key("S"), AgentColor::C2);
  EXPECT_EQ(color_from_key("D"), AgentColor::C3);
  EXPECT_FALSE(color_from_key("F"));
  EXPECT_LT(AgentColor::C1, AgentColor::C2);
  EXPECT_LT(AgentColor::C2, AgentColor::C3);
}
