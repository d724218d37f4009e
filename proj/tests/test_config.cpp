#include <gtest/gtest.h>

#include "swarm/config.hpp"
#include "swarm/errors.hpp"

using namespace swarm;
using nlohmann::json;

namespace {

json minimal() { return json{{"instance_id", "t1"}}; }

}  // namespace

TEST(Config, DefaultsFillIn) {
  InstanceConfig c = load_config(minimal());
  EXPECT_EQ(c.instance_id, "t1");
  EXPECT_EQ(c.arena, (Arena{1200, 800}));
  EXPECT_EQ(c.physics, PhysicsParams{});
  EXPECT_EQ(c.sensing.n_rays, 360);
  EXPECT_EQ(c.sensing.scan_range, 150);
  EXPECT_EQ(c.max_players, 25);
  EXPECT_TRUE(c.capabilities.local_sensing && c.capabilities.global_sensing && c.capabilities.color_switching);
}

TEST(Config, NormalizedEcho) {
  json doc = minimal();
  doc["physics"] = {{"speed", 18}, {"tick_rate", 10}};
  InstanceConfig c = load_config(doc);
  json echo = config_to_json(c);
  EXPECT_EQ(echo["physics"]["speed"], 18.0);
  EXPECT_EQ(echo["physics"]["tick_rate"], 10.0);
  EXPECT_EQ(echo["physics"]["agent_radius"], 10.0);
  EXPECT_EQ(echo["sensing"]["fov"], json::array({120.0, 80.0, 960.0, 640.0}));
  EXPECT_EQ(config_to_json(load_config(echo)), echo);
}

TEST(Config, BothSensingOffRejected) {
  json doc = minimal();
  doc["capabilities"] = {{"local_sensing", false}, {"global_sensing", false}};
  try {
    load_config(doc);
    FAIL() << "accepted";
  } catch (const ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find("local_sensing"), std::string::npos);
  }
}

TEST(Config, ViolationsListed) {
  json doc = minimal();
  doc["physics"] = {{"speed", -1}};
  doc["max_players"] = 0;
  doc["countdown_ms"] = -5;
  InstanceConfig c = config_from_json(doc);
  EXPECT_GE(c.violations().size(), 3u);
}

TEST(Config, SensingCheckedOnlyWithValidPhysics) {
  json doc = minimal();
  doc["sensing"] = {{"n_rays", 3}};
  EXPECT_FALSE(config_from_json(doc).violations().empty());
  doc["physics"] = {{"speed", -1}};
  EXPECT_EQ(config_from_json(doc).violations().size(), 1u);
}

TEST(Config, MalformedDocuments) {
  EXPECT_THROW(config_from_json(json::array()), ConfigError);
  json doc = minimal();
  doc["arena"] = "big";
  EXPECT_THROW(config_from_json(doc), ConfigError);
  doc = minimal();
  doc["objective"] = {{"pattern", {{"type", "hexagon"}}}};
  EXPECT_THROW(config_from_json(doc), ConfigError);
}

TEST(Config, Patterns) {
  json doc = minimal();
  doc["objective"] = {{"pattern", {{"type", "circle"}, {"center", {600, 400}}, {"radius", 200}}}};
  auto c = load_config(doc);
  EXPECT_EQ(std::get<CirclePerimeter>(c.objective.pattern).radius, 200);
  doc["objective"] = {{"pattern", {{"type", "chain"}, {"points", {{100, 100}, {500, 100}}}}}};
  c = load_config(doc);
  EXPECT_EQ(std::get<SegmentChain>(c.objective.pattern).points.size(), 2u);
}

TEST(Placement, UniformIsSeededAndValid) {
  InstanceConfig c = load_config(minimal());
  auto a = place_agents(c, 25);
  auto b = place_agents(c, 25);
  ASSERT_EQ(a.size(), 25u);
  for (std::size_t i = 0; i < a.size(); ++i) {
    EXPECT_EQ(a[i].id, static_cast<AgentId>(i));
    EXPECT_EQ(a[i].pos, b[i].pos);
    EXPECT_GE(a[i].pos.x, 10);
    EXPECT_LE(a[i].pos.x, 1190);
    for (std::size_t j = 0; j < i; ++j) EXPECT_GE(distance(a[i].pos, a[j].pos), 20);
  }
  std::get<UniformRandomPlacement>(c.placement).seed = 2;
  EXPECT_NE(place_agents(c, 25)[0].pos, a[0].pos);
}

TEST(Placement, Explicit) {
  json doc = minimal();
  doc["max_players"] = 2;
  doc["placement"] = {{"type", "explicit"}, {"agents", {{100, 100}, {200, 100, 3}}}};
  auto c = load_config(doc);
  auto agents = place_agents(c, 2);
  EXPECT_EQ(agents[1].pos, (Vec2{200, 100}));
  EXPECT_EQ(agents[1].color, AgentColor::C3);
  EXPECT_EQ(agents[0].color, AgentColor::C1);
}

TEST(Placement, ExplicitOverlapRejected) {
  json doc = minimal();
  doc["max_players"] = 2;
  doc["placement"] = {{"type", "explicit"}, {"agents", {{100, 100}, {105, 100}}}};
  EXPECT_THROW(load_config(doc), ConfigError);
}

TEST(Placement, OverPackedArena) {
  json doc = minimal();
  doc["arena"] = {{"width", 60}, {"height", 60}};
  doc["sensing"] = {{"scan_range", 30}};
  auto c = config_from_json(doc);
  EXPECT_THROW(place_agents(c, 25), ConfigError);
}
