#include <cmath>
#include <numbers>
#include <random>

#include <gtest/gtest.h>

#include "support/oracles.hpp"
#include "swarm/errors.hpp"
#include "swarm/sensing.hpp"

using namespace swarm;
using std::numbers::pi;

namespace {

AgentState agent(AgentId id, Vec2 pos, AgentColor c = AgentColor::C1) {
  AgentState a;
  a.id = id;
  a.pos = pos;
  a.color = c;
  return a;
}

void expect_matches_oracle(const WorldState& w, AgentId id, const SensingParams& sp) {
  PhysicsParams pp;
  ScanFrame scan = neighborhood_scan(w, id, sp, pp);
  const Vec2 origin = w.find(id)->pos;
  for (int k = 0; k < sp.n_rays; ++k) {
    RayHit want = oracle::march_ray(w, origin, bearing_of(k, sp.n_rays), sp.scan_range, pp.agent_radius, id);
    EXPECT_NEAR(scan.hits[k].distance, want.distance, 0.05) << "ray " << k;
    EXPECT_EQ(scan.hits[k].wire_code(), want.wire_code()) << "ray " << k;
  }
}

}  // namespace

TEST(CastRay, NothingInRange) {
  WorldState w;
  w.agents = {agent(0, {600, 400})};
  RayHit h = cast_ray(w, {600, 400}, 0, SensingParams{}, PhysicsParams{}, 0);
  EXPECT_EQ(h.kind, HitKind::None);
  EXPECT_EQ(h.distance, 150);
}

TEST(CastRay, AgentAhead) {
  WorldState w;
  w.agents = {agent(0, {100, 100}), agent(1, {150, 100}, AgentColor::C3)};
  RayHit h = cast_ray(w, {100, 100}, 0, SensingParams{}, PhysicsParams{}, 0);
  EXPECT_EQ(h.kind, HitKind::Agent);
  EXPECT_EQ(h.color, AgentColor::C3);
  EXPECT_DOUBLE_EQ(h.distance, 40);
}

TEST(CastRay, WallBehind) {
  WorldState w;
  w.agents = {agent(0, {20, 100})};
  RayHit h = cast_ray(w, {20, 100}, pi, SensingParams{}, PhysicsParams{}, 0);
  EXPECT_EQ(h.kind, HitKind::Wall);
  EXPECT_NEAR(h.distance, 20, 1e-12);
}

TEST(CastRay, OriginOutsideArena) {
  WorldState w;
  EXPECT_THROW(cast_ray(w, {-1, 100}, 0, SensingParams{}, PhysicsParams{}), ContractViolation);
}

TEST(CastRay, WallWinsTie) {
  // Disc surface touches the wall at x = 0 exactly where the ray meets it.
  WorldState w;
  w.agents = {agent(0, {30, 100}), agent(1, {-10, 100})};
  RayHit h = cast_ray(w, {30, 100}, pi, SensingParams{}, PhysicsParams{}, 0);
  EXPECT_EQ(h.kind, HitKind::Wall);
  EXPECT_NEAR(h.distance, 30, 1e-12);
}

TEST(CastRay, GrazingRayMatchesOracle) {
  WorldState w;
  w.agents = {agent(0, {300, 300}), agent(1, {400, 309.999}, AgentColor::C2),
              agent(2, {380, 289.5}, AgentColor::C3)};
  for (double bearing : {0.0, 0.0001, -0.0002, 0.1, 0.1 + 1e-7}) {
    RayHit got = cast_ray(w, {300, 300}, bearing, SensingParams{}, PhysicsParams{}, 0);
    RayHit want = oracle::march_ray(w, {300, 300}, bearing, 150, 10, 0);
    EXPECT_NEAR(got.distance, want.distance, 0.05) << bearing;
    EXPECT_EQ(got.wire_code(), want.wire_code()) << bearing;
  }
}

TEST(Scan, LoneAgentSeesNothing) {
  WorldState w;
  w.agents = {agent(3, {600, 400}, AgentColor::C2)};
  w.tick = 17;
  ScanFrame f = neighborhood_scan(w, 3, SensingParams{}, PhysicsParams{});
  ASSERT_EQ(f.hits.size(), 360u);
  EXPECT_EQ(f.observer, 3);
  EXPECT_EQ(f.tick, 17);
  EXPECT_EQ(f.self_color, AgentColor::C2);
  for (const auto& h : f.hits) {
    EXPECT_EQ(h.kind, HitKind::None);
    EXPECT_EQ(h.distance, 150);
  }
}

TEST(Scan, CollinearNeighborsOccluded) {
  WorldState w;
  w.agents = {agent(0, {300, 300}), agent(1, {350, 300}, AgentColor::C2), agent(2, {390, 300}, AgentColor::C3)};
  ScanFrame f = neighborhood_scan(w, 0, SensingParams{}, PhysicsParams{});
  EXPECT_DOUBLE_EQ(f.hits[0].distance, 40);
  EXPECT_EQ(f.hits[0].color, AgentColor::C2);
  for (const auto& h : f.hits) {
    if (h.kind == HitKind::Agent) EXPECT_NE(h.color, AgentColor::C3);
  }
}

TEST(Scan, SurroundedAgentMatchesOracle) {
  // Six touching neighbours seal the agent in; seam rays graze two discs at once.
  WorldState w;
  w.agents.push_back(agent(0, {600, 400}));
  for (int k = 0; k < 6; ++k) {
    const double a = k * pi / 3;
    w.agents.push_back(agent(k + 1, {600 + 20 * std::cos(a), 400 + 20 * std::sin(a)}, AgentColor::C2));
  }
  for (int k = 0; k < 12; ++k) {
    const double a = k * pi / 6 + 0.1;
    w.agents.push_back(agent(k + 7, {600 + 60 * std::cos(a), 400 + 60 * std::sin(a)}, AgentColor::C3));
  }
  ASSERT_TRUE(world_is_valid(w, PhysicsParams{}));
  ScanFrame f = neighborhood_scan(w, 0, SensingParams{}, PhysicsParams{});
  for (const auto& h : f.hits) {
    EXPECT_EQ(h.kind, HitKind::Agent);
    EXPECT_EQ(h.color, AgentColor::C2);
  }
  expect_matches_oracle(w, 0, SensingParams{});
}

TEST(Scan, RandomWorldsMatchOracle) {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> ux(10, 1190), uy(10, 790);
  SensingParams sp;
  sp.n_rays = 90;
  for (int trial = 0; trial < 5; ++trial) {
    WorldState w;
    for (int i = 0; i < 30; ++i) w.agents.push_back(agent(i, {ux(rng), uy(rng)}, static_cast<AgentColor>(1 + i % 3)));
    resolve_contacts(w.agents, w.arena, PhysicsParams{});
    expect_matches_oracle(w, static_cast<AgentId>(trial), sp);
  }
}

TEST(Scan, DistancesWithinRange) {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> ux(10, 1190), uy(10, 790);
  WorldState w;
  for (int i = 0; i < 25; ++i) w.agents.push_back(agent(i, {ux(rng), uy(rng)}));
  resolve_contacts(w.agents, w.arena, PhysicsParams{});
  for (const auto& a : w.agents) {
    for (const auto& h : neighborhood_scan(w, a.id, SensingParams{}, PhysicsParams{}).hits) {
      EXPECT_GE(h.distance, 0);
      EXPECT_LE(h.distance, 150);
      EXPECT_EQ(h.kind == HitKind::None, h.distance == 150);
    }
  }
}

TEST(Scan, MirrorSymmetry) {
  std::mt19937_64 rng(23);
  std::uniform_real_distribution<double> ux(10, 1190), uy(10, 790);
  WorldState w;
  for (int i = 0; i < 20; ++i) w.agents.push_back(agent(i, {ux(rng), uy(rng)}, static_cast<AgentColor>(1 + i % 3)));
  w.agents.push_back(agent(20, {40, 400}));
  resolve_contacts(w.agents, w.arena, PhysicsParams{});
  WorldState m = w;
  for (auto& a : m.agents) a.pos.x = w.arena.width - a.pos.x;

  SensingParams sp;
  for (const auto& a : w.agents) {
    auto f = neighborhood_scan(w, a.id, sp, PhysicsParams{});
    auto g = neighborhood_scan(m, a.id, sp, PhysicsParams{});
    for (int k = 0; k < sp.n_rays; ++k) {
      // Bearing k mirrors to bearing (n/2 - k) mod n.
      const int mk = ((sp.n_rays / 2 - k) % sp.n_rays + sp.n_rays) % sp.n_rays;
      EXPECT_NEAR(f.hits[k].distance, g.hits[mk].distance, 1e-9);
      EXPECT_EQ(f.hits[k].wire_code(), g.hits[mk].wire_code());
    }
  }
}

TEST(Scan, CapabilityDisabled) {
  WorldState w;
  w.agents = {agent(0, {100, 100})};
  EXPECT_THROW(neighborhood_scan(w, 0, SensingParams{}, PhysicsParams{}, false), CapabilityDenied);
  EXPECT_THROW(neighborhood_scan(w, 9, SensingParams{}, PhysicsParams{}), ContractViolation);
}

TEST(Overhead, FovMembership) {
  WorldState w;
  // Default fov for 1200 x 800 is [120, 80, 960, 640].
  w.agents = {agent(0, {600, 400}), agent(1, {50, 50}), agent(2, {120, 300}, AgentColor::C3),
              agent(3, {1080, 720})};
  w.tick = 30;
  OverheadFrame f = overhead_snapshot(w, SensingParams{});
  EXPECT_EQ(f.snapshot_tick, 30);
  EXPECT_EQ(f.fov, (Rect{120, 80, 960, 640}));
  ASSERT_EQ(f.blips.size(), 3u);
  EXPECT_EQ(f.blips[0].pos, (Vec2{600, 400}));
  EXPECT_EQ(f.blips[1].pos, (Vec2{120, 300}));
  EXPECT_EQ(f.blips[1].color, AgentColor::C3);
  EXPECT_EQ(f.blips[2].pos, (Vec2{1080, 720}));
}

TEST(Overhead, CapabilityDisabled) {
  EXPECT_THROW(overhead_snapshot(WorldState{}, SensingParams{}, false), CapabilityDenied);
}

TEST(Overhead, DueSchedule) {
  SensingParams sp;
  PhysicsParams pp;
  EXPECT_TRUE(overhead_due(10, 0, sp, pp));
  EXPECT_FALSE(overhead_due(9, 0, sp, pp));
  sp.overhead_rate = 0.2;
  EXPECT_TRUE(overhead_due(50, 0, sp, pp));
  EXPECT_FALSE(overhead_due(49, 0, sp, pp));
  EXPECT_EQ(overhead_interval_ticks(sp, pp), 50);
}

TEST(SensingParams, Invariants) {
  Arena arena;
  PhysicsParams pp;
  EXPECT_TRUE(SensingParams{}.violations(arena, pp).empty());
  SensingParams short_range;
  short_range.scan_range = 5;
  EXPECT_FALSE(short_range.violations(arena, pp).empty());
  SensingParams few_rays;
  few_rays.n_rays = 4;
  EXPECT_FALSE(few_rays.violations(arena, pp).empty());
  SensingParams fast;
  fast.overhead_rate = 20;
  EXPECT_FALSE(fast.violations(arena, pp).empty());
  SensingParams outside;
  outside.fov = Rect{-1, 0, 100, 100};
  EXPECT_FALSE(outside.violations(arena, pp).empty());
}

TEST(RayHit, WireCodes) {
  EXPECT_EQ((RayHit{150, HitKind::None}).wire_code(), 0);
  EXPECT_EQ((RayHit{3, HitKind::Wall}).wire_code(), 1);
  EXPECT_EQ((RayHit{3, HitKind::Agent, AgentColor::C3}).wire_code(), 4);
  EXPECT_EQ(RayHit::from_wire(7, 3), (RayHit{7, HitKind::Agent, AgentColor::C2}));
}
