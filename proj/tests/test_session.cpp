#include <gtest/gtest.h>

#include "swarm/errors.hpp"
#include "swarm/session.hpp"

using namespace swarm;
using namespace swarm::protocol;
using nlohmann::json;

namespace {

json config_doc(int max_players = 25) {
  return json{{"instance_id", "i1"}, {"max_players", max_players}, {"sensing", {{"n_rays", 36}}}};
}

struct Client {
  Session& s;
  ConnectionId id;
  explicit Client(Session& session) : s(session), id(session.open_connection()) {}
  bool send(const std::string& text) { return s.handle_message(id, text); }
  Welcome hello(std::optional<std::string> token = std::nullopt) {
    send(encode(ClientMessage{Hello{token}}));
    for (const auto& f : frames()) {
      if (auto* w = std::get_if<Welcome>(&f)) return *w;
    }
    ADD_FAILURE() << "no welcome";
    return {};
  }
  std::vector<ServerMessage> frames() {
    std::vector<ServerMessage> out;
    for (const auto& text : s.outbox(id)->drain()) out.push_back(decode_server(text));
    return out;
  }
};

int count_type(const std::vector<ServerMessage>& frames, std::string_view type) {
  int n = 0;
  for (const auto& f : frames) n += frame_type(f) == type;
  return n;
}

}  // namespace

TEST(Session, FirstContactMintsIdentity) {
  Session s;
  s.create_instance(config_doc());
  Client c(s);
  Welcome w = c.hello();
  EXPECT_EQ(w.token.size(), 32u);
  EXPECT_EQ(w.agent_id, 0);
  EXPECT_EQ(w.config["instance_id"], "i1");
  Client d(s);
  Welcome w2 = d.hello();
  EXPECT_NE(w2.token, w.token);
  EXPECT_EQ(w2.agent_id, 1);
}

TEST(Session, LobbyWelcomeCarriesPhase) {
  Session s;
  s.create_instance(config_doc());
  Client c(s);
  c.send(encode(ClientMessage{Hello{}}));
  auto frames = c.frames();
  ASSERT_EQ(frames.size(), 2u);
  EXPECT_EQ(std::get<PhaseFrame>(frames[1]).phase, Phase::Lobby);
}

TEST(Session, MalformedHelloClosesConnection) {
  Session s;
  Client c(s);
  EXPECT_FALSE(c.send(R"({"type":"hello","token":42})"));
  auto frames = c.frames();
  ASSERT_EQ(frames.size(), 1u);
  EXPECT_EQ(std::get<ErrorFrame>(frames[0]).code, error_code::kProtocol);
}

TEST(Session, InputBeforeHelloRejected) {
  Session s;
  Client c(s);
  EXPECT_FALSE(c.send(R"({"type":"input","keys":["Up"]})"));
}

TEST(Session, ReconnectKeepsAgent) {
  Session s;
  s.create_instance(config_doc());
  Client a(s), b(s);
  const std::string token = a.hello().token;
  b.hello();
  s.start("i1");
  a.send(R"({"type":"input","keys":["Right"]})");
  for (int i = 0; i < 5; ++i) s.tick();
  const AgentState before = *s.world()->find(0);
  s.close_connection(a.id);
  for (int i = 0; i < 5; ++i) s.tick();
  // Keys are released on disconnect, so the agent stays where it was.
  EXPECT_EQ(s.world()->find(0)->pos, before.pos);

  Client again(s);
  Welcome w = again.hello(token);
  EXPECT_EQ(w.token, token);
  EXPECT_EQ(w.agent_id, 0);
  EXPECT_EQ(w.color, before.color);
  EXPECT_EQ(s.agent_of(again.id), 0);
  s.tick();
  auto frames = again.frames();
  EXPECT_EQ(count_type(frames, "scan"), 1);
}

TEST(Session, UnknownTokenGetsFreshIdentity) {
  Session s;
  Client c(s);
  Welcome w = c.hello("not-a-token");
  EXPECT_NE(w.token, "not-a-token");
}

TEST(Session, CapacityMakesSpectators) {
  Session s;
  s.create_instance(config_doc(25));
  std::vector<std::unique_ptr<Client>> clients;
  for (int i = 0; i < 26; ++i) {
    clients.push_back(std::make_unique<Client>(s));
    Welcome w = clients.back()->hello();
    if (i < 25) {
      EXPECT_EQ(w.agent_id, i);
    } else {
      EXPECT_FALSE(w.agent_id);
    }
  }
  s.start("i1");
  EXPECT_EQ(s.world()->agents.size(), 25u);
  EXPECT_FALSE(s.agent_of(clients[25]->id));
}

TEST(Session, LateJoinerSpectates) {
  Session s;
  s.create_instance(config_doc());
  Client a(s);
  a.hello();
  s.start("i1");
  Client late(s);
  Welcome w = late.hello();
  EXPECT_FALSE(w.agent_id);
  late.send(R"({"type":"input","keys":["Up"]})");
  s.tick();
  EXPECT_EQ(s.world()->agents.size(), 1u);
  // Spectators still receive overhead frames but never scans.
  for (int i = 0; i < 10; ++i) s.tick();
  auto frames = late.frames();
  EXPECT_EQ(count_type(frames, "scan"), 0);
  EXPECT_EQ(count_type(frames, "overhead"), 1);
}

TEST(Session, SecondTabSpectates) {
  Session s;
  s.create_instance(config_doc());
  Client a(s);
  const std::string token = a.hello().token;
  Client tab(s);
  Welcome w = tab.hello(token);
  EXPECT_EQ(w.token, token);
  EXPECT_FALSE(w.agent_id);
  EXPECT_EQ(s.agent_of(a.id), 0);
  EXPECT_FALSE(s.agent_of(tab.id));
}

TEST(Session, DuplicateHelloIsProtocolError) {
  Session s;
  Client a(s);
  a.hello();
  EXPECT_FALSE(a.send(R"({"type":"hello","token":null})"));
}

TEST(Session, ConfigRejections) {
  Session s;
  json bad = config_doc();
  bad["capabilities"] = {{"local_sensing", false}, {"global_sensing", false}};
  try {
    s.create_instance(bad);
    FAIL();
  } catch (const AdminError& e) {
    EXPECT_EQ(e.status(), 422);
    EXPECT_FALSE(e.details().empty());
  }
  EXPECT_FALSE(s.current_instance_id());
}

TEST(Session, NormalizedEcho) {
  Session s;
  json doc = {{"instance_id", "echo"}, {"physics", {{"speed", 18}, {"tick_rate", 10}}}};
  json echo = s.create_instance(doc);
  EXPECT_EQ(echo["physics"]["speed"], 18.0);
  EXPECT_EQ(echo["physics"]["tick_rate"], 10.0);
  EXPECT_EQ(echo["physics"]["agent_radius"], 10.0);
  EXPECT_EQ(s.phase(), Phase::Lobby);
}

TEST(Session, PhaseTransitions) {
  Session s;
  s.create_instance(config_doc());
  EXPECT_THROW(s.abort("i1"), AdminError);
  try {
    s.start("nope");
  } catch (const AdminError& e) {
    EXPECT_EQ(e.status(), 404);
  }
  s.start("i1");
  EXPECT_EQ(s.phase(), Phase::Running);
  try {
    s.start("i1");
    FAIL();
  } catch (const AdminError& e) {
    EXPECT_EQ(e.status(), 409);
  }
  try {
    s.create_instance(json{{"instance_id", "i2"}});
    FAIL();
  } catch (const AdminError& e) {
    EXPECT_EQ(e.status(), 409);
  }
  s.tick();
  s.abort("i1");
  EXPECT_EQ(s.phase(), Phase::Aborted);
  EXPECT_EQ(s.status("i1")["phase"], "Aborted");
  SessionLog log = parse_log(s.last_log_text());
  EXPECT_EQ(log.records.back().kind, RecordKind::InstanceEnd);
  EXPECT_EQ(log.records.back().payload["phase"], "Aborted");

  s.create_instance(json{{"instance_id", "i2"}});
  EXPECT_EQ(s.status("i1")["phase"], "Aborted");
  EXPECT_EQ(s.status("i2")["phase"], "Lobby");
  EXPECT_THROW(s.tick(), ContractViolation);
}

TEST(Session, InputAppliesNextTick) {
  Session s;
  s.create_instance(config_doc());
  Client c(s);
  c.hello();
  s.start("i1");
  const Vec2 p0 = s.world()->find(0)->pos;
  c.send(R"({"type":"input","keys":["Up","Left"]})");
  EXPECT_EQ(s.world()->find(0)->pos, p0);  // latched, not applied yet
  s.tick();
  const Vec2 p1 = s.world()->find(0)->pos;
  if (p0.x > 20 && p0.y > 20) {
    EXPECT_NEAR(p1.x, p0.x - 1.8 / std::sqrt(2.0), 1e-12);
    EXPECT_NEAR(p1.y, p0.y - 1.8 / std::sqrt(2.0), 1e-12);
  }
}

TEST(Session, ColorSwitching) {
  Session s;
  s.create_instance(config_doc());
  Client c(s);
  c.hello();
  s.start("i1");
  c.send(R"({"type":"color","key":"S"})");
  s.tick();
  EXPECT_EQ(s.world()->find(0)->color, AgentColor::C2);
}

TEST(Session, ColorDeniedWhenDisabled) {
  Session s;
  json doc = config_doc();
  doc["capabilities"] = {{"color_switching", false}};
  s.create_instance(doc);
  Client c(s);
  c.hello();
  s.start("i1");
  const AgentColor before = s.world()->find(0)->color;
  c.frames();
  EXPECT_TRUE(c.send(R"({"type":"color","key":"S"})"));
  auto frames = c.frames();
  ASSERT_EQ(frames.size(), 1u);
  EXPECT_EQ(std::get<ErrorFrame>(frames[0]).code, error_code::kCapabilityDenied);
  s.tick();
  EXPECT_EQ(s.world()->find(0)->color, before);
  EXPECT_EQ(s.counters()->capability_denials, 1);
}

TEST(Session, TickOrderAndRates) {
  Session s;
  s.create_instance(config_doc());
  Client c(s);
  c.hello();
  s.start("i1");
  c.frames();
  for (int i = 0; i < 10; ++i) s.tick();
  auto frames = c.frames();
  EXPECT_EQ(count_type(frames, "overhead"), 1);
  EXPECT_EQ(count_type(frames, "scan"), 10);
  // Overhead of tick 10 goes out before that tick's scan.
  EXPECT_EQ(frame_type(frames[frames.size() - 2]), "overhead");
  EXPECT_EQ(std::get<OverheadFrame>(frames[frames.size() - 2]).snapshot_tick, 10);
  std::int64_t last = 0;
  for (const auto& f : frames) {
    if (auto* scan = std::get_if<ScanFrame>(&f)) {
      EXPECT_GT(scan->tick, last);
      last = scan->tick;
    }
  }
}

TEST(Session, LocalSensingOffSendsNoScans) {
  Session s;
  json doc = config_doc();
  doc["capabilities"] = {{"local_sensing", false}};
  s.create_instance(doc);
  Client c(s);
  c.hello();
  s.start("i1");
  for (int i = 0; i < 30; ++i) s.tick();
  auto frames = c.frames();
  EXPECT_EQ(count_type(frames, "scan"), 0);
  EXPECT_EQ(count_type(frames, "overhead"), 3);
}

TEST(Session, SlowClientDoesNotStallLoop) {
  SessionOptions o;
  o.outbound_capacity = 8;
  Session s(o);
  s.create_instance(config_doc());
  Client slow(s), fast(s);
  slow.hello();
  fast.hello();
  s.start("i1");
  for (int i = 0; i < 100; ++i) {
    s.tick();
    fast.frames();
  }
  auto box = s.outbox(slow.id);
  EXPECT_EQ(box->size(), 8u);
  EXPECT_GT(box->dropped(), 0u);
  // The oldest frames were dropped: what is left is the newest.
  auto frames = slow.frames();
  const auto& last = std::get<ScanFrame>(frames.back());
  EXPECT_EQ(last.tick, 100);
  EXPECT_EQ(s.world()->tick, 100);
  EXPECT_EQ(s.counters()->state_records, 100);
}

TEST(Session, LogRecordsLifecycle) {
  Session s;
  s.create_instance(config_doc());
  Client a(s), b(s);
  a.hello();
  const std::string tb = b.hello().token;
  s.start("i1");
  a.send(R"({"type":"color","key":"D"})");
  s.tick();
  s.close_connection(b.id);
  s.tick();
  Client b2(s);
  b2.hello(tb);
  s.tick();
  s.abort("i1");
  SessionLog log = parse_log(s.last_log_text());
  std::map<RecordKind, int> kinds;
  for (const auto& r : log.records) ++kinds[r.kind];
  EXPECT_EQ(kinds[RecordKind::InstanceStart], 1);
  EXPECT_EQ(kinds[RecordKind::Join], 3);
  EXPECT_EQ(kinds[RecordKind::Leave], 1);
  EXPECT_EQ(kinds[RecordKind::State], 3);
  EXPECT_EQ(kinds[RecordKind::InstanceEnd], 1);
  EXPECT_EQ(log.header.session_id, "session");
  // Player references are hashes, never raw tokens.
  EXPECT_EQ(s.last_log_text().find(tb), std::string::npos);
}

TEST(Session, PlayersListing) {
  Session s;
  s.create_instance(config_doc());
  Client a(s);
  a.hello();
  json players = s.players();
  ASSERT_EQ(players.size(), 1u);
  EXPECT_EQ(players[0]["ordinal"], 1);
  EXPECT_EQ(players[0]["connected"], true);
  EXPECT_EQ(players[0]["agent_id"], 0);
}

TEST(Session, LogsToDirectory) {
  const auto dir = std::filesystem::temp_directory_path() / "swarm_session_logs";
  std::filesystem::remove_all(dir);
  SessionOptions o;
  o.session_id = "sess";
  o.log_dir = dir;
  o.gzip_logs = true;
  Session s(o);
  s.create_instance(config_doc());
  Client a(s);
  a.hello();
  s.start("i1");
  s.tick();
  s.abort("i1");
  ASSERT_TRUE(s.last_log_path());
  EXPECT_EQ(*s.last_log_path(), dir / "sess" / "i1.jsonl.gz");
  SessionLog log = read_log_file(*s.last_log_path());
  EXPECT_TRUE(log.checksum_ok);
  std::filesystem::remove_all(dir);
}

TEST(Outbox, DropsOldest) {
  Outbox box(3);
  int notified = 0;
  box.set_notifier([&] { ++notified; });
  for (int i = 0; i < 5; ++i) box.push(std::to_string(i));
  EXPECT_EQ(box.dropped(), 2u);
  auto items = box.drain();
  EXPECT_EQ(items, (std::vector<std::string>{"2", "3", "4"}));
  EXPECT_EQ(notified, 5);
  EXPECT_EQ(box.size(), 0u);
}
