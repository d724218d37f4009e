#include "swarm/session.hpp"

#include <algorithm>
#include <cctype>
#include <cinttypes>
#include <cstdio>
#include <random>

#include "swarm/errors.hpp"

namespace swarm {

using nlohmann::json;
using protocol::ErrorFrame;
using protocol::PhaseFrame;

// ---------------------------------------------------------------- Outbox

void Outbox::push(std::string frame) {
  std::function<void()> notify;
  {
    std::lock_guard lock(mu_);
    if (capacity_ > 0 && frames_.size() >= capacity_) {
      frames_.pop_front();
      ++dropped_;
    }
    frames_.push_back(std::move(frame));
    notify = notify_;
  }
  if (notify) notify();
}

std::vector<std::string> Outbox::drain() {
  std::lock_guard lock(mu_);
  std::vector<std::string> out(std::make_move_iterator(frames_.begin()),
                               std::make_move_iterator(frames_.end()));
  frames_.clear();
  return out;
}

std::size_t Outbox::size() const {
  std::lock_guard lock(mu_);
  return frames_.size();
}

std::size_t Outbox::dropped() const {
  std::lock_guard lock(mu_);
  return dropped_;
}

void Outbox::set_notifier(std::function<void()> fn) {
  std::lock_guard lock(mu_);
  notify_ = std::move(fn);
}

// ---------------------------------------------------------------- Instance

struct Session::Instance {
  InstanceConfig config;
  Phase phase = Phase::Lobby;
  std::vector<std::pair<Phase, std::int64_t>> transitions;
  WorldState world;
  CompletionStatus completion;
  std::int64_t last_overhead_tick = 0;
  std::map<AgentId, PendingInput> pending;
  std::map<AgentId, std::string> agent_token;
  AgentId next_agent = 0;
  InstanceCounters counters;
  std::string end_reason;

  std::unique_ptr<FileLog> file_log;
  std::unique_ptr<std::ostringstream> mem_stream;
  std::unique_ptr<LogWriter> mem_writer;

  LogWriter* writer() {
    if (file_log) return &file_log->writer();
    return mem_writer.get();
  }
};

namespace {

std::string random_token() {
  static thread_local std::random_device rd;
  char buf[33];
  std::snprintf(buf, sizeof buf, "%08x%08x%08x%08x", rd(), rd(), rd(), rd());
  return buf;
}

bool valid_instance_id(const std::string& id) {
  if (id.empty() || id.size() > 64) return false;
  return std::all_of(id.begin(), id.end(), [](unsigned char c) {
    return std::isalnum(c) != 0 || c == '-' || c == '_' || c == '.';
  }) && id.front() != '.';
}

}  // namespace

Session::Session(SessionOptions options) : options_(std::move(options)) {
  if (!options_.token_source) options_.token_source = random_token;
}

Session::~Session() = default;

std::string Session::mint_token() {
  for (;;) {
    std::string t = options_.token_source();
    if (!players_.contains(t)) return t;
  }
}

// ---------------------------------------------------------------- transport

ConnectionId Session::open_connection() {
  const ConnectionId id = next_connection_++;
  connections_[id].outbox = std::make_shared<Outbox>(options_.outbound_capacity);
  return id;
}

std::shared_ptr<Outbox> Session::outbox(ConnectionId id) const {
  auto it = connections_.find(id);
  return it == connections_.end() ? nullptr : it->second.outbox;
}

void Session::send_raw(ConnectionId id, const std::string& frame) {
  if (auto it = connections_.find(id); it != connections_.end()) it->second.outbox->push(frame);
}

void Session::send(ConnectionId id, const protocol::ServerMessage& msg) {
  send_raw(id, protocol::encode(msg));
}

std::optional<AgentId> Session::agent_of(ConnectionId id) const {
  auto it = connections_.find(id);
  if (it == connections_.end() || !it->second.token || it->second.spectator) return std::nullopt;
  const Player& p = players_.at(*it->second.token);
  if (p.connection != id) return std::nullopt;
  return p.agent;
}

void Session::close_connection(ConnectionId id) {
  auto it = connections_.find(id);
  if (it == connections_.end()) return;
  if (it->second.token) {
    Player& p = players_.at(*it->second.token);
    if (p.connection == id) {
      p.connection.reset();
      if (instance_ && instance_->phase == Phase::Running && p.agent) {
        // Held keys are released when the player drops.
        instance_->pending[*p.agent].keys = MotionIntent{};
        append_log(records::leave(instance_->world.t_ms, *p.agent, p.hash));
      }
    }
  }
  connections_.erase(it);
}

void Session::bind_lobby_player(Player& p) {
  if (!instance_ || instance_->phase != Phase::Lobby || p.agent) return;
  if (instance_->next_agent >= instance_->config.max_players) return;
  p.agent = instance_->next_agent++;
  instance_->agent_token[*p.agent] = p.identity.token;
}

void Session::send_welcome(ConnectionId id) {
  const Connection& c = connections_.at(id);
  const Player& p = players_.at(*c.token);
  protocol::Welcome w;
  w.token = p.identity.token;
  w.config = instance_ ? config_to_json(instance_->config) : json(nullptr);
  const bool live = instance_ && (instance_->phase == Phase::Lobby || instance_->phase == Phase::Running);
  if (live && !c.spectator && p.agent) {
    w.agent_id = p.agent;
    if (const AgentState* a = instance_->world.find(*p.agent); a && instance_->phase == Phase::Running) {
      w.color = a->color;
    }
  }
  send(id, w);
  if (instance_) {
    PhaseFrame pf{instance_->phase, instance_->world.tick, std::nullopt, w.color};
    send(id, pf);
  }
}

bool Session::handle_message(ConnectionId id, std::string_view text) {
  auto cit = connections_.find(id);
  if (cit == connections_.end()) return false;
  Connection& conn = cit->second;

  protocol::ClientMessage msg;
  try {
    msg = protocol::decode_client(text);
  } catch (const ParseError& e) {
    send(id, ErrorFrame{protocol::error_code::kProtocol, e.what()});
    return false;
  }

  if (const auto* hello = std::get_if<protocol::Hello>(&msg)) {
    if (conn.token) {
      send(id, ErrorFrame{protocol::error_code::kProtocol, "duplicate hello"});
      return false;
    }
    Player* player = nullptr;
    if (hello->token) {
      if (auto it = players_.find(*hello->token); it != players_.end()) player = &it->second;
    }
    if (player == nullptr) {
      Player fresh;
      fresh.identity = {mint_token(), next_ordinal_++, options_.session_id};
      fresh.hash = token_hash(fresh.identity.token);
      player = &players_.emplace(fresh.identity.token, std::move(fresh)).first->second;
    }
    conn.token = player->identity.token;

    if (player->connection && player->connection != id && connections_.contains(*player->connection)) {
      // Same identity already connected elsewhere: this one only watches.
      conn.spectator = true;
    } else {
      player->connection = id;
      bind_lobby_player(*player);
      conn.spectator = !(instance_ && player->agent &&
                         (instance_->phase == Phase::Lobby || instance_->phase == Phase::Running));
      if (instance_ && instance_->phase == Phase::Running && player->agent) {
        append_log(records::join(instance_->world.t_ms, *player->agent, player->hash,
                                 player->identity.ordinal));
      }
    }
    send_welcome(id);
    return true;
  }

  if (!conn.token) {
    send(id, ErrorFrame{protocol::error_code::kProtocol, "hello required first"});
    return false;
  }
  const auto agent = agent_of(id);
  if (!agent || !instance_ || instance_->phase != Phase::Running) return true;

  if (const auto* input = std::get_if<protocol::Input>(&msg)) {
    instance_->pending[*agent].keys = input->keys;
  } else if (const auto* color = std::get_if<protocol::ColorKey>(&msg)) {
    if (!instance_->config.capabilities.color_switching) {
      ++instance_->counters.capability_denials;
      send(id, ErrorFrame{protocol::error_code::kCapabilityDenied, "color switching disabled"});
    } else {
      instance_->pending[*agent].colors.push_back(color->color);
    }
  }
  return true;
}

// ---------------------------------------------------------------- admin

json Session::create_instance(const json& config_doc) {
  if (instance_ && instance_->phase == Phase::Running) {
    throw AdminError(409, "an instance is already running");
  }
  InstanceConfig cfg;
  try {
    cfg = config_from_json(config_doc);
  } catch (const ConfigError& e) {
    throw AdminError(422, "invalid instance config", {e.what()});
  }
  if (cfg.instance_id.empty()) cfg.instance_id = "i" + std::to_string(next_instance_);
  auto problems = cfg.violations();
  if (!valid_instance_id(cfg.instance_id)) {
    problems.emplace_back("instance_id must be 1-64 characters of [A-Za-z0-9._-]");
  }
  if (finished_.contains(cfg.instance_id)) problems.emplace_back("instance_id already used");
  if (!problems.empty()) throw AdminError(422, "invalid instance config", std::move(problems));
  ++next_instance_;

  if (instance_) {
    finished_[instance_->config.instance_id] = status(instance_->config.instance_id);
  }
  for (auto& [token, p] : players_) p.agent.reset();

  instance_ = std::make_unique<Instance>();
  instance_->config = cfg;
  instance_->world.arena = cfg.arena;
  instance_->transitions.emplace_back(Phase::Lobby, 0);

  std::vector<Player*> connected;
  for (auto& [token, p] : players_) {
    if (p.connection) connected.push_back(&p);
  }
  std::sort(connected.begin(), connected.end(),
            [](const Player* a, const Player* b) { return a->identity.ordinal < b->identity.ordinal; });
  for (Player* p : connected) bind_lobby_player(*p);
  for (auto& [cid, conn] : connections_) {
    if (!conn.token) continue;
    const Player& p = players_.at(*conn.token);
    conn.spectator = !(p.connection == cid && p.agent);
    send_welcome(cid);
  }
  return config_to_json(cfg);
}

void Session::start(const std::string& instance_id) {
  if (!instance_ || instance_->config.instance_id != instance_id) {
    if (finished_.contains(instance_id)) throw AdminError(409, "instance already ended");
    throw AdminError(404, "unknown instance " + instance_id);
  }
  Instance& inst = *instance_;
  if (inst.phase != Phase::Lobby) {
    throw AdminError(409, std::string("cannot start from phase ") +
                              std::string(protocol::phase_name(inst.phase)));
  }

  try {
    inst.world.agents = place_agents(inst.config, inst.next_agent);
  } catch (const ConfigError& e) {
    throw AdminError(422, "cannot place agents", {e.what()});
  }
  for (auto& a : inst.world.agents) a.player_token_hash = token_hash(inst.agent_token.at(a.id));
  inst.world.tick = 0;
  inst.world.t_ms = 0;

  LogHeader header;
  header.instance_id = inst.config.instance_id;
  header.session_id = options_.session_id;
  header.config = config_to_json(inst.config);
  if (const auto* u = std::get_if<UniformRandomPlacement>(&inst.config.placement)) {
    header.placement_seed = u->seed;
  }
  try {
    if (options_.log_dir.empty()) {
      inst.mem_stream = std::make_unique<std::ostringstream>();
      inst.mem_writer = std::make_unique<LogWriter>(*inst.mem_stream, header);
    } else {
      inst.file_log = std::make_unique<FileLog>(
          options_.log_dir / options_.session_id / (inst.config.instance_id + ".jsonl"), header,
          options_.gzip_logs);
    }
  } catch (const IoError& e) {
    throw AdminError(500, "cannot open instance log", {e.what()});
  }

  inst.phase = Phase::Running;
  inst.transitions.emplace_back(Phase::Running, 0);
  append_log(records::instance_start(0, inst.world.agents));
  for (const auto& a : inst.world.agents) {
    const Player& p = players_.at(inst.agent_token.at(a.id));
    append_log(records::join(0, a.id, p.hash, p.identity.ordinal));
  }

  for (auto& [cid, conn] : connections_) {
    if (!conn.token) continue;
    const auto agent = agent_of(cid);
    PhaseFrame pf{Phase::Running, 0, inst.config.countdown_ms, std::nullopt};
    if (agent) pf.color = inst.world.find(*agent)->color;
    send(cid, pf);
  }
}

void Session::abort(const std::string& instance_id, std::string_view reason) {
  if (!instance_ || instance_->config.instance_id != instance_id) {
    if (finished_.contains(instance_id)) throw AdminError(409, "instance already ended");
    throw AdminError(404, "unknown instance " + instance_id);
  }
  if (instance_->phase != Phase::Running) {
    throw AdminError(409, std::string("cannot abort from phase ") +
                              std::string(protocol::phase_name(instance_->phase)));
  }
  finish(Phase::Aborted, reason);
}

json Session::status(const std::string& instance_id) const {
  if (!instance_ || instance_->config.instance_id != instance_id) {
    if (auto it = finished_.find(instance_id); it != finished_.end()) return it->second;
    throw AdminError(404, "unknown instance " + instance_id);
  }
  const Instance& inst = *instance_;
  json transitions = json::array();
  for (const auto& [phase, t] : inst.transitions) {
    transitions.push_back({{"phase", std::string(protocol::phase_name(phase))}, {"t_ms", t}});
  }
  json j = {
      {"instance_id", inst.config.instance_id},
      {"phase", std::string(protocol::phase_name(inst.phase))},
      {"transitions", transitions},
      {"tick", inst.world.tick},
      {"t_ms", inst.world.t_ms},
      {"agents", inst.phase == Phase::Lobby ? inst.next_agent
                                            : static_cast<AgentId>(inst.world.agents.size())},
      {"complete", inst.completion.complete},
      {"satisfied_now", inst.completion.satisfied_now},
      {"residual", inst.completion.residual},
      {"consensus", inst.completion.consensus},
      {"counters",
       {{"state_records", inst.counters.state_records},
        {"overhead_broadcasts", inst.counters.overhead_broadcasts},
        {"scan_frames", inst.counters.scan_frames},
        {"capability_denials", inst.counters.capability_denials}}},
      {"config", config_to_json(inst.config)},
  };
  if (!inst.end_reason.empty()) j["end_reason"] = inst.end_reason;
  if (inst.file_log) j["log_path"] = inst.file_log->path().string();
  return j;
}

json Session::players() const {
  std::vector<const Player*> sorted;
  for (const auto& [token, p] : players_) sorted.push_back(&p);
  std::sort(sorted.begin(), sorted.end(),
            [](const Player* a, const Player* b) { return a->identity.ordinal < b->identity.ordinal; });
  json out = json::array();
  for (const Player* p : sorted) {
    out.push_back({{"ordinal", p->identity.ordinal},
                   {"player", p->hash},
                   {"connected", p->connection.has_value()},
                   {"agent_id", p->agent ? json(*p->agent) : json(nullptr)}});
  }
  return out;
}

// ---------------------------------------------------------------- loop

bool Session::running() const { return instance_ && instance_->phase == Phase::Running; }

std::optional<Phase> Session::phase() const {
  if (!instance_) return std::nullopt;
  return instance_->phase;
}

const WorldState* Session::world() const { return instance_ ? &instance_->world : nullptr; }
const InstanceConfig* Session::config() const { return instance_ ? &instance_->config : nullptr; }
const InstanceCounters* Session::counters() const {
  return instance_ ? &instance_->counters : nullptr;
}

std::optional<std::string> Session::current_instance_id() const {
  if (!instance_) return std::nullopt;
  return instance_->config.instance_id;
}

std::int64_t Session::tick_period_ms() const {
  return instance_ ? instance_->config.physics.tick_period_ms() : PhysicsParams{}.tick_period_ms();
}

void Session::append_log(const LogRecord& rec) {
  if (!instance_) return;
  LogWriter* w = instance_->writer();
  if (w == nullptr || w->closed()) return;
  w->append(rec);
}

void Session::finish(Phase end_phase, std::string_view reason) {
  Instance& inst = *instance_;
  inst.phase = end_phase;
  inst.end_reason = std::string(reason);
  inst.transitions.emplace_back(end_phase, inst.world.t_ms);
  try {
    append_log(records::instance_end(inst.world.t_ms, protocol::phase_name(end_phase), reason));
    if (inst.file_log) {
      last_log_path_ = inst.file_log->close();
    } else if (inst.mem_writer) {
      inst.mem_writer->close();
      last_log_text_ = inst.mem_stream->str();
    }
  } catch (const std::exception&) {
    // Log is unwritable; the instance is over either way.
  }
  for (auto& [cid, conn] : connections_) {
    if (conn.token) send(cid, PhaseFrame{end_phase, inst.world.tick, std::nullopt, std::nullopt});
  }
}

TickReport Session::tick() {
  if (!running()) throw ContractViolation("tick requires a running instance");
  Instance& inst = *instance_;
  const InstanceConfig& cfg = inst.config;
  const std::int64_t next_t = (inst.world.tick + 1) * cfg.physics.tick_period_ms();
  TickReport report;

  try {
    // 1. latched inputs take effect this tick
    for (auto& [agent_id, pending] : inst.pending) {
      AgentState* agent = inst.world.find(agent_id);
      if (agent == nullptr) continue;
      if (pending.keys) {
        agent->intent = *pending.keys;
        append_log(records::input(next_t, agent_id, *pending.keys));
      }
      for (AgentColor c : pending.colors) {
        if (agent->color == c) continue;
        agent->color = c;
        append_log(records::color(next_t, agent_id, c));
      }
    }
    inst.pending.clear();

    // 2. physics
    try {
      inst.world = resolve_world(inst.world, cfg.physics);
    } catch (const PhysicsFault& e) {
      inst.world.tick += 1;
      inst.world.t_ms = next_t;
      finish(Phase::Aborted, std::string("physics fault: ") + e.what());
      report.tick = inst.world.tick;
      report.aborted = true;
      return report;
    }
    report.tick = inst.world.tick;

    // 3. objective
    inst.completion = update_completion(inst.completion, inst.world, cfg.objective, inst.world.t_ms);

    // 4-6. observations
    if (cfg.capabilities.global_sensing &&
        overhead_due(inst.world.tick, inst.last_overhead_tick, cfg.sensing, cfg.physics)) {
      inst.last_overhead_tick = inst.world.tick;
      const std::string frame = protocol::encode(overhead_snapshot(inst.world, cfg.sensing));
      for (auto& [cid, conn] : connections_) {
        if (conn.token) conn.outbox->push(frame);
      }
      ++inst.counters.overhead_broadcasts;
      report.overhead_captured = true;
    }
    if (cfg.capabilities.local_sensing) {
      for (const auto& a : inst.world.agents) {
        const Player& p = players_.at(inst.agent_token.at(a.id));
        if (!p.connection) continue;
        send(*p.connection, neighborhood_scan(inst.world, a.id, cfg.sensing, cfg.physics));
        ++inst.counters.scan_frames;
      }
    }

    // 7. trajectory record
    append_log(records::state(inst.world));
    ++inst.counters.state_records;

    // 8. completion
    if (inst.completion.complete) {
      append_log(records::objective_complete(inst.world.t_ms, inst.world.tick,
                                             inst.completion.residual));
      finish(Phase::Complete, "objective_complete");
      report.completed = true;
    }
  } catch (const IoError& e) {
    finish(Phase::Aborted, std::string("log i/o failure: ") + e.what());
    report.aborted = true;
  }
  return report;
}

}  // namespace swarm
