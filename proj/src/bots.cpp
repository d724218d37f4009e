#include "swarm/bots.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>
#include <limits>
#include <numbers>
#include <random>

#include <zlib.h>

#include "swarm/errors.hpp"

namespace swarm {

namespace {

// Candidate key sets in lexicographic order of their key sequences.
const std::array<MotionIntent, 8>& compass_candidates() {
  using K = MoveKey;
  static const std::array<MotionIntent, 8> sets = {
      MotionIntent{K::Up},   MotionIntent{K::Up, K::Left},   MotionIntent{K::Up, K::Right},
      MotionIntent{K::Down}, MotionIntent{K::Down, K::Left}, MotionIntent{K::Down, K::Right},
      MotionIntent{K::Left}, MotionIntent{K::Right},
  };
  return sets;
}

Vec2 pattern_center(const Pattern& pattern) {
  if (const auto* r = std::get_if<RectanglePerimeter>(&pattern)) return r->center;
  if (const auto* c = std::get_if<CirclePerimeter>(&pattern)) return c->center;
  const auto& pts = std::get<SegmentChain>(pattern).points;
  Vec2 sum;
  for (const auto& p : pts) sum += p;
  return pts.empty() ? sum : sum * (1.0 / static_cast<double>(pts.size()));
}

double angle_around(Vec2 center, Vec2 p) {
  return std::atan2(p.y - center.y, p.x - center.x);
}

void write_file(const std::filesystem::path& path, const std::string& bytes) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  if (path.extension() == ".gz") {
    gzFile gz = gzopen(path.c_str(), "wb");
    if (gz == nullptr) throw IoError("cannot open " + path.string());
    const int n = gzwrite(gz, bytes.data(), static_cast<unsigned>(bytes.size()));
    if (gzclose(gz) != Z_OK || n != static_cast<int>(bytes.size())) {
      throw IoError("cannot write " + path.string());
    }
    return;
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  out << bytes;
  if (!out) throw IoError("cannot write " + path.string());
}

}  // namespace

MotionIntent compass_keys(Vec2 v) {
  const double len = norm(v);
  if (len == 0.0) return {};
  const Vec2 u = v * (1.0 / len);
  MotionIntent best;
  double best_cos = -std::numeric_limits<double>::infinity();
  for (const MotionIntent& keys : compass_candidates()) {
    const double c = dot(*direction_from_intent(keys), u);
    if (c > best_cos + 1e-12) {
      best_cos = c;
      best = keys;
    }
  }
  return best;
}

MotionIntent oracle_keys(Vec2 self, Vec2 target, double stop_radius) {
  const Vec2 to = target - self;
  if (norm(to) <= stop_radius) return {};
  return compass_keys(to);
}

MotionIntent local_keys(const ScanFrame& scan, double agent_radius) {
  const int n = static_cast<int>(scan.hits.size());
  int nearest = -1;
  int nearest_wall = -1;
  for (int k = 0; k < n; ++k) {
    const RayHit& h = scan.hits[static_cast<std::size_t>(k)];
    if (h.kind == HitKind::None) continue;
    if (nearest < 0 || h.distance < scan.hits[static_cast<std::size_t>(nearest)].distance) nearest = k;
    if (h.kind == HitKind::Wall &&
        (nearest_wall < 0 || h.distance < scan.hits[static_cast<std::size_t>(nearest_wall)].distance)) {
      nearest_wall = k;
    }
  }
  if (nearest >= 0 && scan.hits[static_cast<std::size_t>(nearest)].distance < 2.0 * agent_radius + 4.0) {
    const double b = bearing_of(nearest, n);
    return compass_keys({-std::cos(b), -std::sin(b)});
  }
  if (nearest_wall >= 0) {
    const double b = bearing_of(nearest_wall, n) + 0.5 * std::numbers::pi;
    return compass_keys({std::cos(b), std::sin(b)});
  }
  return MotionIntent{MoveKey::Up};
}

OraclePolicy::OraclePolicy(Vec2 target, AgentColor target_color, double stop_radius,
                           std::function<Vec2()> pose)
    : target_(target), target_color_(target_color), stop_radius_(stop_radius), pose_(std::move(pose)) {}

PolicyAction OraclePolicy::act(const PolicyObservation& obs) {
  PolicyAction action;
  action.keys = oracle_keys(pose_(), target_, stop_radius_);
  if (!color_sent_) {
    color_sent_ = true;
    if (obs.own_color != target_color_) action.color = target_color_;
  }
  return action;
}

PolicyAction LocalPolicy::act(const PolicyObservation& obs) {
  if (!obs.scan) return {};
  return {local_keys(*obs.scan, agent_radius_), std::nullopt};
}

// ---------------------------------------------------------------- BotClient

BotClient::BotClient(Session& session, std::optional<std::string> token)
    : session_(session), conn_(session.open_connection()) {
  session_.handle_message(conn_, protocol::encode(protocol::Hello{std::move(token)}));
  receive();
}

void BotClient::receive() {
  auto box = session_.outbox(conn_);
  if (!box) return;
  for (const std::string& text : box->drain()) {
    const protocol::ServerMessage msg = protocol::decode_server(text);
    const std::string type(protocol::frame_type(msg));
    ++recording_.frames_by_type[type];

    auto check_order = [&](std::int64_t tick) {
      auto [it, fresh] = last_tick_by_type_.try_emplace(type, tick);
      if (!fresh) {
        if (tick <= it->second) ++recording_.tick_order_violations;
        it->second = tick;
      }
    };

    if (const auto* w = std::get_if<protocol::Welcome>(&msg)) {
      token_ = w->token;
      agent_ = w->agent_id;
      config_ = w->config;
      if (w->color) own_color_ = w->color;
    } else if (const auto* s = std::get_if<ScanFrame>(&msg)) {
      check_order(s->tick);
      own_color_ = s->self_color;
      scan_ = *s;
    } else if (const auto* o = std::get_if<OverheadFrame>(&msg)) {
      check_order(o->snapshot_tick);
      overhead_ = *o;
    } else if (const auto* p = std::get_if<protocol::PhaseFrame>(&msg)) {
      phase_ = p->phase;
      if (p->color) own_color_ = p->color;
    } else if (const auto* e = std::get_if<protocol::ErrorFrame>(&msg)) {
      recording_.error_codes.push_back(e->code);
    }
  }
}

PolicyObservation BotClient::observe(std::int64_t tick) {
  PolicyObservation obs;
  obs.tick = tick;
  obs.own_color = own_color_;
  obs.scan = scan_;
  if (scan_) ++recording_.policy_observations_with_scan;
  if (overhead_) {
    obs.overhead = overhead_;
    obs.overhead_age_ticks = tick - overhead_->snapshot_tick;
    recording_.max_overhead_age_ticks =
        std::max(recording_.max_overhead_age_ticks, *obs.overhead_age_ticks);
  }
  return obs;
}

void BotClient::apply(const PolicyAction& action) {
  if (!connected_) return;
  if (!sent_keys_ || *sent_keys_ != action.keys) {
    session_.handle_message(conn_, protocol::encode(protocol::Input{action.keys}));
    sent_keys_ = action.keys;
  }
  if (action.color) {
    session_.handle_message(conn_, protocol::encode(protocol::ColorKey{*action.color}));
  }
}

void BotClient::disconnect() {
  if (!connected_) return;
  session_.close_connection(conn_);
  connected_ = false;
}

// ---------------------------------------------------------------- runner

std::optional<PolicyKind> policy_kind_from_name(std::string_view name) {
  if (name == "oracle") return PolicyKind::Oracle;
  if (name == "local") return PolicyKind::Local;
  if (name == "idle") return PolicyKind::Idle;
  return std::nullopt;
}

PolicyFactory make_policy_factory(PolicyKind kind) {
  switch (kind) {
    case PolicyKind::Oracle:
      return [](const BotContext& ctx) -> std::unique_ptr<Policy> {
        if (!ctx.slot || !ctx.pose) throw ContractViolation("oracle policy needs a slot and a pose");
        return std::make_unique<OraclePolicy>(*ctx.slot, AgentColor::C1,
                                              0.5 * ctx.config->objective.dist_tol, ctx.pose);
      };
    case PolicyKind::Local:
      return [](const BotContext& ctx) -> std::unique_ptr<Policy> {
        return std::make_unique<LocalPolicy>(ctx.config->physics.agent_radius);
      };
    case PolicyKind::Idle:
      break;
  }
  return [](const BotContext&) -> std::unique_ptr<Policy> { return std::make_unique<IdlePolicy>(); };
}

std::map<AgentId, Vec2> assign_slots(const std::vector<AgentState>& agents, const Pattern& pattern) {
  std::map<AgentId, Vec2> out;
  const int n = static_cast<int>(agents.size());
  if (n == 0) return out;
  const Vec2 center = pattern_center(pattern);
  std::vector<Vec2> slots = equally_spaced_slots(pattern, n);

  std::vector<const AgentState*> order;
  for (const auto& a : agents) order.push_back(&a);
  std::stable_sort(order.begin(), order.end(), [&](const AgentState* a, const AgentState* b) {
    return angle_around(center, a->pos) < angle_around(center, b->pos);
  });
  std::stable_sort(slots.begin(), slots.end(), [&](Vec2 a, Vec2 b) {
    return angle_around(center, a) < angle_around(center, b);
  });

  int best_shift = 0;
  double best_cost = std::numeric_limits<double>::infinity();
  for (int s = 0; s < n; ++s) {
    double worst = 0.0;
    for (int i = 0; i < n; ++i) {
      worst = std::max(worst, distance(order[static_cast<std::size_t>(i)]->pos,
                                       slots[static_cast<std::size_t>((i + s) % n)]));
    }
    if (worst < best_cost) {
      best_cost = worst;
      best_shift = s;
    }
  }
  for (int i = 0; i < n; ++i) {
    out[order[static_cast<std::size_t>(i)]->id] = slots[static_cast<std::size_t>((i + best_shift) % n)];
  }
  return out;
}

HeadlessResult run_headless(const InstanceConfig& config, const PolicyFactory& policies,
                            const HeadlessOptions& options) {
  const auto wall_start = std::chrono::steady_clock::now();

  SessionOptions so;
  so.session_id = "headless";
  so.outbound_capacity = 1024;
  auto token_rng = std::make_shared<std::mt19937_64>(options.token_seed);
  so.token_source = [token_rng] {
    char buf[33];
    std::snprintf(buf, sizeof buf, "%016llx%016llx", static_cast<unsigned long long>((*token_rng)()),
                  static_cast<unsigned long long>((*token_rng)()));
    return std::string(buf);
  };
  Session session(so);

  const nlohmann::json normalized = session.create_instance(config_to_json(config));
  const std::string instance_id = normalized.at("instance_id").get<std::string>();
  const InstanceConfig cfg = config_from_json(normalized);

  std::vector<std::unique_ptr<BotClient>> bots;
  bots.reserve(static_cast<std::size_t>(options.bots));
  for (int i = 0; i < options.bots; ++i) bots.push_back(std::make_unique<BotClient>(session));

  session.start(instance_id);

  const WorldState& world = *session.world();
  std::map<AgentId, Vec2> slots;
  if (world.agents.size() >= 1) slots = assign_slots(world.agents, cfg.objective.pattern);

  std::vector<std::unique_ptr<Policy>> bot_policies;
  for (auto& bot : bots) {
    bot->receive();
    if (!bot->agent()) {
      bot_policies.push_back(std::make_unique<IdlePolicy>());
      continue;
    }
    BotContext ctx;
    ctx.agent = *bot->agent();
    ctx.config = &cfg;
    ctx.pose = [&session, agent = ctx.agent] { return session.world()->find(agent)->pos; };
    if (auto it = slots.find(ctx.agent); it != slots.end()) ctx.slot = it->second;
    bot_policies.push_back(policies(ctx));
  }

  HeadlessResult result;
  bool finished = false;
  while (!finished) {
    try {
      for (std::size_t i = 0; i < bots.size(); ++i) {
        bots[i]->receive();
        if (!bots[i]->agent()) continue;
        const PolicyObservation obs = bots[i]->observe(session.world()->tick);
        bots[i]->apply(bot_policies[i]->act(obs));
      }
    } catch (const std::exception& e) {
      session.abort(instance_id, std::string("policy error: ") + e.what());
      break;
    }
    if (session.world()->tick >= options.max_ticks) {
      session.abort(instance_id, "max_ticks");
      break;
    }
    const TickReport report = session.tick();
    finished = report.completed || report.aborted;
  }
  for (auto& bot : bots) bot->receive();

  result.final_phase = *session.phase();
  result.ticks = session.world()->tick;
  result.counters = *session.counters();
  for (const auto& bot : bots) result.recordings.push_back(bot->recording());
  result.log_text = session.last_log_text();
  result.log = parse_log(result.log_text, ReadMode::Strict);
  if (options.out) write_file(*options.out, result.log_text);
  result.wall_time = std::chrono::steady_clock::now() - wall_start;
  return result;
}

}  // namespace swarm
