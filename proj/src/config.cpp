#include "swarm/config.hpp"

#include <algorithm>
#include <fstream>
#include <random>
#include <sstream>

#include "swarm/errors.hpp"

namespace swarm {

using nlohmann::json;

namespace {

std::string join_lines(const std::vector<std::string>& items) {
  std::string out;
  for (const auto& s : items) {
    if (!out.empty()) out += "; ";
    out += s;
  }
  return out;
}

Vec2 point_from_json(const json& j) {
  if (!j.is_array() || j.size() != 2) throw ConfigError("expected [x, y] point");
  return {j.at(0).get<double>(), j.at(1).get<double>()};
}

json point_to_json(Vec2 p) { return json::array({p.x, p.y}); }

Pattern pattern_from_json(const json& j) {
  const std::string type = j.at("type").get<std::string>();
  if (type == "rectangle") {
    return RectanglePerimeter{point_from_json(j.at("center")), j.at("width").get<double>(),
                              j.at("height").get<double>()};
  }
  if (type == "circle") {
    return CirclePerimeter{point_from_json(j.at("center")), j.at("radius").get<double>()};
  }
  if (type == "chain") {
    SegmentChain chain;
    for (const auto& p : j.at("points")) chain.points.push_back(point_from_json(p));
    return chain;
  }
  throw ConfigError("unknown pattern type '" + type + "'");
}

json pattern_to_json(const Pattern& pattern) {
  if (const auto* r = std::get_if<RectanglePerimeter>(&pattern)) {
    return {{"type", "rectangle"},
            {"center", point_to_json(r->center)},
            {"width", r->width},
            {"height", r->height}};
  }
  if (const auto* c = std::get_if<CirclePerimeter>(&pattern)) {
    return {{"type", "circle"}, {"center", point_to_json(c->center)}, {"radius", c->radius}};
  }
  const auto& chain = std::get<SegmentChain>(pattern);
  json pts = json::array();
  for (const auto& p : chain.points) pts.push_back(point_to_json(p));
  return {{"type", "chain"}, {"points", pts}};
}

template <class T>
void read_opt(const json& obj, const char* key, T& out) {
  if (auto it = obj.find(key); it != obj.end() && !it->is_null()) out = it->get<T>();
}

Placement placement_from_json(const json& j) {
  const std::string type = j.at("type").get<std::string>();
  if (type == "uniform_random") return UniformRandomPlacement{j.at("seed").get<std::uint64_t>()};
  if (type == "explicit") {
    ExplicitPlacement out;
    for (const auto& e : j.at("agents")) {
      if (!e.is_array() || (e.size() != 2 && e.size() != 3)) {
        throw ConfigError("placement entries must be [x, y] or [x, y, color]");
      }
      PlacedAgent a{{e.at(0).get<double>(), e.at(1).get<double>()}, AgentColor::C1};
      if (e.size() == 3) {
        auto c = color_from_code(e.at(2).get<int>());
        if (!c) throw ConfigError("placement color must be 1, 2 or 3");
        a.color = *c;
      }
      out.agents.push_back(a);
    }
    return out;
  }
  throw ConfigError("unknown placement type '" + type + "'");
}

json placement_to_json(const Placement& placement) {
  if (const auto* u = std::get_if<UniformRandomPlacement>(&placement)) {
    return {{"type", "uniform_random"}, {"seed", u->seed}};
  }
  json agents = json::array();
  for (const auto& a : std::get<ExplicitPlacement>(placement).agents) {
    agents.push_back(json::array({a.pos.x, a.pos.y, color_code(a.color)}));
  }
  return {{"type", "explicit"}, {"agents", agents}};
}

// 53 random mantissa bits mapped to [0, 1); stable across standard libraries.
double unit_double(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

}  // namespace

std::vector<std::string> InstanceConfig::violations() const {
  std::vector<std::string> out;
  if (!(arena.width > 0.0 && arena.height > 0.0)) {
    out.emplace_back("arena width and height must be > 0");
  }
  for (auto& v : physics.violations()) out.push_back(std::move(v));
  if (physics.violations().empty()) {
    for (auto& v : sensing.violations(arena, physics)) out.push_back(std::move(v));
  }
  for (auto& v : objective.violations()) out.push_back(std::move(v));
  if (!capabilities.local_sensing && !capabilities.global_sensing) {
    out.emplace_back("at least one of local_sensing / global_sensing must be enabled");
  }
  if (max_players < 1) out.emplace_back("max_players must be >= 1");
  if (countdown_ms < 0) out.emplace_back("countdown_ms must be >= 0");
  if (arena.width <= 2.0 * physics.agent_radius || arena.height <= 2.0 * physics.agent_radius) {
    out.emplace_back("arena must be larger than one agent");
  }
  if (const auto* e = std::get_if<ExplicitPlacement>(&placement)) {
    const double r = physics.agent_radius;
    if (static_cast<int>(e->agents.size()) < max_players) {
      out.emplace_back("explicit placement must list at least max_players agents");
    }
    for (std::size_t i = 0; i < e->agents.size(); ++i) {
      const Vec2 p = e->agents[i].pos;
      if (p.x < r || p.x > arena.width - r || p.y < r || p.y > arena.height - r) {
        out.emplace_back("explicit placement entry " + std::to_string(i) + " is outside the walls");
      }
      for (std::size_t j = i + 1; j < e->agents.size(); ++j) {
        if (distance(p, e->agents[j].pos) < 2.0 * r) {
          out.emplace_back("explicit placement entries " + std::to_string(i) + " and " +
                           std::to_string(j) + " overlap");
        }
      }
    }
  }
  return out;
}

namespace {

const json* section(const json& doc, const char* key) {
  auto it = doc.find(key);
  if (it == doc.end() || it->is_null()) return nullptr;
  if (!it->is_object()) throw ConfigError(std::string(key) + " must be a JSON object");
  return &*it;
}

}  // namespace

InstanceConfig config_from_json(const json& doc) {
  if (!doc.is_object()) throw ConfigError("instance config must be a JSON object");
  InstanceConfig c;
  try {
    read_opt(doc, "instance_id", c.instance_id);
    if (const json* it = section(doc, "arena")) {
      read_opt(*it, "width", c.arena.width);
      read_opt(*it, "height", c.arena.height);
    }
    if (const json* it = section(doc, "physics")) {
      read_opt(*it, "speed", c.physics.speed);
      read_opt(*it, "agent_radius", c.physics.agent_radius);
      read_opt(*it, "tick_rate", c.physics.tick_rate);
      read_opt(*it, "contact_epsilon", c.physics.contact_epsilon);
    }
    if (const json* it = section(doc, "sensing")) {
      read_opt(*it, "scan_range", c.sensing.scan_range);
      read_opt(*it, "n_rays", c.sensing.n_rays);
      read_opt(*it, "overhead_rate", c.sensing.overhead_rate);
      if (auto f = it->find("fov"); f != it->end() && !f->is_null()) {
        if (!f->is_array() || f->size() != 4) throw ConfigError("sensing.fov must be [x, y, w, h]");
        c.sensing.fov = Rect{f->at(0).get<double>(), f->at(1).get<double>(),
                             f->at(2).get<double>(), f->at(3).get<double>()};
      }
    }
    if (const json* it = section(doc, "objective")) {
      if (auto p = it->find("pattern"); p != it->end()) c.objective.pattern = pattern_from_json(*p);
      read_opt(*it, "dist_tol", c.objective.dist_tol);
      read_opt(*it, "max_gap_factor", c.objective.max_gap_factor);
      read_opt(*it, "require_color_consensus", c.objective.require_color_consensus);
      read_opt(*it, "hold_ms", c.objective.hold_ms);
    }
    if (const json* it = section(doc, "capabilities")) {
      read_opt(*it, "local_sensing", c.capabilities.local_sensing);
      read_opt(*it, "global_sensing", c.capabilities.global_sensing);
      read_opt(*it, "color_switching", c.capabilities.color_switching);
    }
    read_opt(doc, "max_players", c.max_players);
    if (auto it = doc.find("placement"); it != doc.end()) c.placement = placement_from_json(*it);
    read_opt(doc, "countdown_ms", c.countdown_ms);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("malformed instance config: ") + e.what());
  }
  return c;
}

json config_to_json(const InstanceConfig& c) {
  const Rect fov = c.sensing.fov_for(c.arena);
  return {
      {"instance_id", c.instance_id},
      {"arena", {{"width", c.arena.width}, {"height", c.arena.height}}},
      {"physics",
       {{"speed", c.physics.speed},
        {"agent_radius", c.physics.agent_radius},
        {"tick_rate", c.physics.tick_rate},
        {"contact_epsilon", c.physics.contact_epsilon}}},
      {"sensing",
       {{"scan_range", c.sensing.scan_range},
        {"n_rays", c.sensing.n_rays},
        {"overhead_rate", c.sensing.overhead_rate},
        {"fov", json::array({fov.x, fov.y, fov.w, fov.h})}}},
      {"objective",
       {{"pattern", pattern_to_json(c.objective.pattern)},
        {"dist_tol", c.objective.dist_tol},
        {"max_gap_factor", c.objective.max_gap_factor},
        {"require_color_consensus", c.objective.require_color_consensus},
        {"hold_ms", c.objective.hold_ms}}},
      {"capabilities",
       {{"local_sensing", c.capabilities.local_sensing},
        {"global_sensing", c.capabilities.global_sensing},
        {"color_switching", c.capabilities.color_switching}}},
      {"max_players", c.max_players},
      {"placement", placement_to_json(c.placement)},
      {"countdown_ms", c.countdown_ms},
  };
}

InstanceConfig load_config(const json& doc) {
  InstanceConfig c = config_from_json(doc);
  if (auto v = c.violations(); !v.empty()) throw ConfigError(join_lines(v));
  return c;
}

InstanceConfig load_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path);
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::exception& e) {
    throw ConfigError(path + ": " + e.what());
  }
  return load_config(doc);
}

std::vector<AgentState> place_agents(const InstanceConfig& config, int count) {
  std::vector<AgentState> agents;
  agents.reserve(static_cast<std::size_t>(count));
  if (const auto* e = std::get_if<ExplicitPlacement>(&config.placement)) {
    if (count > static_cast<int>(e->agents.size())) {
      throw ConfigError("explicit placement lists fewer agents than players");
    }
    for (int i = 0; i < count; ++i) {
      AgentState a;
      a.id = i;
      a.pos = e->agents[static_cast<std::size_t>(i)].pos;
      a.color = e->agents[static_cast<std::size_t>(i)].color;
      agents.push_back(a);
    }
    return agents;
  }

  const auto& uniform = std::get<UniformRandomPlacement>(config.placement);
  std::mt19937_64 rng(uniform.seed);
  const double r = config.physics.agent_radius;
  const double min_sep = 2.0 * r + 2.0;
  const double span_x = config.arena.width - 2.0 * r;
  const double span_y = config.arena.height - 2.0 * r;
  constexpr int kAttempts = 100000;
  for (int i = 0; i < count; ++i) {
    AgentState a;
    a.id = i;
    bool placed = false;
    for (int attempt = 0; attempt < kAttempts && !placed; ++attempt) {
      a.pos = {r + span_x * unit_double(rng), r + span_y * unit_double(rng)};
      placed = std::none_of(agents.begin(), agents.end(), [&](const AgentState& o) {
        return distance(o.pos, a.pos) < min_sep;
      });
    }
    if (!placed) {
      std::ostringstream msg;
      msg << "cannot place " << count << " agents in a " << config.arena.width << "x"
          << config.arena.height << " arena";
      throw ConfigError(msg.str());
    }
    a.color = *color_from_code(static_cast<int>(rng() % 3) + 1);
    agents.push_back(a);
  }
  return agents;
}

}  // namespace swarm
