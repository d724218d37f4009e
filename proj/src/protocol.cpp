#include "swarm/protocol.hpp"

#include "swarm/errors.hpp"

namespace swarm::protocol {

using nlohmann::json;

namespace {

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

json parse_object(std::string_view text) {
  json doc = json::parse(text.begin(), text.end(), nullptr, /*allow_exceptions=*/false);
  if (doc.is_discarded() || !doc.is_object()) throw ParseError("frame is not a JSON object");
  if (!doc.contains("type") || !doc["type"].is_string()) throw ParseError("frame has no type");
  return doc;
}

AgentColor color_field(const json& v) {
  if (!v.is_number_integer()) throw ParseError("color must be an integer code");
  auto c = color_from_code(v.get<int>());
  if (!c) throw ParseError("color code out of range");
  return *c;
}

}  // namespace

std::string_view phase_name(Phase p) {
  switch (p) {
    case Phase::Lobby: return "Lobby";
    case Phase::Running: return "Running";
    case Phase::Complete: return "Complete";
    case Phase::Aborted: return "Aborted";
  }
  return "?";
}

std::optional<Phase> phase_from_name(std::string_view name) {
  for (Phase p : {Phase::Lobby, Phase::Running, Phase::Complete, Phase::Aborted}) {
    if (phase_name(p) == name) return p;
  }
  return std::nullopt;
}

std::string encode(const ClientMessage& msg) {
  json j = std::visit(
      Overloaded{
          [](const Hello& h) -> json {
            return {{"type", "hello"}, {"token", h.token ? json(*h.token) : json(nullptr)}};
          },
          [](const Input& in) -> json {
            json keys = json::array();
            for (MoveKey k : in.keys.keys()) keys.push_back(std::string(key_name(k)));
            return {{"type", "input"}, {"keys", keys}};
          },
          [](const ColorKey& c) -> json {
            return {{"type", "color"}, {"key", std::string(color_key(c.color))}};
          },
      },
      msg);
  return j.dump();
}

ClientMessage decode_client(std::string_view text) {
  const json doc = parse_object(text);
  const std::string type = doc["type"].get<std::string>();
  if (type == "hello") {
    Hello h;
    if (auto it = doc.find("token"); it != doc.end() && !it->is_null()) {
      if (!it->is_string()) throw ParseError("hello token must be a string or null");
      h.token = it->get<std::string>();
    }
    return h;
  }
  if (type == "input") {
    auto it = doc.find("keys");
    if (it == doc.end() || !it->is_array()) throw ParseError("input frame needs a keys array");
    Input in;
    for (const auto& k : *it) {
      if (!k.is_string()) throw ParseError("input keys must be strings");
      auto key = key_from_name(k.get<std::string>());
      if (!key) throw ParseError("unknown key '" + k.get<std::string>() + "'");
      in.keys.press(*key);
    }
    return in;
  }
  if (type == "color") {
    auto it = doc.find("key");
    if (it == doc.end() || !it->is_string()) throw ParseError("color frame needs a key");
    auto c = color_from_key(it->get<std::string>());
    if (!c) throw ParseError("color key must be A, S or D");
    return ColorKey{*c};
  }
  throw ParseError("unknown client frame type '" + type + "'");
}

std::string encode(const ServerMessage& msg) {
  json j = std::visit(
      Overloaded{
          [](const Welcome& w) -> json {
            return {{"type", "welcome"},
                    {"token", w.token},
                    {"agent_id", w.agent_id ? json(*w.agent_id) : json(nullptr)},
                    {"color", w.color ? json(color_code(*w.color)) : json(nullptr)},
                    {"config", w.config}};
          },
          [](const ScanFrame& s) -> json {
            json hits = json::array();
            for (const auto& h : s.hits) hits.push_back(json::array({h.distance, h.wire_code()}));
            return {{"type", "scan"},
                    {"tick", s.tick},
                    {"hits", std::move(hits)},
                    {"self_color", color_code(s.self_color)}};
          },
          [](const OverheadFrame& o) -> json {
            json blips = json::array();
            for (const auto& b : o.blips) {
              blips.push_back(json::array({b.pos.x, b.pos.y, color_code(b.color)}));
            }
            return {{"type", "overhead"},
                    {"snapshot_tick", o.snapshot_tick},
                    {"fov", json::array({o.fov.x, o.fov.y, o.fov.w, o.fov.h})},
                    {"blips", std::move(blips)}};
          },
          [](const PhaseFrame& p) -> json {
            json j = {{"type", "phase"}, {"phase", std::string(phase_name(p.phase))}, {"tick", p.tick}};
            if (p.countdown_ms) j["countdown_ms"] = *p.countdown_ms;
            if (p.color) j["color"] = color_code(*p.color);
            return j;
          },
          [](const ErrorFrame& e) -> json {
            return {{"type", "error"}, {"code", e.code}, {"message", e.message}};
          },
      },
      msg);
  return j.dump();
}

ServerMessage decode_server(std::string_view text) {
  const json doc = parse_object(text);
  const std::string type = doc["type"].get<std::string>();
  try {
    if (type == "welcome") {
      Welcome w;
      w.token = doc.at("token").get<std::string>();
      if (const auto& a = doc.at("agent_id"); !a.is_null()) w.agent_id = a.get<AgentId>();
      if (auto it = doc.find("color"); it != doc.end() && !it->is_null()) w.color = color_field(*it);
      w.config = doc.value("config", json(nullptr));
      return w;
    }
    if (type == "scan") {
      ScanFrame s;
      s.tick = doc.at("tick").get<std::int64_t>();
      s.self_color = color_field(doc.at("self_color"));
      for (const auto& h : doc.at("hits")) {
        s.hits.push_back(RayHit::from_wire(h.at(0).get<double>(), h.at(1).get<int>()));
      }
      return s;
    }
    if (type == "overhead") {
      OverheadFrame o;
      o.snapshot_tick = doc.at("snapshot_tick").get<std::int64_t>();
      const auto& f = doc.at("fov");
      o.fov = Rect{f.at(0).get<double>(), f.at(1).get<double>(), f.at(2).get<double>(),
                   f.at(3).get<double>()};
      for (const auto& b : doc.at("blips")) {
        o.blips.push_back({{b.at(0).get<double>(), b.at(1).get<double>()}, color_field(b.at(2))});
      }
      return o;
    }
    if (type == "phase") {
      PhaseFrame p;
      auto phase = phase_from_name(doc.at("phase").get<std::string>());
      if (!phase) throw ParseError("unknown phase");
      p.phase = *phase;
      p.tick = doc.value("tick", std::int64_t{0});
      if (auto it = doc.find("countdown_ms"); it != doc.end()) p.countdown_ms = it->get<std::int64_t>();
      if (auto it = doc.find("color"); it != doc.end() && !it->is_null()) p.color = color_field(*it);
      return p;
    }
    if (type == "error") {
      return ErrorFrame{doc.at("code").get<std::string>(), doc.value("message", std::string())};
    }
  } catch (const json::exception& e) {
    throw ParseError("malformed " + type + " frame: " + e.what());
  }
  throw ParseError("unknown server frame type '" + type + "'");
}

std::string_view frame_type(const ServerMessage& msg) {
  return std::visit(Overloaded{
                        [](const Welcome&) { return std::string_view("welcome"); },
                        [](const ScanFrame&) { return std::string_view("scan"); },
                        [](const OverheadFrame&) { return std::string_view("overhead"); },
                        [](const PhaseFrame&) { return std::string_view("phase"); },
                        [](const ErrorFrame&) { return std::string_view("error"); },
                    },
                    msg);
}

}  // namespace swarm::protocol
