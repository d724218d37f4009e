#pragma once

// Player wire protocol: UTF-8 JSON, one object per message. There is no
// player-to-player payload; the only player-visible channels are positions
// and colors.

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <variant>

#include <json.hpp>

#include "swarm/core_model.hpp"
#include "swarm/sensing.hpp"

namespace swarm::protocol {

// client -> server

struct Hello {
  std::optional<std::string> token;
  bool operator==(const Hello&) const = default;
};

/// Full set of currently pressed arrow keys (not a delta).
struct Input {
  MotionIntent keys;
  bool operator==(const Input&) const = default;
};

struct ColorKey {
  AgentColor color = AgentColor::C1;  // carried on the wire as "A" | "S" | "D"
  bool operator==(const ColorKey&) const = default;
};

using ClientMessage = std::variant<Hello, Input, ColorKey>;

// server -> client

struct Welcome {
  std::string token;
  std::optional<AgentId> agent_id;  // empty for spectators / no instance
  std::optional<AgentColor> color;
  nlohmann::json config;  // null when no instance exists
};

enum class Phase { Lobby, Running, Complete, Aborted };

std::string_view phase_name(Phase p);
std::optional<Phase> phase_from_name(std::string_view name);

struct PhaseFrame {
  Phase phase = Phase::Lobby;
  std::int64_t tick = 0;
  std::optional<std::int64_t> countdown_ms;
  std::optional<AgentColor> color;  // receiver's own color, when it has an agent
};

struct ErrorFrame {
  std::string code;
  std::string message;
};

using ServerMessage = std::variant<Welcome, ScanFrame, OverheadFrame, PhaseFrame, ErrorFrame>;

namespace error_code {
inline constexpr const char* kProtocol = "protocol_error";
inline constexpr const char* kCapabilityDenied = "capability_denied";
inline constexpr const char* kNotRunning = "not_running";
inline constexpr const char* kSpectator = "spectator";
}  // namespace error_code

std::string encode(const ClientMessage& msg);
std::string encode(const ServerMessage& msg);

/// Throw ParseError on malformed or unknown messages.
ClientMessage decode_client(std::string_view text);
ServerMessage decode_server(std::string_view text);

/// The "type" field of a server frame, e.g. "scan".
std::string_view frame_type(const ServerMessage& msg);

}  // namespace swarm::protocol
