#pragma once

// The authoritative game session: player identities, the instance
// lifecycle and the fixed-step tick loop. Session itself is
// single-threaded; transports call it from one loop thread and exchange
// frames through per-connection Outboxes.

#include <cstdint>
#include <deque>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "swarm/config.hpp"
#include "swarm/objective.hpp"
#include "swarm/protocol.hpp"
#include "swarm/sensing.hpp"
#include "swarm/session_log.hpp"

namespace swarm {

using ConnectionId = std::uint64_t;
using protocol::Phase;

/// Bounded outbound frame queue. When full, the oldest frame is dropped so
/// that a slow reader never blocks the producer. Thread-safe.
class Outbox {
 public:
  explicit Outbox(std::size_t capacity) : capacity_(capacity) {}

  void push(std::string frame);
  std::vector<std::string> drain();
  std::size_t size() const;
  std::size_t dropped() const;
  /// Called (outside the lock) after every push.
  void set_notifier(std::function<void()> fn);

 private:
  mutable std::mutex mu_;
  std::deque<std::string> frames_;
  std::size_t capacity_;
  std::size_t dropped_ = 0;
  std::function<void()> notify_;
};

/// Admin failure with an HTTP-style status: 404 unknown instance,
/// 409 wrong phase, 422 invalid config.
class AdminError : public std::runtime_error {
 public:
  AdminError(int status, std::string message, std::vector<std::string> details = {})
      : std::runtime_error(std::move(message)), status_(status), details_(std::move(details)) {}
  int status() const noexcept { return status_; }
  const std::vector<std::string>& details() const noexcept { return details_; }

 private:
  int status_;
  std::vector<std::string> details_;
};

struct PlayerIdentity {
  std::string token;  // 128-bit random value, hex encoded
  int ordinal = 0;    // 1-based join order within the session
  std::string session_id;
};

struct SessionOptions {
  std::string session_id = "session";
  /// Logs go to `<log_dir>/<session_id>/<instance_id>.jsonl`. Empty keeps
  /// logs in memory (see Session::last_log_text).
  std::filesystem::path log_dir;
  bool gzip_logs = false;
  std::size_t outbound_capacity = 256;
  /// Mints identity tokens. Defaults to std::random_device.
  std::function<std::string()> token_source;
};

struct TickReport {
  std::int64_t tick = 0;
  bool overhead_captured = false;
  bool completed = false;
  bool aborted = false;
};

/// Per-instance frame accounting, used by tests and the status endpoint.
struct InstanceCounters {
  std::int64_t state_records = 0;
  std::int64_t overhead_broadcasts = 0;
  std::int64_t scan_frames = 0;
  std::int64_t capability_denials = 0;
};

class Session {
 public:
  explicit Session(SessionOptions options = {});
  ~Session();
  Session(const Session&) = delete;
  Session& operator=(const Session&) = delete;

  // ---- transport side ----
  ConnectionId open_connection();
  std::shared_ptr<Outbox> outbox(ConnectionId id) const;
  void close_connection(ConnectionId id);
  /// Returns false when the transport should close the connection (a
  /// protocol error frame has been queued).
  bool handle_message(ConnectionId id, std::string_view text);

  // ---- admin side (throw AdminError) ----
  /// Returns the normalized config document of the new Lobby instance.
  nlohmann::json create_instance(const nlohmann::json& config_doc);
  void start(const std::string& instance_id);
  void abort(const std::string& instance_id, std::string_view reason = "admin");
  nlohmann::json status(const std::string& instance_id) const;
  nlohmann::json players() const;

  // ---- simulation loop ----
  bool running() const;
  /// One fixed simulation step. Requires a Running instance.
  TickReport tick();

  std::optional<Phase> phase() const;
  const WorldState* world() const;
  const InstanceConfig* config() const;
  std::optional<std::string> current_instance_id() const;
  const InstanceCounters* counters() const;
  std::int64_t tick_period_ms() const;
  /// Full text of the most recently closed in-memory log.
  const std::string& last_log_text() const { return last_log_text_; }
  std::optional<std::filesystem::path> last_log_path() const { return last_log_path_; }
  std::optional<AgentId> agent_of(ConnectionId id) const;

 private:
  struct Player {
    PlayerIdentity identity;
    std::string hash;
    std::optional<ConnectionId> connection;
    std::optional<AgentId> agent;  // binding in the current instance
  };

  struct Connection {
    std::shared_ptr<Outbox> outbox;
    std::optional<std::string> token;  // set after hello
    bool spectator = false;
  };

  struct PendingInput {
    std::optional<MotionIntent> keys;
    std::vector<AgentColor> colors;
  };

  struct Instance;

  void send(ConnectionId id, const protocol::ServerMessage& msg);
  void send_raw(ConnectionId id, const std::string& frame);
  void broadcast_phase();
  void send_welcome(ConnectionId id);
  void bind_lobby_player(Player& p);
  void finish(Phase end_phase, std::string_view reason);
  void append_log(const LogRecord& rec);
  std::string mint_token();

  SessionOptions options_;
  std::map<ConnectionId, Connection> connections_;
  std::map<std::string, Player> players_;  // by token
  ConnectionId next_connection_ = 1;
  int next_ordinal_ = 1;
  int next_instance_ = 1;
  std::unique_ptr<Instance> instance_;
  std::map<std::string, nlohmann::json> finished_;  // status of ended instances
  std::string last_log_text_;
  std::optional<std::filesystem::path> last_log_path_;
};

}  // namespace swarm
