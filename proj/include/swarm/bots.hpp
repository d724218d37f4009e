#pragma once

// Scripted players and the headless runner. Bots talk to the Session
// through the JSON wire codec, exactly like a browser would, and see only
// what a human player sees.

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "swarm/config.hpp"
#include "swarm/protocol.hpp"
#include "swarm/session.hpp"
#include "swarm/session_log.hpp"

namespace swarm {

struct PolicyObservation {
  std::optional<ScanFrame> scan;          // absent without local sensing
  std::optional<OverheadFrame> overhead;  // latest received; absent without global sensing
  std::optional<std::int64_t> overhead_age_ticks;
  std::optional<AgentColor> own_color;
  std::int64_t tick = 0;  // clock time in ticks
};

struct PolicyAction {
  MotionIntent keys;
  std::optional<AgentColor> color;
  bool operator==(const PolicyAction&) const = default;
};

class Policy {
 public:
  virtual ~Policy() = default;
  virtual PolicyAction act(const PolicyObservation& obs) = 0;
};

/// Compass key set whose direction is closest in angle to `v`. Ties go to
/// the lexicographically smallest key sequence (Up < Down < Left < Right).
/// Zero vector gives no keys.
MotionIntent compass_keys(Vec2 v);

/// Steering rule of the oracle policy: no keys within `stop_radius` of the
/// target, else the compass keys toward it.
MotionIntent oracle_keys(Vec2 self, Vec2 target, double stop_radius);

/// Reactive rule over one scan: flee the nearest hit closer than
/// 2 * agent_radius + 4, else follow the nearest visible wall clockwise,
/// else Up.
MotionIntent local_keys(const ScanFrame& scan, double agent_radius);

class IdlePolicy final : public Policy {
 public:
  PolicyAction act(const PolicyObservation&) override { return {}; }
};

/// Privileged test policy: knows its target slot and, through `pose`, its
/// own position. Requests the target color once.
class OraclePolicy final : public Policy {
 public:
  OraclePolicy(Vec2 target, AgentColor target_color, double stop_radius,
               std::function<Vec2()> pose);
  PolicyAction act(const PolicyObservation& obs) override;

 private:
  Vec2 target_;
  AgentColor target_color_;
  double stop_radius_;
  std::function<Vec2()> pose_;
  bool color_sent_ = false;
};

class LocalPolicy final : public Policy {
 public:
  explicit LocalPolicy(double agent_radius) : agent_radius_(agent_radius) {}
  PolicyAction act(const PolicyObservation& obs) override;

 private:
  double agent_radius_;
};

/// Everything one bot's connection received, for capability audits.
struct BotRecording {
  std::map<std::string, std::int64_t> frames_by_type;
  std::vector<std::string> error_codes;
  std::int64_t tick_order_violations = 0;  // non-increasing ticks within a frame type
  std::int64_t max_overhead_age_ticks = 0;
  std::int64_t policy_observations_with_scan = 0;
};

/// In-process player: owns a Session connection and speaks the wire codec.
class BotClient {
 public:
  BotClient(Session& session, std::optional<std::string> token = std::nullopt);

  /// Decode everything queued for this bot.
  void receive();
  /// Current observation at clock `tick`; also updates the recording.
  PolicyObservation observe(std::int64_t tick);
  /// Encode and send the frames that realize `action`.
  void apply(const PolicyAction& action);
  void disconnect();

  ConnectionId connection() const { return conn_; }
  const std::string& token() const { return token_; }
  std::optional<AgentId> agent() const { return agent_; }
  const nlohmann::json& config() const { return config_; }
  const BotRecording& recording() const { return recording_; }
  std::optional<Phase> phase() const { return phase_; }

 private:
  Session& session_;
  ConnectionId conn_;
  bool connected_ = true;
  std::string token_;
  std::optional<AgentId> agent_;
  nlohmann::json config_;
  std::optional<AgentColor> own_color_;
  std::optional<ScanFrame> scan_;
  std::optional<OverheadFrame> overhead_;
  std::optional<Phase> phase_;
  std::optional<MotionIntent> sent_keys_;
  std::map<std::string, std::int64_t> last_tick_by_type_;
  BotRecording recording_;
};

enum class PolicyKind { Oracle, Local, Idle };

std::optional<PolicyKind> policy_kind_from_name(std::string_view name);

/// What a policy factory may know when a bot is set up.
struct BotContext {
  AgentId agent = 0;
  const InstanceConfig* config = nullptr;
  /// Privileged: authoritative own position. Only oracle bots use it.
  std::function<Vec2()> pose;
  /// Privileged: assigned target slot (oracle runs only).
  std::optional<Vec2> slot;
};

using PolicyFactory = std::function<std::unique_ptr<Policy>(const BotContext&)>;

PolicyFactory make_policy_factory(PolicyKind kind);

struct HeadlessOptions {
  int bots = 25;
  std::int64_t max_ticks = 6000;
  std::uint64_t token_seed = 1;
  /// Write the log here (".gz" suffix compresses). Empty keeps it in memory.
  std::optional<std::filesystem::path> out;
};

struct HeadlessResult {
  SessionLog log;
  std::string log_text;  // exact bytes (uncompressed)
  Phase final_phase = Phase::Running;
  std::int64_t ticks = 0;
  std::vector<BotRecording> recordings;  // per bot, connection order
  InstanceCounters counters;
  std::chrono::steady_clock::duration wall_time{};
};

/// Assigns perimeter slots to agents: both sorted by angle around the
/// pattern, then the cyclic shift with the smallest worst-case distance.
std::map<AgentId, Vec2> assign_slots(const std::vector<AgentState>& agents, const Pattern& pattern);

/// Runs one instance to completion or `max_ticks` on simulated time.
/// A policy exception aborts the instance; the log records the error.
HeadlessResult run_headless(const InstanceConfig& config, const PolicyFactory& policies,
                            const HeadlessOptions& options);

}  // namespace swarm
