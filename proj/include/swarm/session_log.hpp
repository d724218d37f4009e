#pragma once

// Append-only instance log. Newline-delimited JSON: one header line, then
// one record per line, then a footer line carrying the record count and a
// CRC-32 of every byte before it. Any prefix cut at a line boundary parses
// in recovery mode.

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <memory>
#include <optional>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "swarm/core_model.hpp"

namespace swarm {

inline constexpr const char* kLogFormat = "swarm-log/1";
inline constexpr const char* kSoftwareVersion = "0.1.0";

enum class RecordKind {
  State,
  Input,
  Color,
  Join,
  Leave,
  InstanceStart,
  ObjectiveComplete,
  InstanceEnd,
};

std::string_view record_kind_name(RecordKind kind);
std::optional<RecordKind> record_kind_from_name(std::string_view name);

struct LogRecord {
  std::int64_t t_ms = 0;
  RecordKind kind = RecordKind::State;
  nlohmann::json payload = nlohmann::json::object();  // kind-specific fields

  nlohmann::json to_json() const;
};

// Builders for the kind-specific payloads.
namespace records {
nlohmann::json agents_array(const std::vector<AgentState>& agents);
LogRecord state(const WorldState& world);
LogRecord input(std::int64_t t_ms, AgentId agent, MotionIntent keys);
LogRecord color(std::int64_t t_ms, AgentId agent, AgentColor color);
LogRecord join(std::int64_t t_ms, AgentId agent, const std::string& player, int ordinal);
LogRecord leave(std::int64_t t_ms, AgentId agent, const std::string& player);
LogRecord instance_start(std::int64_t t_ms, const std::vector<AgentState>& agents);
LogRecord objective_complete(std::int64_t t_ms, std::int64_t tick, double residual);
LogRecord instance_end(std::int64_t t_ms, std::string_view phase, std::string_view reason = {});
}  // namespace records

/// Decoded `agents` array of a state or instance_start record.
std::vector<AgentState> agents_from_json(const nlohmann::json& arr);

struct LogHeader {
  std::string instance_id;
  std::string session_id;
  nlohmann::json config;  // normalized InstanceConfig document
  std::optional<std::uint64_t> placement_seed;
  std::string software_version = kSoftwareVersion;

  nlohmann::json to_json() const;
  static LogHeader from_json(const nlohmann::json& j);
};

/// Serializes records to a byte stream. Single writer.
class LogWriter {
 public:
  LogWriter(std::ostream& out, const LogHeader& header);

  /// Throws ContractViolation when t_ms goes backwards, IoError when the
  /// stream fails. Flushes at least once per simulated second.
  void append(const LogRecord& record);
  /// Writes the footer. Further appends are contract violations.
  void close();

  bool closed() const { return closed_; }
  std::size_t record_count() const { return count_; }
  std::int64_t last_t_ms() const { return last_t_ms_; }

 private:
  void write_line(const std::string& line);

  std::ostream& out_;
  std::uint32_t crc_ = 0;
  std::size_t count_ = 0;
  std::int64_t last_t_ms_ = 0;
  std::int64_t last_flush_t_ms_ = 0;
  bool closed_ = false;
};

/// LogWriter over a file at `<dir>/<instance_id>.jsonl`, optionally
/// gzip-compressed to `.jsonl.gz` on close.
class FileLog {
 public:
  FileLog(std::filesystem::path path, const LogHeader& header, bool gzip_on_close);
  ~FileLog();
  FileLog(const FileLog&) = delete;
  FileLog& operator=(const FileLog&) = delete;

  LogWriter& writer() { return *writer_; }
  /// Returns the final path (with .gz when compressed).
  std::filesystem::path close();
  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
  bool gzip_;
  std::ofstream file_;
  std::unique_ptr<LogWriter> writer_;
};

struct SessionLog {
  LogHeader header;
  std::vector<LogRecord> records;
  bool has_footer = false;
  bool checksum_ok = false;
  bool torn_tail = false;  // trailing bytes that did not form a record

  const LogRecord* find_first(RecordKind kind) const;
};

enum class ReadMode {
  Strict,   // footer and checksum required
  Recover,  // longest valid prefix; torn tail dropped
};

/// Throws ParseError for unreadable logs (Strict: any defect; Recover: a
/// missing or malformed header).
SessionLog parse_log(std::string_view bytes, ReadMode mode = ReadMode::Strict);
/// Reads plain or gzip-compressed files.
std::string read_log_bytes(const std::filesystem::path& path);
SessionLog read_log_file(const std::filesystem::path& path, ReadMode mode = ReadMode::Strict);

/// Opaque player label for logs (tokens are never written).
std::string token_hash(std::string_view token);

std::uint32_t crc32_of(std::string_view bytes, std::uint32_t seed = 0);

}  // namespace swarm
