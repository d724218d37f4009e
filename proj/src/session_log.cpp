#include "swarm/session_log.hpp"

#include <cinttypes>
#include <cmath>
#include <cstdio>
#include <sstream>

#include <zlib.h>

#include "swarm/errors.hpp"

namespace swarm {

using nlohmann::json;

namespace {

constexpr std::string_view kKindNames[] = {
    "state", "input", "color", "join", "leave", "instance_start", "objective_complete", "instance_end",
};

std::string hex32(std::uint32_t v) {
  char buf[9];
  std::snprintf(buf, sizeof buf, "%08" PRIx32, v);
  return buf;
}

}  // namespace

std::string_view record_kind_name(RecordKind kind) {
  return kKindNames[static_cast<std::size_t>(kind)];
}

std::optional<RecordKind> record_kind_from_name(std::string_view name) {
  for (std::size_t i = 0; i < std::size(kKindNames); ++i) {
    if (kKindNames[i] == name) return static_cast<RecordKind>(i);
  }
  return std::nullopt;
}

json LogRecord::to_json() const {
  json j = payload;
  j["t_ms"] = t_ms;
  j["kind"] = std::string(record_kind_name(kind));
  return j;
}

namespace records {

json agents_array(const std::vector<AgentState>& agents) {
  json arr = json::array();
  for (const auto& a : agents) arr.push_back(json::array({a.id, a.pos.x, a.pos.y, color_code(a.color)}));
  return arr;
}

LogRecord state(const WorldState& world) {
  return {world.t_ms, RecordKind::State, {{"tick", world.tick}, {"agents", agents_array(world.agents)}}};
}

LogRecord input(std::int64_t t_ms, AgentId agent, MotionIntent keys) {
  json k = json::array();
  for (MoveKey key : keys.keys()) k.push_back(std::string(key_name(key)));
  return {t_ms, RecordKind::Input, {{"agent_id", agent}, {"keys", k}}};
}

LogRecord color(std::int64_t t_ms, AgentId agent, AgentColor c) {
  return {t_ms, RecordKind::Color, {{"agent_id", agent}, {"color", color_code(c)}}};
}

LogRecord join(std::int64_t t_ms, AgentId agent, const std::string& player, int ordinal) {
  return {t_ms, RecordKind::Join, {{"agent_id", agent}, {"player", player}, {"ordinal", ordinal}}};
}

LogRecord leave(std::int64_t t_ms, AgentId agent, const std::string& player) {
  return {t_ms, RecordKind::Leave, {{"agent_id", agent}, {"player", player}}};
}

LogRecord instance_start(std::int64_t t_ms, const std::vector<AgentState>& agents) {
  return {t_ms, RecordKind::InstanceStart, {{"agents", agents_array(agents)}}};
}

LogRecord objective_complete(std::int64_t t_ms, std::int64_t tick, double residual) {
  return {t_ms, RecordKind::ObjectiveComplete, {{"tick", tick}, {"residual", residual}}};
}

LogRecord instance_end(std::int64_t t_ms, std::string_view phase, std::string_view reason) {
  json p = {{"phase", std::string(phase)}};
  if (!reason.empty()) p["reason"] = std::string(reason);
  return {t_ms, RecordKind::InstanceEnd, std::move(p)};
}

}  // namespace records

std::vector<AgentState> agents_from_json(const json& arr) {
  std::vector<AgentState> out;
  try {
    for (const auto& e : arr) {
      AgentState a;
      a.id = e.at(0).get<AgentId>();
      a.pos = {e.at(1).get<double>(), e.at(2).get<double>()};
      auto c = color_from_code(e.at(3).get<int>());
      if (!c) throw ParseError("agent color out of range");
      a.color = *c;
      out.push_back(a);
    }
  } catch (const json::exception& e) {
    throw ParseError(std::string("malformed agents array: ") + e.what());
  }
  return out;
}

json LogHeader::to_json() const {
  json j = {{"kind", "header"},
            {"format", kLogFormat},
            {"instance_id", instance_id},
            {"session_id", session_id},
            {"config", config},
            {"software_version", software_version}};
  j["placement_seed"] = placement_seed ? json(*placement_seed) : json(nullptr);
  return j;
}

LogHeader LogHeader::from_json(const json& j) {
  if (!j.is_object() || j.value("kind", "") != "header") throw ParseError("log header missing");
  if (j.value("format", "") != kLogFormat) throw ParseError("unsupported log format");
  LogHeader h;
  try {
    h.instance_id = j.at("instance_id").get<std::string>();
    h.session_id = j.value("session_id", std::string());
    h.config = j.at("config");
    if (auto it = j.find("placement_seed"); it != j.end() && !it->is_null()) {
      h.placement_seed = it->get<std::uint64_t>();
    }
    h.software_version = j.value("software_version", std::string());
  } catch (const json::exception& e) {
    throw ParseError(std::string("malformed log header: ") + e.what());
  }
  return h;
}

std::uint32_t crc32_of(std::string_view bytes, std::uint32_t seed) {
  return static_cast<std::uint32_t>(
      ::crc32(seed, reinterpret_cast<const Bytef*>(bytes.data()), static_cast<uInt>(bytes.size())));
}

std::string token_hash(std::string_view token) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : token) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016" PRIx64, h);
  return buf;
}

LogWriter::LogWriter(std::ostream& out, const LogHeader& header) : out_(out) {
  write_line(header.to_json().dump());
  out_.flush();
}

void LogWriter::write_line(const std::string& line) {
  out_ << line << '\n';
  if (!out_) throw IoError("log write failed");
  crc_ = crc32_of(line, crc_);
  crc_ = crc32_of("\n", crc_);
}

void LogWriter::append(const LogRecord& record) {
  if (closed_) throw ContractViolation("append to a closed log");
  if (record.t_ms < last_t_ms_) throw ContractViolation("log timestamps must be non-decreasing");
  write_line(record.to_json().dump());
  ++count_;
  last_t_ms_ = record.t_ms;
  const bool lifecycle = record.kind == RecordKind::InstanceStart ||
                         record.kind == RecordKind::ObjectiveComplete ||
                         record.kind == RecordKind::InstanceEnd;
  if (lifecycle || record.t_ms - last_flush_t_ms_ >= 1000) {
    out_.flush();
    if (!out_) throw IoError("log flush failed");
    last_flush_t_ms_ = record.t_ms;
  }
}

void LogWriter::close() {
  if (closed_) return;
  json footer = {{"kind", "footer"}, {"records", count_}, {"crc32", hex32(crc_)}};
  out_ << footer.dump() << '\n';
  out_.flush();
  closed_ = true;
  if (!out_) throw IoError("log close failed");
}

FileLog::FileLog(std::filesystem::path path, const LogHeader& header, bool gzip_on_close)
    : path_(std::move(path)), gzip_(gzip_on_close) {
  if (path_.has_parent_path()) std::filesystem::create_directories(path_.parent_path());
  file_.open(path_, std::ios::binary | std::ios::trunc);
  if (!file_) throw IoError("cannot open log file " + path_.string());
  writer_ = std::make_unique<LogWriter>(file_, header);
}

FileLog::~FileLog() {
  if (file_.is_open()) file_.close();
}

std::filesystem::path FileLog::close() {
  if (!file_.is_open()) return path_;
  writer_->close();
  file_.close();
  if (!gzip_) return path_;

  std::string bytes = read_log_bytes(path_);
  auto gz_path = path_;
  gz_path += ".gz";
  gzFile gz = gzopen(gz_path.c_str(), "wb");
  if (gz == nullptr) throw IoError("cannot open " + gz_path.string());
  const int written = gzwrite(gz, bytes.data(), static_cast<unsigned>(bytes.size()));
  const int rc = gzclose(gz);
  if (written != static_cast<int>(bytes.size()) || rc != Z_OK) {
    throw IoError("gzip compression failed for " + gz_path.string());
  }
  std::filesystem::remove(path_);
  path_ = gz_path;
  return path_;
}

const LogRecord* SessionLog::find_first(RecordKind kind) const {
  for (const auto& r : records) {
    if (r.kind == kind) return &r;
  }
  return nullptr;
}

SessionLog parse_log(std::string_view bytes, ReadMode mode) {
  const bool strict = mode == ReadMode::Strict;
  SessionLog log;
  std::size_t pos = 0;
  std::uint32_t crc = 0;
  bool have_header = false;
  bool have_start = false;
  std::int64_t last_t = 0;
  std::int64_t tick_period = 0;

  auto fail = [&](const std::string& why) {
    if (strict || !have_header) throw ParseError(why);
    log.torn_tail = true;
  };

  while (pos < bytes.size()) {
    const std::size_t nl = bytes.find('\n', pos);
    if (nl == std::string_view::npos) {
      fail("log ends with a partial line");
      break;
    }
    const std::string_view line = bytes.substr(pos, nl - pos);
    json doc = json::parse(line.begin(), line.end(), nullptr, false);
    if (doc.is_discarded() || !doc.is_object()) {
      fail("unparseable log line at byte " + std::to_string(pos));
      break;
    }

    if (!have_header) {
      log.header = LogHeader::from_json(doc);
      if (const auto& c = log.header.config; c.is_object() && c.contains("physics")) {
        const double rate = c["physics"].value("tick_rate", 0.0);
        if (rate > 0.0) tick_period = static_cast<std::int64_t>(std::llround(1000.0 / rate));
      }
      have_header = true;
    } else if (doc.value("kind", "") == "footer") {
      const bool count_ok = doc.value("records", std::size_t{0}) == log.records.size();
      log.has_footer = true;
      log.checksum_ok = count_ok && doc.value("crc32", "") == hex32(crc);
      if (strict && !log.checksum_ok) throw ParseError("log checksum mismatch");
      if (nl + 1 != bytes.size()) {
        if (strict) throw ParseError("bytes after log footer");
        log.torn_tail = true;
      }
      break;
    } else {
      LogRecord rec;
      auto kind = record_kind_from_name(doc.value("kind", ""));
      auto t = doc.find("t_ms");
      std::string problem;
      if (!kind) {
        problem = "unknown record kind";
      } else if (t == doc.end() || !t->is_number_integer()) {
        problem = "record without integer t_ms";
      } else if (t->get<std::int64_t>() < last_t) {
        problem = "record timestamps go backwards";
      } else if (*kind == RecordKind::InstanceStart && have_start) {
        problem = "second instance_start record";
      } else if (*kind == RecordKind::State && tick_period > 0 &&
                 t->get<std::int64_t>() % tick_period != 0) {
        problem = "state record off the tick grid";
      }
      if (!problem.empty()) {
        fail(problem + " at byte " + std::to_string(pos));
        break;
      }
      rec.kind = *kind;
      rec.t_ms = t->get<std::int64_t>();
      doc.erase("kind");
      doc.erase("t_ms");
      rec.payload = std::move(doc);
      last_t = rec.t_ms;
      have_start = have_start || rec.kind == RecordKind::InstanceStart;
      log.records.push_back(std::move(rec));
    }
    crc = crc32_of(bytes.substr(pos, nl + 1 - pos), crc);
    pos = nl + 1;
  }

  if (!have_header) throw ParseError("empty log");
  if (strict && !log.has_footer) throw ParseError("log has no footer");
  if (strict && !have_start) throw ParseError("log has no instance_start record");
  return log;
}

std::string read_log_bytes(const std::filesystem::path& path) {
  gzFile gz = gzopen(path.c_str(), "rb");  // reads plain files transparently
  if (gz == nullptr) throw IoError("cannot open log " + path.string());
  std::string out;
  char buf[1 << 15];
  int n = 0;
  while ((n = gzread(gz, buf, sizeof buf)) > 0) out.append(buf, static_cast<std::size_t>(n));
  const bool failed = n < 0;
  gzclose(gz);
  if (failed) throw IoError("error reading log " + path.string());
  return out;
}

SessionLog read_log_file(const std::filesystem::path& path, ReadMode mode) {
  return parse_log(read_log_bytes(path), mode);
}

}  // namespace swarm
